import type { Candidate, QueueItem, Stats, Verdict } from "../src/types.js";
import type { FetchLike } from "../src/api.js";

interface JournalEntry {
  listing_id: string;
  expert_id: string;
  verdict: Verdict;
  stage: "initial" | "verification";
}

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** Truncated percent with two decimals, matching the review service. */
export function truncatedPercent(numerator: number, denominator: number): string {
  const basisPoints = Math.floor((numerator * 10000) / denominator);
  const whole = Math.floor(basisPoints / 100);
  const frac = basisPoints % 100;
  return `${whole}.${String(frac).padStart(2, "0")}`;
}

/**
 * In-memory stand-in for the review service. State mutates through the same
 * routes the console uses, and stats are recomputed per request so tests can
 * check the console displays exactly what the server reports.
 */
export class FakeServer {
  journal: JournalEntry[] = [];
  sample: QueueItem[] = [];
  candidates: Candidate[] = [];
  failNextPost = false;
  requests: string[] = [];

  get fetch(): FetchLike {
    return (input, init) => this.handle(input, init);
  }

  seedQueue(n: number): void {
    this.sample = Array.from({ length: n }, (_, i) => ({
      listing_id: `s${String(i).padStart(3, "0")}`,
      title: `listing ${i}`,
      body: `body text ${i}`,
      badges: { third_person: i % 2 },
      my_verdict: null,
    }));
  }

  seedCandidates(n: number): void {
    this.candidates = Array.from({ length: n }, (_, i) => ({
      listing_id: `c${String(i).padStart(3, "0")}`,
      score: 1 - i / (2 * n),
      seeded: false,
      status: "pending" as const,
      verdicts: {},
    }));
  }

  private pendingFor(expert: string): QueueItem[] {
    const labeled = new Set(
      this.journal
        .filter((e) => e.expert_id === expert && e.stage === "initial")
        .map((e) => e.listing_id),
    );
    return this.sample.filter((item) => !labeled.has(item.listing_id));
  }

  private stats(): Stats {
    const assigned = this.candidates.length;
    const verification = this.journal.filter((e) => e.stage === "verification");
    const verified = new Set(verification.map((e) => e.listing_id)).size;
    const confirmedIds = new Set(
      verification.filter((e) => e.verdict === "positive").map((e) => e.listing_id),
    );
    const confirmed = this.candidates.filter((c) => confirmedIds.has(c.listing_id)).length;
    let precision: string | null;
    if (verified === 0) precision = "pending";
    else if (assigned === 0) precision = null;
    else precision = truncatedPercent(confirmed, assigned);

    const initials = this.journal.filter((e) => e.stage === "initial");
    const labeled = new Set(initials.map((e) => e.listing_id)).size;
    return {
      dataset: {
        raw: 2000,
        rejected: 0,
        filtered: this.sample.length,
        dropped: 2000 - this.sample.length,
        review_sample: this.sample.length,
        labeled,
        unlabeled: this.sample.length - labeled,
      },
      agreement: {
        experts: {},
        intersection: { positive: 0, negative: 0 },
        union: { positive: 0, negative: 0 },
      },
      results: {
        kernel: "rbf",
        policy: "union",
        learner_positive: assigned,
        learner_negative: 0,
        expert_confirmed: confirmed,
        verified,
        precision,
      },
      phones: {},
      top_terms: [],
    };
  }

  private async handle(input: string, init?: RequestInit): Promise<Response> {
    this.requests.push(`${init?.method ?? "GET"} ${input}`);
    const url = new URL(input, "http://service.test");
    const body = init?.body ? (JSON.parse(String(init.body)) as Record<string, unknown>) : {};

    if (init?.method === "POST" && this.failNextPost) {
      this.failNextPost = false;
      return jsonResponse({ code: "unavailable", message: "journal write failed" }, 503);
    }

    if (url.pathname === "/api/queue") {
      const expert = url.searchParams.get("expert") ?? "";
      const page = Number(url.searchParams.get("page") ?? "1");
      const pending = this.pendingFor(expert);
      const items = pending.slice((page - 1) * 20, page * 20);
      return jsonResponse({
        items,
        page,
        page_size: 20,
        remaining: pending.length,
        exhausted: pending.length === 0,
      });
    }
    if (url.pathname === "/api/labels" && init?.method === "POST") {
      const verdict = body.verdict as Verdict;
      if (!["positive", "negative", "skip"].includes(verdict)) {
        return jsonResponse({ code: "invalid_verdict", message: "bad verdict" }, 400);
      }
      this.journal.push({
        listing_id: String(body.listing_id),
        expert_id: String(body.expert_id),
        verdict,
        stage: "initial",
      });
      return jsonResponse({ ok: true });
    }
    if (url.pathname === "/api/candidates") {
      return jsonResponse({ items: this.candidates, count: this.candidates.length });
    }
    if (url.pathname === "/api/verify" && init?.method === "POST") {
      const id = String(body.listing_id);
      const item = this.candidates.find((c) => c.listing_id === id);
      if (!item) return jsonResponse({ code: "unknown_listing", message: "no such id" }, 404);
      const confirmed = Boolean(body.confirmed);
      this.journal.push({
        listing_id: id,
        expert_id: String(body.expert_id),
        verdict: confirmed ? "positive" : "negative",
        stage: "verification",
      });
      item.status = confirmed ? "confirmed" : "rejected";
      return jsonResponse({ ok: true });
    }
    if (url.pathname === "/api/stats") {
      return jsonResponse(this.stats());
    }
    if (url.pathname === "/api/retrain" && init?.method === "POST") {
      return jsonResponse({ ok: true });
    }
    return jsonResponse({ code: "not_found", message: url.pathname }, 404);
  }
}
