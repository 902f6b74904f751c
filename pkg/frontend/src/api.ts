import type {
  ApiErrorBody,
  CandidateList,
  QueuePage,
  Stage,
  Stats,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.code = body.code;
    this.status = status;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed wrapper over the review service endpoints. */
export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: "error", message: `request failed (${response.status})` };
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getQueue(expert: string, page = 1): Promise<QueuePage> {
    const query = new URLSearchParams({ expert, page: String(page) });
    return this.request<QueuePage>(`/api/queue?${query}`);
  }

  postLabel(listingId: string, expertId: string, verdict: Verdict, stage: Stage = "initial") {
    return this.post<{ ok: boolean }>("/api/labels", {
      listing_id: listingId,
      expert_id: expertId,
      verdict,
      stage,
    });
  }

  getCandidates(): Promise<CandidateList> {
    return this.request<CandidateList>("/api/candidates");
  }

  postVerify(listingId: string, expertId: string, confirmed: boolean) {
    return this.post<{ ok: boolean }>("/api/verify", {
      listing_id: listingId,
      expert_id: expertId,
      confirmed,
    });
  }

  getStats(): Promise<Stats> {
    return this.request<Stats>("/api/stats");
  }

  retrain(): Promise<{ ok: boolean }> {
    return this.post<{ ok: boolean }>("/api/retrain", {});
  }
}
