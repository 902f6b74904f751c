import type { Candidate, QueueItem, Stats } from "./types.js";
import type { UnsavedEntry } from "./queue.js";

/** Element with text set via textContent: listing text can never become markup. */
export function textEl(tag: string, text: string, className?: string): HTMLElement {
  const el = document.createElement(tag);
  el.textContent = text;
  if (className) el.className = className;
  return el;
}

export function renderQueueItem(item: QueueItem): HTMLElement {
  const card = document.createElement("article");
  card.className = "queue-card";
  card.dataset.listingId = item.listing_id;
  card.append(textEl("h2", item.title || "(untitled)", "title"));
  card.append(textEl("p", item.body, "body"));

  const badges = document.createElement("ul");
  badges.className = "badges";
  for (const [name, bit] of Object.entries(item.badges)) {
    if (bit === 1) badges.append(textEl("li", name, "badge"));
  }
  card.append(badges);

  if (item.my_verdict) {
    card.append(textEl("p", `your verdict: ${item.my_verdict}`, "my-verdict"));
  }
  return card;
}

export function renderUnsaved(
  entries: UnsavedEntry[],
  onRetry: (listingId: string) => void,
): HTMLElement {
  const box = document.createElement("div");
  box.className = "unsaved";
  for (const entry of entries) {
    const row = document.createElement("div");
    row.className = "unsaved-row";
    row.append(
      textEl("span", `unsaved ${entry.verdict} for ${entry.item.listing_id}: ${entry.error}`),
    );
    const retry = textEl("button", "retry", "retry");
    retry.addEventListener("click", () => onRetry(entry.item.listing_id));
    row.append(retry);
    box.append(row);
  }
  return box;
}

export function renderCandidateRow(
  candidate: Candidate,
  onVerify: (listingId: string, confirmed: boolean) => void,
): HTMLElement {
  const row = document.createElement("tr");
  row.className = `candidate status-${candidate.status}`;
  row.dataset.listingId = candidate.listing_id;
  row.append(textEl("td", candidate.listing_id));
  row.append(textEl("td", candidate.score.toFixed(4)));
  row.append(textEl("td", candidate.status));

  const actions = document.createElement("td");
  const confirm = textEl("button", "confirm", "confirm");
  confirm.addEventListener("click", () => onVerify(candidate.listing_id, true));
  const reject = textEl("button", "reject", "reject");
  reject.addEventListener("click", () => onVerify(candidate.listing_id, false));
  actions.append(confirm, reject);
  row.append(actions);
  return row;
}

export function renderPrecisionBanner(banner: string, confirmed: number, assigned: number): HTMLElement {
  const el = textEl(
    "div",
    banner === "pending"
      ? "precision: pending verification"
      : `precision: ${banner}% (${confirmed} of ${assigned} confirmed)`,
    "precision-banner",
  );
  return el;
}

export function renderEmptyCandidates(): HTMLElement {
  return textEl(
    "p",
    "No candidates yet. Label listings in the queue, then retrain.",
    "empty-state",
  );
}

export function renderStats(stats: Stats): HTMLElement {
  const box = document.createElement("dl");
  box.className = "stats";
  const pairs: [string, string][] = [
    ["raw listings", String(stats.dataset.raw)],
    ["kept after filter", String(stats.dataset.filtered)],
    ["review sample", String(stats.dataset.review_sample)],
    ["labeled", String(stats.dataset.labeled)],
    ["learner positives", String(stats.results.learner_positive)],
    ["expert confirmed", String(stats.results.expert_confirmed)],
    ["precision", stats.results.precision ?? "n/a"],
  ];
  for (const [name, value] of pairs) {
    box.append(textEl("dt", name));
    box.append(textEl("dd", value));
  }
  return box;
}
