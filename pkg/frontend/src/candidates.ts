import { ApiClient } from "./api.js";
import type { Candidate, CandidateStatus, Stats } from "./types.js";

export type CandidatesListener = () => void;

/**
 * Verification list: model-proposed positives awaiting expert confirmation.
 *
 * Status flips optimistically on confirm/reject and reverts if the POST
 * fails. The precision banner is never computed here: after every verdict
 * the stats endpoint is re-fetched and displayed as-is.
 */
export class CandidatesController {
  readonly expertId: string;
  private readonly api: ApiClient;
  private items: Candidate[] = [];
  private statsValue: Stats | null = null;
  private errorMessage: string | null = null;
  private listeners: CandidatesListener[] = [];

  constructor(api: ApiClient, expertId: string) {
    this.api = api;
    this.expertId = expertId;
  }

  onChange(listener: CandidatesListener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  async load(): Promise<void> {
    const [candidates, stats] = await Promise.all([
      this.api.getCandidates(),
      this.api.getStats(),
    ]);
    this.items = candidates.items;
    this.statsValue = stats;
    this.errorMessage = null;
    this.notify();
  }

  candidates(): Candidate[] {
    return this.items;
  }

  stats(): Stats | null {
    return this.statsValue;
  }

  lastError(): string | null {
    return this.errorMessage;
  }

  /** The banner string, straight from the server: "92.41", "pending", or "n/a". */
  precisionBanner(): string {
    const precision = this.statsValue?.results.precision;
    if (precision === undefined || precision === null) return "n/a";
    return precision;
  }

  async verify(listingId: string, confirmed: boolean): Promise<void> {
    const item = this.items.find((c) => c.listing_id === listingId);
    if (!item) return;
    const previous: CandidateStatus = item.status;
    item.status = confirmed ? "confirmed" : "rejected";
    this.notify();
    try {
      await this.api.postVerify(listingId, this.expertId, confirmed);
    } catch (error) {
      item.status = previous;
      this.errorMessage = error instanceof Error ? error.message : String(error);
      this.notify();
      return;
    }
    this.statsValue = await this.api.getStats();
    this.errorMessage = null;
    this.notify();
  }
}
