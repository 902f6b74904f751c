import { ApiClient } from "./api.js";
import type { QueueItem, Verdict } from "./types.js";

export interface UnsavedEntry {
  item: QueueItem;
  verdict: Verdict;
  error: string;
}

export type QueueListener = () => void;

/**
 * Working queue for one expert.
 *
 * Labeling is optimistic: the item leaves the queue immediately and the next
 * one gets focus. A failed POST puts the item back at the front, flagged
 * unsaved with the attempted verdict kept for retry. The server remains the
 * source of truth: refills re-fetch, and anything this expert has already
 * labeled never comes back.
 */
export class QueueController {
  readonly expertId: string;
  private readonly api: ApiClient;
  private items: QueueItem[] = [];
  private remaining = 0;
  private exhaustedFlag = false;
  private unsavedEntries = new Map<string, UnsavedEntry>();
  private listeners: QueueListener[] = [];
  private loaded = false;

  constructor(api: ApiClient, expertId: string) {
    this.api = api;
    this.expertId = expertId;
  }

  onChange(listener: QueueListener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  async load(): Promise<void> {
    const page = await this.api.getQueue(this.expertId);
    this.items = page.items.filter((i) => !this.unsavedEntries.has(i.listing_id));
    this.remaining = page.remaining;
    this.exhaustedFlag = page.exhausted;
    this.loaded = true;
    this.notify();
  }

  current(): QueueItem | null {
    const unsaved = this.unsavedEntries.values().next();
    if (!unsaved.done) return unsaved.value.item;
    return this.items[0] ?? null;
  }

  unsaved(): UnsavedEntry[] {
    return [...this.unsavedEntries.values()];
  }

  remainingCount(): number {
    return this.remaining;
  }

  exhausted(): boolean {
    return this.loaded && this.exhaustedFlag && this.items.length === 0
      && this.unsavedEntries.size === 0;
  }

  /** Label the current item; resolves once the server accepted or rejected it. */
  async label(verdict: Verdict): Promise<void> {
    const item = this.current();
    if (!item) return;
    this.unsavedEntries.delete(item.listing_id);
    this.items = this.items.filter((i) => i.listing_id !== item.listing_id);
    this.remaining = Math.max(0, this.remaining - 1);
    this.notify(); // optimistic: next item is focused already
    await this.send(item, verdict);
    if (this.items.length === 0 && this.remaining > 0) {
      await this.load();
    }
  }

  /** Re-attempt the stored verdict of a failed label. */
  async retry(listingId: string): Promise<void> {
    const entry = this.unsavedEntries.get(listingId);
    if (!entry) return;
    this.unsavedEntries.delete(listingId);
    this.notify();
    await this.send(entry.item, entry.verdict);
  }

  private async send(item: QueueItem, verdict: Verdict): Promise<void> {
    try {
      await this.api.postLabel(item.listing_id, this.expertId, verdict);
    } catch (error) {
      this.unsavedEntries.set(item.listing_id, {
        item,
        verdict,
        error: error instanceof Error ? error.message : String(error),
      });
      this.remaining += 1; // roll back: the item is still unlabeled server-side
    }
    this.notify();
  }
}
