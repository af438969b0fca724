/**
 * Review queue state machine.
 *
 * Confirm sends the reviewer label that matches the served verdict, override
 * sends the opposite; an item accepts exactly one submission. State persists
 * through a pluggable key-value store so submitted items survive reloads.
 */

import type { ApiClient } from "./api.js";
import type { Action, ModerateResponse, ReviewItem, ReviewerLabel } from "./types.js";

export type ReviewDecision = "confirm" | "override";

export function reviewerLabelFor(action: Action, decision: ReviewDecision): ReviewerLabel {
  const agrees = decision === "confirm";
  if (action === "block") {
    return agrees ? "hate" : "non_hate";
  }
  return agrees ? "non_hate" : "hate";
}

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const STORAGE_KEY = "modpipe-review-queue";

export class ReviewQueue {
  private items: ReviewItem[] = [];

  constructor(private readonly storage?: KeyValueStore) {
    const saved = storage?.getItem(STORAGE_KEY);
    if (saved) {
      try {
        this.items = JSON.parse(saved) as ReviewItem[];
      } catch {
        this.items = []; // ignore corrupt local state
      }
    }
  }

  list(): readonly ReviewItem[] {
    return this.items;
  }

  get(verdictId: string): ReviewItem | undefined {
    return this.items.find((item) => item.verdict.verdict_id === verdictId);
  }

  add(text: string, verdict: ModerateResponse): ReviewItem {
    const item: ReviewItem = { text, verdict, status: "pending" };
    this.items.unshift(item); // newest first, like the feedback store
    this.persist();
    return item;
  }

  canSubmit(verdictId: string): boolean {
    return this.get(verdictId)?.status === "pending";
  }

  /**
   * Submit one review; resolves to the feedback id, or null when the item is
   * unknown or already submitted (duplicate submissions never reach the API).
   */
  async submit(
    api: ApiClient,
    verdictId: string,
    decision: ReviewDecision,
    reviewerId: string,
  ): Promise<string | null> {
    const item = this.get(verdictId);
    if (!item || item.status !== "pending") {
      return null;
    }
    const label = reviewerLabelFor(item.verdict.action, decision);
    const response = await api.submitFeedback(verdictId, label, reviewerId);
    item.status = "submitted";
    item.feedbackId = response.feedback_id;
    this.persist();
    return response.feedback_id;
  }

  private persist(): void {
    this.storage?.setItem(STORAGE_KEY, JSON.stringify(this.items));
  }
}
