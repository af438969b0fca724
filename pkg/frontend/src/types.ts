/** Wire types for the moderation service JSON API (the compatibility contract). */

export type Action = "allow" | "block";
export type ModerationLayer = "none" | "rule_based" | "ai_detection";
export type ReviewerLabel = "hate" | "non_hate";

export interface ModerateResponse {
  action: Action;
  hate_score: number;
  layer: ModerationLayer;
  rule_hits: string[];
  scorer_version: string;
  verdict_id: string;
}

export interface FeedbackResponse {
  feedback_id: string;
}

export interface HealthResponse {
  status: string;
  rules_version: string;
  scorer_version: string;
}

export type ReviewStatus = "pending" | "submitted";

/** A probed verdict awaiting (or holding) its human review. */
export interface ReviewItem {
  text: string;
  verdict: ModerateResponse;
  status: ReviewStatus;
  feedbackId?: string;
}
