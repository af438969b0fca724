/**
 * Typed client over the three documented endpoints. The console performs no
 * moderation logic of its own: everything it displays comes back from here.
 */

import type { FeedbackResponse, HealthResponse, ModerateResponse, ReviewerLabel } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = typeof body?.detail === "string" ? body.detail : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  moderate(text: string): Promise<ModerateResponse> {
    return this.request<ModerateResponse>("/v1/moderate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  submitFeedback(
    verdictId: string,
    reviewerLabel: ReviewerLabel,
    reviewerId: string,
  ): Promise<FeedbackResponse> {
    return this.request<FeedbackResponse>("/v1/feedback", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        verdict_id: verdictId,
        reviewer_label: reviewerLabel,
        reviewer_id: reviewerId,
      }),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>("/v1/health", { method: "GET" });
  }
}
