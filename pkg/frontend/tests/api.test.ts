// API client: exact endpoint/body mapping, nothing but the documented surface.

import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

function recordingFetch(status: number, payload: unknown) {
  const calls: RecordedCall[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    return new Response(JSON.stringify(payload), { status });
  };
  return { calls, fetchFn };
}

const DOCUMENTED = ["/v1/moderate", "/v1/feedback", "/v1/health"];

describe("ApiClient", () => {
  it("moderate posts the text to /v1/moderate", async () => {
    const { calls, fetchFn } = recordingFetch(200, {
      action: "block",
      hate_score: 1.0,
      layer: "rule_based",
      rule_hits: ["d001"],
      scorer_version: "reference-x",
      verdict_id: "v1",
    });
    const client = new ApiClient("http://svc", fetchFn);
    const verdict = await client.moderate("some text");
    expect(calls).toEqual([
      { url: "http://svc/v1/moderate", method: "POST", body: { text: "some text" } },
    ]);
    expect(verdict.action).toBe("block");
    expect(verdict.verdict_id).toBe("v1");
  });

  it("submitFeedback posts the documented body to /v1/feedback", async () => {
    const { calls, fetchFn } = recordingFetch(201, { feedback_id: "f9" });
    const client = new ApiClient("http://svc", fetchFn);
    const response = await client.submitFeedback("v1", "non_hate", "mod-3");
    expect(calls).toEqual([
      {
        url: "http://svc/v1/feedback",
        method: "POST",
        body: { verdict_id: "v1", reviewer_label: "non_hate", reviewer_id: "mod-3" },
      },
    ]);
    expect(response.feedback_id).toBe("f9");
  });

  it("health reads /v1/health", async () => {
    const { calls, fetchFn } = recordingFetch(200, {
      status: "ok",
      rules_version: "r",
      scorer_version: "s",
    });
    const client = new ApiClient("http://svc", fetchFn);
    const health = await client.health();
    expect(calls[0]).toMatchObject({ url: "http://svc/v1/health", method: "GET" });
    expect(health.status).toBe("ok");
  });

  it("every call stays on the documented endpoints", async () => {
    const seen: string[] = [];
    const fetchFn = async (url: string): Promise<Response> => {
      seen.push(new URL(url).pathname);
      return new Response(JSON.stringify({ feedback_id: "f" }), { status: 200 });
    };
    const client = new ApiClient("http://svc", fetchFn);
    await client.moderate("x");
    await client.submitFeedback("v", "hate", "r");
    await client.health();
    for (const path of seen) {
      expect(DOCUMENTED).toContain(path);
    }
  });

  it("surfaces 4xx/5xx as ApiError with the server detail", async () => {
    const { fetchFn } = recordingFetch(400, { detail: "text must not be empty" });
    const client = new ApiClient("http://svc", fetchFn);
    await expect(client.moderate("")).rejects.toThrowError(ApiError);
    await expect(client.moderate("")).rejects.toThrow(/text must not be empty/);
  });
});
