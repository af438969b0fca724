// Live round-trip against a real service process: probe, override, export.
//
// Spawns `modpipe serve` on a scratch port with a scratch feedback DB, drives
// the console's own ApiClient/ReviewQueue against it over real HTTP, then
// checks the override lands in `modpipe feedback export --disagreements-only`.
// Skipped unless RUN_SERVICE_INTEGRATION=1 (needs the Python package installed).

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ReviewQueue } from "../src/queue.js";

const enabled = process.env.RUN_SERVICE_INTEGRATION === "1";
const PORT = 8765 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | undefined;
let dbPath = "";

async function waitForHealth(client: ApiClient, attempts = 100): Promise<void> {
  for (let i = 0; i < attempts; i++) {
    try {
      const health = await client.health();
      if (health.status === "ok") return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("service did not become healthy");
}

describe.runIf(enabled)("console against a live service", () => {
  beforeAll(async () => {
    dbPath = join(mkdtempSync(join(tmpdir(), "modpipe-console-")), "feedback.db");
    server = spawn("modpipe", ["serve", "--port", String(PORT), "--feedback-db", dbPath], {
      stdio: "ignore",
    });
    await waitForHealth(new ApiClient(BASE));
  }, 30_000);

  afterAll(() => {
    server?.kill("SIGTERM");
  });

  it("override on a rule-blocked probe shows up in the disagreement export", async () => {
    const api = new ApiClient(BASE);
    const queue = new ReviewQueue();

    const text = "you subhuman vermin get out";
    const verdict = await api.moderate(text);
    expect(verdict.action).toBe("block");
    expect(verdict.layer).toBe("rule_based");
    expect(verdict.hate_score).toBe(1.0);
    expect(verdict.rule_hits.length).toBeGreaterThan(0);

    queue.add(text, verdict);
    const feedbackId = await queue.submit(api, verdict.verdict_id, "override", "console-itest");
    expect(feedbackId).toBeTruthy();

    const benign = await api.moderate("sunshine coffee garden weekend");
    expect(benign.action).toBe("allow");
    queue.add("sunshine coffee garden weekend", benign);
    await queue.submit(api, benign.verdict_id, "confirm", "console-itest");

    const exported = execFileSync(
      "modpipe",
      ["feedback", "export", "--store", dbPath, "--disagreements-only"],
      { encoding: "utf-8" },
    );
    expect(exported).toContain("you subhuman vermin get out,0,feedback");
    expect(exported).not.toContain("sunshine coffee garden weekend");
  }, 30_000);

  it("surfaces service errors without crashing", async () => {
    const api = new ApiClient(BASE);
    await expect(api.moderate("")).rejects.toThrow(/HTTP 400/);
  });
});
