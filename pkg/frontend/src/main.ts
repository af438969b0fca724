/** Console entry point: probe form, review queue, health indicator. */

import { ApiClient, ApiError } from "./api.js";
import { ReviewQueue } from "./queue.js";
import { errorBanner, queueRow, verdictCard } from "./render.js";

function apiBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return (fromQuery ?? window.location.origin).replace(/\/+$/, "");
}

const api = new ApiClient(apiBaseUrl());
const queue = new ReviewQueue(window.localStorage);
const reviewerId = window.localStorage.getItem("modpipe-reviewer") ?? "console";

const probeForm = document.getElementById("probe-form") as HTMLFormElement;
const probeInput = document.getElementById("probe-input") as HTMLTextAreaElement;
const probeResult = document.getElementById("probe-result") as HTMLElement;
const queueList = document.getElementById("queue-list") as HTMLUListElement;
const queueEmpty = document.getElementById("queue-empty") as HTMLElement;
const healthBox = document.getElementById("health") as HTMLElement;
const errors = document.getElementById("errors") as HTMLElement;

function showError(message: string): void {
  errors.replaceChildren(errorBanner(message));
  window.setTimeout(() => errors.replaceChildren(), 6000);
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return "service unreachable";
}

function renderQueue(): void {
  const items = queue.list();
  queueEmpty.style.display = items.length === 0 ? "block" : "none";
  queueList.replaceChildren(
    ...items.map((item) =>
      queueRow(item, (decision) => {
        void queue
          .submit(api, item.verdict.verdict_id, decision, reviewerId)
          .then((feedbackId) => {
            if (feedbackId === null) showError("already submitted");
            renderQueue();
          })
          .catch((err) => showError(describeError(err)));
      }),
    ),
  );
}

probeForm.addEventListener("submit", (event) => {
  event.preventDefault();
  const text = probeInput.value;
  if (!text.trim()) return;
  api
    .moderate(text)
    .then((verdict) => {
      probeResult.replaceChildren(verdictCard(text, verdict));
      queue.add(text, verdict);
      renderQueue();
    })
    .catch((err) => showError(describeError(err)));
});

function refreshHealth(): void {
  api
    .health()
    .then((health) => {
      healthBox.textContent = `service ok - rules ${health.rules_version} - scorer ${health.scorer_version}`;
      healthBox.className = "health ok";
    })
    .catch(() => {
      healthBox.textContent = "service unreachable";
      healthBox.className = "health down";
    });
}

renderQueue();
refreshHealth();
window.setInterval(refreshHealth, 10_000);
