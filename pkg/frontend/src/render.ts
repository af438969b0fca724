/** DOM builders. Every displayed value is taken verbatim from API payloads. */

import type { ModerateResponse, ReviewItem } from "./types.js";

const LAYER_LABELS: Record<string, string> = {
  none: "below threshold",
  rule_based: "blocked by rules",
  ai_detection: "AI detection",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function verdictCard(text: string, verdict: ModerateResponse): HTMLElement {
  const card = el("div", `verdict-card ${verdict.action}`);
  const headline = el(
    "div",
    "verdict-headline",
    `${verdict.action.toUpperCase()} - ${LAYER_LABELS[verdict.layer] ?? verdict.layer}, score ${verdict.hate_score.toFixed(2)}`,
  );
  card.appendChild(headline);
  card.appendChild(el("div", "verdict-text", text));
  if (verdict.rule_hits.length > 0) {
    const hits = el("div", "rule-hits");
    hits.appendChild(el("span", "rule-hits-label", "matched rules:"));
    for (const ruleId of verdict.rule_hits) {
      hits.appendChild(el("span", "rule-chip", ruleId));
    }
    card.appendChild(hits);
  }
  card.appendChild(el("div", "verdict-meta", `scorer ${verdict.scorer_version}`));
  return card;
}

export function queueRow(
  item: ReviewItem,
  onDecision: (decision: "confirm" | "override") => void,
): HTMLElement {
  const row = el("li", `queue-row ${item.status}`);
  row.appendChild(el("span", `badge ${item.verdict.action}`, item.verdict.action));
  row.appendChild(el("span", "queue-text", item.text));
  row.appendChild(el("span", "queue-score", item.verdict.hate_score.toFixed(2)));
  if (item.status === "submitted") {
    row.appendChild(el("span", "submitted-note", `submitted (${item.feedbackId ?? ""})`));
  } else {
    for (const decision of ["confirm", "override"] as const) {
      const button = el("button", `decision ${decision}`, decision);
      button.addEventListener("click", () => onDecision(decision));
      row.appendChild(button);
    }
  }
  return row;
}

export function errorBanner(message: string): HTMLElement {
  return el("div", "error-banner", message);
}
