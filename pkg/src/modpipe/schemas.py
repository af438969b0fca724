"""Pydantic wire models for the HTTP API.

Field names are part of the compatibility contract with clients (the
moderator console generates its types from these shapes).
"""

from __future__ import annotations

from datetime import datetime

from pydantic import BaseModel

MAX_TEXT_CHARS = 10_000


class ModerateRequest(BaseModel):
    text: str


class ModerateResponse(BaseModel):
    action: str
    hate_score: float
    layer: str
    rule_hits: list[str]
    scorer_version: str
    verdict_id: str


class VerdictPayload(BaseModel):
    """Inline verdict for feedback on responses that left the cache."""

    action: str
    hate_score: float
    layer: str
    rule_hits: list[str] = []
    scorer_version: str
    normalized_text: str | None = None
    decided_at: datetime | None = None


class FeedbackRequest(BaseModel):
    reviewer_label: str
    reviewer_id: str
    verdict_id: str | None = None
    verdict: VerdictPayload | None = None
    text: str | None = None


class FeedbackResponse(BaseModel):
    feedback_id: str


class HealthResponse(BaseModel):
    status: str
    rules_version: str
    scorer_version: str


class ReloadRulesRequest(BaseModel):
    rules_path: str | None = None


class ReloadRulesResponse(BaseModel):
    rules_version: str
