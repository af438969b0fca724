"""Layer 3: durable human feedback on verdicts, exportable for retraining.

Records are append-only rows in a single-file SQLite store. Collection and
export are the whole scope here: nothing in this module retrains anything,
it only accumulates reviewer labels and hands them out as training pairs.
Export deduplicates on the normalized text, keeping the newest label.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .dataset import LabeledSample
from .decision import Action, Layer, Verdict
from .normalizer import normalize

REVIEWER_LABELS = ("hate", "non_hate")

_SCHEMA = """
CREATE TABLE IF NOT EXISTS feedback (
    rowid INTEGER PRIMARY KEY AUTOINCREMENT,
    id TEXT NOT NULL UNIQUE,
    text TEXT NOT NULL,
    reviewer_label TEXT NOT NULL,
    agrees_with_model INTEGER NOT NULL,
    reviewer_id TEXT NOT NULL,
    submitted_at TEXT NOT NULL,
    verdict_json TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS feedback_submitted ON feedback (submitted_at);
"""


class FeedbackError(Exception):
    """Persistence failure or invalid feedback payload."""


@dataclass(frozen=True)
class FeedbackRecord:
    id: str
    text: str
    verdict: Verdict
    reviewer_label: str
    agrees_with_model: bool
    reviewer_id: str
    submitted_at: datetime


def _verdict_to_json(v: Verdict) -> str:
    return json.dumps(
        {
            "action": v.action.value,
            "score": v.score,
            "layer": v.layer.value,
            "rule_hits": list(v.rule_hits),
            "normalized_text": v.normalized_text,
            "scorer_version": v.scorer_version,
            "decided_at": v.decided_at.isoformat(),
            "error": v.error,
        }
    )


def _verdict_from_json(payload: str) -> Verdict:
    data = json.loads(payload)
    return Verdict(
        action=Action(data["action"]),
        score=data["score"],
        layer=Layer(data["layer"]),
        rule_hits=tuple(data["rule_hits"]),
        normalized_text=data["normalized_text"],
        scorer_version=data["scorer_version"],
        decided_at=datetime.fromisoformat(data["decided_at"]),
        error=data.get("error"),
    )


class FeedbackStore:
    """Single-writer multi-reader store over one SQLite file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._write_lock = threading.Lock()
        with self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "FeedbackStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _row_to_record(self, row) -> FeedbackRecord:
        return FeedbackRecord(
            id=row[0],
            text=row[1],
            verdict=_verdict_from_json(row[6]),
            reviewer_label=row[2],
            agrees_with_model=bool(row[3]),
            reviewer_id=row[4],
            submitted_at=datetime.fromisoformat(row[5]),
        )

    _SELECT = "SELECT id, text, reviewer_label, agrees_with_model, reviewer_id, submitted_at, verdict_json FROM feedback"


def submit_feedback(
    store: FeedbackStore,
    text: str,
    verdict: Verdict,
    reviewer_label: str,
    reviewer_id: str,
) -> FeedbackRecord:
    """Persist one reviewer verdict; returns the stored record with its id."""
    if reviewer_label not in REVIEWER_LABELS:
        raise FeedbackError(f"reviewer_label must be one of {REVIEWER_LABELS}, got {reviewer_label!r}")
    agrees = (reviewer_label == "hate") == (verdict.action is Action.BLOCK)
    now = datetime.now(timezone.utc)
    submitted_at = max(now, verdict.decided_at)  # reviews cannot precede the verdict
    record = FeedbackRecord(
        id=uuid.uuid4().hex,
        text=text,
        verdict=verdict,
        reviewer_label=reviewer_label,
        agrees_with_model=agrees,
        reviewer_id=reviewer_id,
        submitted_at=submitted_at,
    )
    try:
        with store._write_lock, store._conn:
            store._conn.execute(
                "INSERT INTO feedback (id, text, reviewer_label, agrees_with_model, reviewer_id, submitted_at, verdict_json)"
                " VALUES (?, ?, ?, ?, ?, ?, ?)",
                (
                    record.id,
                    record.text,
                    record.reviewer_label,
                    int(record.agrees_with_model),
                    record.reviewer_id,
                    record.submitted_at.isoformat(),
                    _verdict_to_json(verdict),
                ),
            )
    except sqlite3.Error as exc:
        raise FeedbackError(f"failed to persist feedback: {exc}") from exc
    return record


def query_feedback(
    store: FeedbackStore,
    since: datetime | None = None,
    layer: Layer | None = None,
    agreement: bool | None = None,
    limit: int = 100,
) -> list[FeedbackRecord]:
    """Records matching every supplied filter, newest first, at most limit."""
    clauses = []
    params: list = []
    if since is not None:
        clauses.append("submitted_at >= ?")
        params.append(since.isoformat())
    if agreement is not None:
        clauses.append("agrees_with_model = ?")
        params.append(int(agreement))
    sql = FeedbackStore._SELECT
    if clauses:
        sql += " WHERE " + " AND ".join(clauses)
    sql += " ORDER BY submitted_at DESC, rowid DESC"
    rows = store._conn.execute(sql, params).fetchall()
    records = (store._row_to_record(r) for r in rows)
    if layer is not None:
        records = (r for r in records if r.verdict.layer is layer)
    out = []
    for record in records:
        out.append(record)
        if len(out) >= limit:
            break
    return out


def export_training_batch(
    store: FeedbackStore,
    since: datetime | None = None,
    layer: Layer | None = None,
    agreement: bool | None = None,
) -> list[LabeledSample]:
    """Reviewer-labeled (text, label) pairs in the corpus CSV schema.

    Deduplicated on normalized text; when reviewers disagreed over time the
    newest label wins.
    """
    records = query_feedback(store, since=since, layer=layer, agreement=agreement, limit=2**31 - 1)
    seen: set[str] = set()
    batch = []
    for record in records:  # newest first, so first occurrence is the newest label
        key = normalize(record.text)
        if key in seen:
            continue
        seen.add(key)
        batch.append(
            LabeledSample(
                text=record.text,
                label=1 if record.reviewer_label == "hate" else 0,
                source="feedback",
            )
        )
    return batch
