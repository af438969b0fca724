"""Feedback store: durability, derived fields, export dedup/recency."""

import time
from datetime import datetime, timedelta, timezone

import pytest

from modpipe.decision import Action, Layer, Verdict
from modpipe.feedback import (
    FeedbackError,
    FeedbackStore,
    export_training_batch,
    query_feedback,
    submit_feedback,
)


def make_verdict(action=Action.BLOCK, layer=Layer.AI_DETECTION, score=0.8, rule_hits=()):
    return Verdict(
        action=action,
        score=score,
        layer=layer,
        rule_hits=tuple(rule_hits),
        normalized_text="normalized text",
        scorer_version="reference-test",
        decided_at=datetime.now(timezone.utc),
    )


BLOCKED = make_verdict()
ALLOWED = make_verdict(action=Action.ALLOW, layer=Layer.NONE, score=0.1)


@pytest.fixture
def store(tmp_path):
    with FeedbackStore(tmp_path / "fb.db") as s:
        yield s


def test_agreement_derivation(store):
    rec1 = submit_feedback(store, "some text", BLOCKED, "non_hate", "rev1")
    assert rec1.agrees_with_model is False
    rec2 = submit_feedback(store, "other text", ALLOWED, "non_hate", "rev1")
    assert rec2.agrees_with_model is True
    rec3 = submit_feedback(store, "third text", BLOCKED, "hate", "rev2")
    assert rec3.agrees_with_model is True


def test_invalid_label_rejected(store):
    with pytest.raises(FeedbackError, match="reviewer_label"):
        submit_feedback(store, "text", BLOCKED, "maybe", "rev1")


def test_two_submissions_distinct_and_retrievable(store):
    a = submit_feedback(store, "first", BLOCKED, "hate", "rev1")
    b = submit_feedback(store, "second", BLOCKED, "hate", "rev1")
    assert a.id != b.id
    records = query_feedback(store)
    assert {r.id for r in records} == {a.id, b.id}


def test_submitted_at_not_before_decided_at(store):
    future = make_verdict()
    object.__setattr__(future, "decided_at", datetime.now(timezone.utc) + timedelta(seconds=30))
    record = submit_feedback(store, "text", future, "hate", "rev1")
    assert record.submitted_at >= record.verdict.decided_at


def test_round_trip_field_identical(store):
    verdict = make_verdict(rule_hits=("d001", "d002"), layer=Layer.RULE_BASED, score=1.0)
    submitted = submit_feedback(store, "the raw text", verdict, "non_hate", "rev9")
    fetched = query_feedback(store, limit=1)[0]
    assert fetched == submitted


def test_query_newest_first_and_limit(store):
    ids = []
    for i in range(4):
        ids.append(submit_feedback(store, f"text {i}", BLOCKED, "non_hate", "rev").id)
        time.sleep(0.002)
    records = query_feedback(store)
    assert [r.id for r in records] == list(reversed(ids))
    assert [r.id for r in query_feedback(store, limit=1)] == [ids[-1]]


def test_query_filters(store):
    submit_feedback(store, "agree", ALLOWED, "non_hate", "rev")
    for i in range(3):
        submit_feedback(store, f"disagree {i}", BLOCKED, "non_hate", "rev")
    rule_verdict = make_verdict(layer=Layer.RULE_BASED, score=1.0, rule_hits=("d001",))
    submit_feedback(store, "rule one", rule_verdict, "hate", "rev")

    disagreements = query_feedback(store, agreement=False)
    assert len(disagreements) == 3
    assert all(not r.agrees_with_model for r in disagreements)
    assert [r.text for r in disagreements] == ["disagree 2", "disagree 1", "disagree 0"]

    rule_only = query_feedback(store, layer=Layer.RULE_BASED)
    assert [r.text for r in rule_only] == ["rule one"]

    cutoff = disagreements[0].submitted_at
    assert all(r.submitted_at >= cutoff for r in query_feedback(store, since=cutoff))


def test_query_empty_store(store):
    assert query_feedback(store) == []


def test_durability_across_reopen(tmp_path):
    path = tmp_path / "fb.db"
    with FeedbackStore(path) as store:
        record = submit_feedback(store, "persisted", BLOCKED, "hate", "rev")
    with FeedbackStore(path) as store:
        fetched = query_feedback(store)
        assert len(fetched) == 1
        assert fetched[0] == record


def test_append_only(store):
    first = submit_feedback(store, "original", BLOCKED, "hate", "rev")
    for i in range(5):
        submit_feedback(store, f"more {i}", ALLOWED, "non_hate", "rev")
    again = [r for r in query_feedback(store) if r.id == first.id]
    assert again == [first]


def test_export_dedups_keeping_newest_label(store):
    submit_feedback(store, "Shared TEXT here", BLOCKED, "hate", "rev")
    time.sleep(0.002)
    submit_feedback(store, "unrelated one", BLOCKED, "non_hate", "rev")
    time.sleep(0.002)
    # same normalized text as the first record, opposite label, newer
    submit_feedback(store, "shared text HERE", BLOCKED, "non_hate", "rev")
    time.sleep(0.002)
    submit_feedback(store, "another", ALLOWED, "hate", "rev")
    submit_feedback(store, "last", ALLOWED, "non_hate", "rev")

    batch = export_training_batch(store)
    assert len(batch) == 4
    by_norm = {s.text.lower(): s for s in batch}
    assert by_norm["shared text here"].label == 0  # newest reviewer label won
    assert all(s.source == "feedback" for s in batch)


def test_export_empty_store(store):
    assert export_training_batch(store) == []


def test_export_agreement_filter(store):
    submit_feedback(store, "all agree", BLOCKED, "hate", "rev")
    assert export_training_batch(store, agreement=False) == []
    batch = export_training_batch(store, agreement=True)
    assert [s.label for s in batch] == [1]
