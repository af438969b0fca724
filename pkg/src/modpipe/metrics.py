"""Binary-classification metrics and the pipeline evaluation harness.

Hate is the positive class everywhere. Degenerate cases are pinned: an
undefined precision/recall/F1 component counts as 0, and MCC is 0 whenever
any denominator factor is 0. Counts are Python ints, so corpus-scale values
(1e9 and beyond) cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .dataset import LabeledSample
from .decision import Action, ModerationPipeline

POSITIVE_CLASS = "hate"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    macro_f1: float
    mcc: float
    threshold: float
    scorer_version: str
    n: int
    scoring_failures: int = 0

    def to_text(self) -> str:
        """Flat ``key=value`` document with a stable key order."""
        cm = self.confusion
        lines = [
            f"n={self.n}",
            f"threshold={self.threshold!r}",
            f"scorer_version={self.scorer_version}",
            f"positive_class={POSITIVE_CLASS}",
            f"tp={cm.tp}",
            f"fp={cm.fp}",
            f"tn={cm.tn}",
            f"fn={cm.fn}",
            f"accuracy={self.accuracy!r}",
            f"macro_f1={self.macro_f1!r}",
            f"mcc={self.mcc!r}",
            f"scoring_failures={self.scoring_failures}",
        ]
        return "\n".join(lines) + "\n"


def confusion_from(predictions: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    """Count tp/fp/tn/fn with hate (1) as the positive class."""
    if len(predictions) != len(labels):
        raise ValueError(f"length mismatch: {len(predictions)} predictions vs {len(labels)} labels")
    if not predictions:
        raise ValueError("empty input")
    tp = fp = tn = fn = 0
    for pred, label in zip(predictions, labels):
        if pred not in (0, 1) or label not in (0, 1):
            raise ValueError(f"predictions and labels must be 0/1, got ({pred}, {label})")
        if pred == 1 and label == 1:
            tp += 1
        elif pred == 1 and label == 0:
            fp += 1
        elif pred == 0 and label == 0:
            tn += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    return (cm.tp + cm.tn) / cm.total


def _f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def macro_f1(cm: ConfusionMatrix) -> float:
    """Unweighted mean of the positive-class and negative-class F1."""
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    f1_pos = _f1(cm.tp, cm.fp, cm.fn)
    f1_neg = _f1(cm.tn, cm.fn, cm.fp)  # negative class: tn plays tp, fn plays fp
    return (f1_pos + f1_neg) / 2.0


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation coefficient; 0 when any denominator factor is 0."""
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    tp, fp, tn, fn = cm.tp, cm.fp, cm.tn, cm.fn
    denom_sq = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)  # exact int product
    if denom_sq == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom_sq)


def evaluate(pipeline: ModerationPipeline, samples: Sequence[LabeledSample]) -> EvalReport:
    """Run the full pipeline over a labeled set and report all metrics.

    Block maps to prediction 1, allow to 0. Scorer failures are absorbed by
    the pipeline's fail policy; the report carries how many occurred.
    """
    if not samples:
        raise ValueError("no samples to evaluate")
    predictions = []
    labels = []
    failures = 0
    for sample in samples:
        verdict = pipeline.decide(sample.text)
        if verdict.error is not None:
            failures += 1
        predictions.append(1 if verdict.action is Action.BLOCK else 0)
        labels.append(sample.label)
    cm = confusion_from(predictions, labels)
    return EvalReport(
        confusion=cm,
        accuracy=accuracy(cm),
        macro_f1=macro_f1(cm),
        mcc=mcc(cm),
        threshold=pipeline.config.allow_threshold,
        scorer_version=pipeline.scorer_version,
        n=len(samples),
        scoring_failures=failures,
    )
