"""Verdict orchestration across the three moderation layers.

The rule layer runs first and short-circuits: any lexicon/regex hit blocks
at score 1.00 without invoking the scorer. Otherwise the model score,
clamped to 0.99 so that 1.00 stays reserved for rule hits, is thresholded:
below ``allow_threshold`` the text is allowed, at or above it the text is
blocked and attributed to the AI layer. Layer attribution is therefore
recoverable from the score alone.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import rules as rules_mod
from .normalizer import NormalizedText, normalize
from .scorer import HateScore

logger = logging.getLogger(__name__)

RULE_SCORE = 1.00
AI_SCORE_CAP = 0.99


class Action(enum.Enum):
    ALLOW = "allow"
    BLOCK = "block"


class Layer(enum.Enum):
    NONE = "none"
    RULE_BASED = "rule_based"
    AI_DETECTION = "ai_detection"


class FailPolicy(enum.Enum):
    FAIL_OPEN_ALLOW = "fail_open_allow"
    FAIL_CLOSED_BLOCK = "fail_closed_block"


@dataclass(frozen=True)
class PipelineConfig:
    allow_threshold: float = 0.40
    rule_score: float = RULE_SCORE
    fail_policy: FailPolicy = FailPolicy.FAIL_OPEN_ALLOW

    def __post_init__(self):
        if not 0.0 < self.allow_threshold < 1.0:
            raise ValueError(f"allow_threshold must be in (0, 1), got {self.allow_threshold}")
        if self.rule_score != RULE_SCORE:
            raise ValueError("rule_score is fixed at 1.00")


@dataclass(frozen=True)
class Verdict:
    action: Action
    score: HateScore
    layer: Layer
    rule_hits: tuple[str, ...]
    normalized_text: NormalizedText
    scorer_version: str
    decided_at: datetime
    error: str | None = field(default=None)


def classify_score(config: PipelineConfig, score: HateScore, rule_hit: bool) -> tuple[Action, Layer]:
    """Pure threshold function behind every verdict.

    A rule hit dominates; a score of exactly 1.00 is attributed to the rule
    layer as well, since model scores are capped below it.
    """
    if rule_hit or score >= RULE_SCORE:
        return Action.BLOCK, Layer.RULE_BASED
    if score >= config.allow_threshold:
        return Action.BLOCK, Layer.AI_DETECTION
    return Action.ALLOW, Layer.NONE


def decide(
    config: PipelineConfig,
    ruleset: rules_mod.CompiledRuleSet,
    scorer,
    raw_text: str,
) -> Verdict:
    """Run normalize -> rule match -> (maybe) score -> verdict."""
    text = normalize(raw_text)
    now = datetime.now(timezone.utc)
    result = rules_mod.match(ruleset, text)
    if result.matched:
        hit_ids = tuple(dict.fromkeys(h.rule_id for h in result.hits))
        return Verdict(
            action=Action.BLOCK,
            score=RULE_SCORE,
            layer=Layer.RULE_BASED,
            rule_hits=hit_ids,
            normalized_text=text,
            scorer_version=scorer.version,
            decided_at=now,
        )
    try:
        score = min(float(scorer.score(text)), AI_SCORE_CAP)
    except Exception as exc:  # noqa: BLE001 - mapped through the fail policy
        logger.error("scorer failed, applying %s: %s", config.fail_policy.value, exc)
        if config.fail_policy is FailPolicy.FAIL_CLOSED_BLOCK:
            return Verdict(
                action=Action.BLOCK,
                score=AI_SCORE_CAP,
                layer=Layer.AI_DETECTION,
                rule_hits=(),
                normalized_text=text,
                scorer_version=scorer.version,
                decided_at=now,
                error=str(exc),
            )
        return Verdict(
            action=Action.ALLOW,
            score=0.0,
            layer=Layer.NONE,
            rule_hits=(),
            normalized_text=text,
            scorer_version=scorer.version,
            decided_at=now,
            error=str(exc),
        )
    action, layer = classify_score(config, score, rule_hit=False)
    return Verdict(
        action=action,
        score=score,
        layer=layer,
        rule_hits=(),
        normalized_text=text,
        scorer_version=scorer.version,
        decided_at=now,
    )


@dataclass(frozen=True)
class ModerationPipeline:
    """Config + compiled rules + scorer, bundled for serving and evaluation."""

    config: PipelineConfig
    ruleset: rules_mod.CompiledRuleSet
    scorer: object

    def decide(self, raw_text: str) -> Verdict:
        return decide(self.config, self.ruleset, self.scorer, raw_text)

    @property
    def scorer_version(self) -> str:
        return self.scorer.version

    @property
    def rules_version(self) -> str:
        return self.ruleset.version
