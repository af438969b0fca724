"""modpipe: three-layer text moderation pipeline.

Layer 1 blocks explicit content via compiled lexicon/regex rules, layer 2
scores the remainder with a pluggable hate-score model, layer 3 collects
human feedback for later retraining. See the service and CLI entry points
for the operational surface.
"""

from .decision import (
    Action,
    FailPolicy,
    Layer,
    ModerationPipeline,
    PipelineConfig,
    Verdict,
    classify_score,
    decide,
)
from .normalizer import normalize, passes_length_filter, word_count
from .rules import CompiledRuleSet, MatchResult, RuleEntry, compile_rules, load_rules, match
from .scorer import fit_reference, load_exported_model, score_batch

__all__ = [
    "Action",
    "CompiledRuleSet",
    "FailPolicy",
    "Layer",
    "MatchResult",
    "ModerationPipeline",
    "PipelineConfig",
    "RuleEntry",
    "Verdict",
    "classify_score",
    "compile_rules",
    "decide",
    "fit_reference",
    "load_exported_model",
    "load_rules",
    "match",
    "normalize",
    "passes_length_filter",
    "score_batch",
    "word_count",
]

__version__ = "0.1.0"
