"""Synthetic corpus generation and the bundled default scorer.

The generated corpus is linearly separable by construction (class-specific
vocabulary plus shared filler), which makes it useful both as the default
fit for the service when no exported model is configured and as the basis
for end-to-end tests with known-good behaviour.
"""

from __future__ import annotations

import random
from functools import lru_cache

from .dataset import LabeledSample
from .normalizer import normalize
from .scorer import ReferenceScorer, fit_reference

HATE_TERMS = (
    "despise", "loathe", "vermin", "filth", "scum", "degenerates",
    "parasites", "worthless", "disgusting", "trash",
)
BENIGN_TERMS = (
    "sunshine", "coffee", "garden", "weekend", "recipe", "bicycle",
    "concert", "library", "painting", "harbor",
)
FILLER = (
    "the", "a", "see", "this", "today", "people", "really", "just",
    "very", "so", "and", "to", "on", "with",
)

BUILTIN_SEED = 20240601
BUILTIN_SIZE = 400


def synthetic_corpus(
    n: int,
    seed: int,
    hate_fraction: float = 0.33,
    source: str = "synthetic",
) -> list[LabeledSample]:
    """``n`` labeled samples, ``hate_fraction`` of them hate, separable."""
    rng = random.Random(seed)
    n_hate = round(n * hate_fraction)
    samples = []
    for i in range(n):
        label = 1 if i < n_hate else 0
        marked = HATE_TERMS if label else BENIGN_TERMS
        words = rng.sample(marked, rng.randint(1, 3))
        words += rng.choices(FILLER, k=rng.randint(3, 9))
        rng.shuffle(words)
        samples.append(LabeledSample(text=" ".join(words), label=label, source=source))
    rng.shuffle(samples)
    return samples


@lru_cache(maxsize=1)
def builtin_reference_scorer() -> ReferenceScorer:
    """The scorer the service falls back to when no model is configured.

    Fit is deterministic, so restarts produce identical verdicts.
    """
    corpus = synthetic_corpus(BUILTIN_SIZE, seed=BUILTIN_SEED, source="builtin")
    pairs = [(normalize(s.text), s.label) for s in corpus]
    return fit_reference(pairs, seed=BUILTIN_SEED)
