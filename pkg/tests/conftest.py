"""Shared fixtures: rule files, synthetic corpora, tiny exported artifacts."""

from __future__ import annotations

import json
import random

import numpy as np
import pytest

from modpipe.dataset import LabeledSample
from modpipe.fixtures import synthetic_corpus
from modpipe.normalizer import normalize
from modpipe.rules import compile_rules, load_rules
from modpipe.scorer import fit_reference


def write_rules(path, lines):
    path.write_text("\n".join(lines) + "\n", "utf-8")
    return path


@pytest.fixture
def demo_rules_file(tmp_path):
    return write_rules(
        tmp_path / "rules.tsv",
        [
            "r1\thate_term\tterm\thateword",
            "r2\thate_term\tterm\thate",
            "r3\textremist_hashtag\thashtag\t#badtag",
            "r4\tprofanity\tterm\tpiece of junk",
            "r5\tcoded_expression\tregex\t\\b12\\s*/\\s*34\\b",
        ],
    )


@pytest.fixture
def demo_ruleset(demo_rules_file):
    return compile_rules(load_rules(demo_rules_file))


@pytest.fixture(scope="session")
def separable_pairs():
    corpus = synthetic_corpus(600, seed=11, source="fixture")
    return [(normalize(s.text), s.label) for s in corpus]


@pytest.fixture(scope="session")
def reference_scorer(separable_pairs):
    return fit_reference(separable_pairs, seed=5)


class CountingScorer:
    """Wraps a constant score and counts invocations (short-circuit checks)."""

    def __init__(self, value=0.5):
        self.value = value
        self.calls = 0
        self.version = "counting-stub"

    def score(self, text):
        self.calls += 1
        return self.value


class FailingScorer:
    version = "failing-stub"

    def score(self, text):
        raise RuntimeError("model runtime exploded")


def make_labeled(texts_labels, source="test"):
    return [LabeledSample(text=t, label=l, source=source) for t, l in texts_labels]


TOKEN_ALPHABET = "abcdefgh"


def random_text(rng: random.Random, max_words=12, alphabet=TOKEN_ALPHABET):
    words = []
    for _ in range(rng.randint(0, max_words)):
        word = "".join(rng.choices(alphabet, k=rng.randint(1, 5)))
        if rng.random() < 0.15:
            word = "#" + word
        words.append(word)
    sep = rng.choice([" ", " ", " ", ", ", ". ", "! "])
    return sep.join(words)


def random_rule_lines(rng: random.Random, n_rules, alphabet=TOKEN_ALPHABET):
    """Random lexicon lines over a small alphabet, so collisions are common."""
    lines = []
    seen_patterns = set()
    for i in range(n_rules):
        kind = rng.choices(["term", "hashtag", "regex"], weights=[0.75, 0.15, 0.10])[0]
        if kind == "regex":
            word = "".join(rng.choices(alphabet, k=rng.randint(2, 4)))
            pattern = rf"\b{word}[a-h]?\b"
        elif kind == "hashtag":
            pattern = "#" + "".join(rng.choices(alphabet, k=rng.randint(2, 5)))
        else:
            n_words = rng.choices([1, 2], weights=[0.8, 0.2])[0]
            pattern = " ".join(
                "".join(rng.choices(alphabet, k=rng.randint(1, 5))) for _ in range(n_words)
            )
        key = (kind, pattern)
        if key in seen_patterns and rng.random() < 0.5:
            pass  # keep some duplicate patterns under distinct ids on purpose
        seen_patterns.add(key)
        category = rng.choice(["profanity", "hate_term", "extremist_hashtag", "coded_expression"])
        lines.append(f"rule{i:04d}\t{category}\t{kind}\t{pattern}")
    return lines


def make_tiny_artifact(out_dir, seed=0, vocab_words=("alpha", "beta", "gamma", "delta")):
    """Handcrafted exported-model directory with random (but valid) weights."""
    rng = np.random.default_rng(seed)
    hidden, layers, heads, inter, max_pos = 8, 2, 2, 16, 16
    vocab = {"[pad]": 0, "[cls]": 1, "[unk]": 2}
    for w in vocab_words:
        vocab[w] = len(vocab)
    geometry = {
        "vocab_size": len(vocab),
        "hidden_size": hidden,
        "num_layers": layers,
        "num_heads": heads,
        "intermediate_size": inter,
        "max_position": max_pos,
        "num_classes": 2,
        "layer_norm_eps": 1e-12,
    }
    weights = {
        "embeddings.word.weight": rng.normal(0, 0.5, (len(vocab), hidden)),
        "embeddings.position.weight": rng.normal(0, 0.5, (max_pos, hidden)),
        "embeddings.norm.weight": np.ones(hidden),
        "embeddings.norm.bias": np.zeros(hidden),
        "classifier.dense.weight": rng.normal(0, 0.5, (hidden, hidden)),
        "classifier.dense.bias": np.zeros(hidden),
        "classifier.out.weight": rng.normal(0, 0.5, (2, hidden)),
        "classifier.out.bias": np.zeros(2),
    }
    for i in range(layers):
        p = f"layers.{i}"
        for proj in ("query", "key", "value", "output"):
            weights[f"{p}.attention.{proj}.weight"] = rng.normal(0, 0.3, (hidden, hidden))
            weights[f"{p}.attention.{proj}.bias"] = np.zeros(hidden)
        weights[f"{p}.attention.norm.weight"] = np.ones(hidden)
        weights[f"{p}.attention.norm.bias"] = np.zeros(hidden)
        weights[f"{p}.ffn.intermediate.weight"] = rng.normal(0, 0.3, (inter, hidden))
        weights[f"{p}.ffn.intermediate.bias"] = np.zeros(inter)
        weights[f"{p}.ffn.output.weight"] = rng.normal(0, 0.3, (hidden, inter))
        weights[f"{p}.ffn.output.bias"] = np.zeros(hidden)
        weights[f"{p}.ffn.norm.weight"] = np.ones(hidden)
        weights[f"{p}.ffn.norm.bias"] = np.zeros(hidden)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.savez(out_dir / "weights.npz", **weights)
    (out_dir / "tokenizer.json").write_text(
        json.dumps({"type": "word", "vocab": vocab, "pad_id": 0, "cls_id": 1, "unk_id": 2, "max_len": max_pos})
    )
    manifest = {
        "schema_version": 1,
        "format": "merged",
        "scorer_version": f"tinyenc-test{seed}",
        "model_name": "tiny-encoder-classifier",
        "geometry": geometry,
        "max_input_words": 60,
        "train_config_digest": "sha256:test",
        "files": {"weights": "weights.npz", "tokenizer": "tokenizer.json", "self_test": "self_test.json"},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest))
    (out_dir / "self_test.json").write_text(json.dumps({"pairs": []}))
    return out_dir
