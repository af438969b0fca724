"""Scorer contracts: range, determinism, batch equivalence, artifact loading."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import roc_auc_score

from modpipe.fixtures import synthetic_corpus
from modpipe.normalizer import normalize
from modpipe.scorer import (
    HASH_DIM,
    ModelLoadError,
    ReferenceScorer,
    fit_reference,
    hash_token,
    load_exported_model,
    score_batch,
)

from conftest import make_tiny_artifact


def test_zero_weights_score_half():
    scorer = ReferenceScorer(np.zeros(HASH_DIM), 0.0)
    for text in ["", "one", "several words here", "#tag and more"]:
        assert scorer.score(text) == 0.5


def test_hash_is_stable():
    # frozen values: the feature hash is part of every model version
    assert hash_token("hate") == hash_token("hate")
    assert 0 <= hash_token("anything") < HASH_DIM
    assert hash_token("a") != hash_token("b")


def test_fit_separable_two_word_vocab():
    samples = [("good", 0), ("bad", 1)] * 10
    scorer = fit_reference(samples, seed=0)
    assert all((scorer.score(t) > 0.5) == bool(label) for t, label in samples)


def test_fit_separates_synthetic_means(reference_scorer, separable_pairs):
    pos = [reference_scorer.score(t) for t, l in separable_pairs if l == 1]
    neg = [reference_scorer.score(t) for t, l in separable_pairs if l == 0]
    assert np.mean(pos) > np.mean(neg)
    assert np.mean(pos) > 0.8 and np.mean(neg) < 0.2


def test_fit_deterministic(separable_pairs):
    a = fit_reference(separable_pairs, seed=123)
    b = fit_reference(separable_pairs, seed=123)
    assert a.version == b.version
    for text, _ in separable_pairs[:20]:
        assert a.score(text) == b.score(text)


def test_fit_rejects_single_class():
    with pytest.raises(ValueError, match="each class"):
        fit_reference([("a", 1), ("b", 1)], seed=0)
    with pytest.raises(ValueError, match="samples"):
        fit_reference([], seed=0)


def test_label_inversion_flips_auc(separable_pairs):
    texts = [t for t, _ in separable_pairs]
    labels = [l for _, l in separable_pairs]
    normal = fit_reference(list(zip(texts, labels)), seed=0)
    flipped = fit_reference(list(zip(texts, [1 - l for l in labels])), seed=0)
    auc = roc_auc_score(labels, [normal.score(t) for t in texts])
    auc_flipped = roc_auc_score(labels, [flipped.score(t) for t in texts])
    assert auc_flipped == pytest.approx(1.0 - auc, abs=1e-9)


def test_score_batch_empty(reference_scorer):
    assert score_batch(reference_scorer, []) == []


def test_score_batch_pointwise(reference_scorer):
    texts = [normalize(s.text) for s in synthetic_corpus(1000, seed=77)]
    batch = score_batch(reference_scorer, texts)
    assert batch == [reference_scorer.score(t) for t in texts]


def test_score_batch_reports_errors_positionally():
    class Flaky:
        version = "flaky"

        def score(self, text):
            if text == "boom":
                raise RuntimeError("nope")
            return 0.25

    out = score_batch(Flaky(), ["ok", "boom", "ok"])
    assert out[0] == 0.25 and out[2] == 0.25
    assert isinstance(out[1], RuntimeError)


@given(st.lists(st.sampled_from("abcdefgh #"), max_size=40).map("".join))
@settings(max_examples=150, deadline=None)
def test_score_range_property(reference_scorer, text):
    score = reference_scorer.score(normalize(text))
    assert 0.0 <= score <= 1.0 and np.isfinite(score)


def test_truncation_at_max_input_words(reference_scorer):
    head = " ".join(f"w{i}" for i in range(60))
    long = head + " " + " ".join(["extra"] * 30)
    assert reference_scorer.score(long) == reference_scorer.score(head)


# --- exported-model adapter -------------------------------------------------

def test_load_missing_path(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_exported_model(tmp_path / "nope")


def test_load_missing_manifest(tmp_path):
    (tmp_path / "model").mkdir()
    with pytest.raises(FileNotFoundError, match="manifest"):
        load_exported_model(tmp_path / "model")


def test_load_unsupported_schema_version(tmp_path):
    art = make_tiny_artifact(tmp_path / "model")
    manifest = (art / "manifest.json").read_text()
    (art / "manifest.json").write_text(manifest.replace('"schema_version": 1', '"schema_version": 99'))
    with pytest.raises(ModelLoadError, match="schema_version"):
        load_exported_model(art)


def test_load_corrupt_manifest(tmp_path):
    art = make_tiny_artifact(tmp_path / "model")
    (art / "manifest.json").write_text("{not json")
    with pytest.raises(ModelLoadError, match="JSON"):
        load_exported_model(art)


def test_load_missing_weights_tensor(tmp_path):
    art = make_tiny_artifact(tmp_path / "model")
    with np.load(art / "weights.npz") as npz:
        partial = {k: npz[k] for k in npz.files if k != "classifier.out.weight"}
    np.savez(art / "weights.npz", **partial)
    with pytest.raises(ModelLoadError, match="missing tensor"):
        load_exported_model(art)


def test_adapter_scores_deterministic_in_range(tmp_path):
    scorer = load_exported_model(make_tiny_artifact(tmp_path / "model", seed=3))
    assert scorer.descriptor.kind == "exported_model"
    assert scorer.version == "tinyenc-test3"
    for text in ["alpha beta", "gamma gamma delta", "unknownword", ""]:
        s1 = scorer.score(text)
        s2 = scorer.score(text)
        assert s1 == s2
        assert 0.0 <= s1 <= 1.0
    assert scorer.score("alpha") != scorer.score("beta")


def test_adapter_truncates_overlength(tmp_path):
    scorer = load_exported_model(make_tiny_artifact(tmp_path / "model", seed=4))
    base = "alpha beta gamma"
    padded = base + " " + " ".join(["delta"] * 200)
    truncated_equivalent = " ".join((base + " " + " ".join(["delta"] * 200)).split()[:60])
    assert scorer.score(padded) == scorer.score(truncated_equivalent)
