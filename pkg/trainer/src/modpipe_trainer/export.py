"""Export trained checkpoints into the serving artifact directory.

Layout: ``manifest.json`` (schema, version string, geometry, adapter and
train-config provenance), ``tokenizer.json``, ``weights.npz`` (merged or
adapter form), and ``self_test.json`` with 32 (text, score) pairs computed
at export time. After writing, the artifact is reloaded through the serving
adapter and the self-test scores are compared at 1e-4; a mismatch fails the
export rather than shipping a broken artifact.
"""

from __future__ import annotations

import hashlib
import json
import random
from pathlib import Path

import numpy as np
import torch

from modpipe.scorer import load_exported_model

from .lora import LoraConfig, adapter_state_arrays, merged_state_arrays
from .model import TinyEncoderClassifier
from .tokenizer import WordTokenizer
from .training import TrainConfig

SCHEMA_VERSION = 1
SELF_TEST_PAIRS = 32
ROUND_TRIP_TOLERANCE = 1e-4


class ExportError(Exception):
    """Artifact failed to write or to pass its re-load self-check."""


def _weights_digest(arrays: dict[str, np.ndarray]) -> str:
    h = hashlib.sha256()
    for name in sorted(arrays):
        h.update(name.encode("utf-8"))
        h.update(np.ascontiguousarray(arrays[name]).tobytes())
    return h.hexdigest()


def default_self_test_texts(tokenizer: WordTokenizer, n: int = SELF_TEST_PAIRS) -> list[str]:
    """Deterministic probe texts over the tokenizer's own vocabulary."""
    words = [w for w in tokenizer.vocab if not w.startswith("[")] or ["placeholder"]
    rng = random.Random(0xC0FFEE)
    texts = []
    for _ in range(n):
        texts.append(" ".join(rng.choices(words, k=rng.randint(1, 12))))
    return texts


def export(
    model: TinyEncoderClassifier,
    tokenizer: WordTokenizer,
    out_dir: str | Path,
    lora_cfg: LoraConfig,
    train_cfg: TrainConfig,
    form: str = "merged",
    self_test_texts: list[str] | None = None,
    max_input_words: int = 60,
) -> Path:
    """Write the artifact directory; returns its path."""
    if form not in ("merged", "adapter"):
        raise ValueError(f"form must be 'merged' or 'adapter', got {form!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    model.eval()
    if form == "merged":
        tensors = merged_state_arrays(model)
    else:
        tensors = adapter_state_arrays(model)
    arrays = {name: t.detach().cpu().numpy().astype(np.float32) for name, t in tensors.items()}

    texts = self_test_texts if self_test_texts is not None else default_self_test_texts(tokenizer)
    with torch.no_grad():
        pairs = [
            {"text": text, "score": model.hate_probability(torch.tensor(tokenizer.encode(text, max_input_words)))}
            for text in texts
        ]

    digest = _weights_digest(arrays)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "format": form,
        "scorer_version": f"tinyenc-{digest[:10]}",
        "model_name": "tiny-encoder-classifier",
        "geometry": model.geometry.to_dict(),
        "max_input_words": max_input_words,
        "adapter": lora_cfg.to_dict(),
        "train_config_digest": "sha256:"
        + hashlib.sha256(json.dumps(train_cfg.digest_payload(), sort_keys=True).encode()).hexdigest(),
        "files": {
            "weights": "weights.npz",
            "tokenizer": "tokenizer.json",
            "self_test": "self_test.json",
        },
    }
    try:
        np.savez(out / "weights.npz", **arrays)
        (out / "tokenizer.json").write_text(tokenizer.to_json(), "utf-8")
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2), "utf-8")
        (out / "self_test.json").write_text(json.dumps({"pairs": pairs}, indent=2), "utf-8")
    except OSError as exc:
        raise ExportError(f"failed to write artifact: {exc}") from exc

    _self_check(out, pairs)
    return out


def _self_check(artifact_dir: Path, pairs: list[dict]) -> None:
    """Reload through the serving adapter and compare recorded scores."""
    scorer = load_exported_model(artifact_dir)
    worst = 0.0
    for pair in pairs:
        served = scorer.score(pair["text"])
        worst = max(worst, abs(served - pair["score"]))
    if worst > ROUND_TRIP_TOLERANCE:
        raise ExportError(
            f"re-load self-check failed: max |served - recorded| = {worst:.3e} "
            f"exceeds {ROUND_TRIP_TOLERANCE}"
        )


def load_self_test(artifact_dir: str | Path) -> list[dict]:
    return json.loads((Path(artifact_dir) / "self_test.json").read_text("utf-8"))["pairs"]
