"""Layer 2: pluggable hate scorers emitting a probability in [0, 1].

Two implementations share one interface:

* :class:`ReferenceScorer` -- hashed bag-of-words logistic regression,
  trained in-process with :func:`fit_reference`. Exists so the whole
  pipeline (and its test suite) runs without any ML runtime.
* :class:`ExportedModelScorer` -- loads a transformer classifier exported by
  the trainer (manifest + tokenizer + ``.npz`` weights) and runs the forward
  pass in NumPy: tokenize, encode, two-class softmax, probability of hate.

Scorers are immutable after construction; concurrent ``score`` calls are
safe. Scores are deterministic for a fixed model version.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.special import erf

from .normalizer import DEFAULT_MAX_WORDS, NormalizedText

HateScore = float

HASH_DIM = 32768  # fixed feature-hash dimension for the reference scorer
SUPPORTED_MANIFEST_VERSIONS = (1,)

# Fixed reference-scorer training hyperparameters: full-batch gradient
# descent on the logistic loss with L2 regularization. Changing any of
# these changes every reference scorer version.
_FIT_EPOCHS = 400
_FIT_LR = 0.5
_FIT_L2 = 1e-4


class ScoringError(Exception):
    """A scorer failed to produce a score at runtime."""


class ModelLoadError(Exception):
    """Exported-model directory is missing, corrupt, or unsupported."""


@dataclass(frozen=True)
class ScorerDescriptor:
    name: str
    kind: str  # "reference" | "exported_model"
    model_version: str
    max_input_words: int = DEFAULT_MAX_WORDS


def hash_token(token: str, dim: int = HASH_DIM) -> int:
    """Stable token -> bucket mapping (blake2s, platform independent)."""
    digest = hashlib.blake2s(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def _features(text: NormalizedText, max_words: int) -> dict[int, float]:
    counts: dict[int, float] = {}
    for token in text.split()[:max_words]:
        bucket = hash_token(token)
        counts[bucket] = counts.get(bucket, 0.0) + 1.0
    return counts


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


class ReferenceScorer:
    """Deterministic logistic scorer over hashed bag-of-words features."""

    def __init__(self, weights: np.ndarray, bias: float, max_input_words: int = DEFAULT_MAX_WORDS):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (HASH_DIM,):
            raise ValueError(f"weights must have shape ({HASH_DIM},), got {weights.shape}")
        self._w = weights.copy()
        self._w.setflags(write=False)
        self._b = float(bias)
        digest = hashlib.sha256(self._w.tobytes() + np.float64(self._b).tobytes()).hexdigest()[:12]
        self.descriptor = ScorerDescriptor(
            name="hashed-bow-logistic",
            kind="reference",
            model_version=f"reference-{digest}",
            max_input_words=max_input_words,
        )

    @property
    def version(self) -> str:
        return self.descriptor.model_version

    def score(self, text: NormalizedText) -> HateScore:
        z = self._b
        for bucket, count in _features(text, self.descriptor.max_input_words).items():
            z += self._w[bucket] * count
        return _sigmoid(z)

    def score_batch(self, texts: list[NormalizedText]) -> list[HateScore]:
        return score_batch(self, texts)


def score_batch(scorer, texts: list[NormalizedText]) -> list:
    """Score each text; element i equals ``scorer.score(texts[i])``.

    A per-item failure does not abort the batch: the raised exception object
    is placed at that position (same convention as ``asyncio.gather`` with
    ``return_exceptions=True``).
    """
    results = []
    for text in texts:
        try:
            results.append(scorer.score(text))
        except Exception as exc:  # noqa: BLE001 - positional error reporting
            results.append(exc)
    return results


def fit_reference(
    samples: list[tuple[NormalizedText, int]],
    seed: int,
    max_input_words: int = DEFAULT_MAX_WORDS,
) -> ReferenceScorer:
    """Train the reference scorer on (normalized text, 0/1 label) pairs.

    Full-batch gradient descent from zero weights with fixed hyperparameters,
    so the result is identical for identical input on any platform
    (cross-platform score tolerance 1e-6). ``seed`` is recorded for
    provenance; the procedure itself has no random component.
    """
    if not samples:
        raise ValueError("no training samples")
    labels = np.array([int(label) for _, label in samples], dtype=np.float64)
    if set(labels.tolist()) != {0.0, 1.0}:
        raise ValueError("need at least one sample of each class (labels 0 and 1)")

    rows, cols, vals = [], [], []
    for i, (text, _) in enumerate(samples):
        for bucket, count in _features(text, max_input_words).items():
            rows.append(i)
            cols.append(bucket)
            vals.append(count)
    x = sparse.csr_matrix((vals, (rows, cols)), shape=(len(samples), HASH_DIM), dtype=np.float64)

    n = len(samples)
    w = np.zeros(HASH_DIM, dtype=np.float64)
    b = 0.0
    for _ in range(_FIT_EPOCHS):
        z = x @ w + b
        p = 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))
        err = p - labels
        grad_w = (x.T @ err) / n + _FIT_L2 * w
        grad_b = float(err.mean())
        w -= _FIT_LR * grad_w
        b -= _FIT_LR * grad_b
    del seed  # deterministic regardless; kept in the signature for provenance
    return ReferenceScorer(w, b, max_input_words=max_input_words)


# --- exported-model adapter ---------------------------------------------


def _layer_norm(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps) * gamma + beta


def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def _softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class _Geometry:
    vocab_size: int
    hidden_size: int
    num_layers: int
    num_heads: int
    intermediate_size: int
    max_position: int
    num_classes: int
    layer_norm_eps: float


class ExportedModelScorer:
    """Runs an exported transformer classifier end to end in NumPy."""

    def __init__(self, manifest: dict, weights: dict[str, np.ndarray], tokenizer: dict):
        self._geometry = _Geometry(**manifest["geometry"])
        self._weights = {k: np.asarray(v, dtype=np.float64) for k, v in weights.items()}
        self._vocab: dict[str, int] = tokenizer["vocab"]
        self._cls_id = int(tokenizer["cls_id"])
        self._unk_id = int(tokenizer["unk_id"])
        self._max_len = int(tokenizer["max_len"])
        self.descriptor = ScorerDescriptor(
            name=manifest.get("model_name", "exported-model"),
            kind="exported_model",
            model_version=manifest["scorer_version"],
            max_input_words=int(manifest.get("max_input_words", DEFAULT_MAX_WORDS)),
        )
        if manifest.get("format") == "adapter":
            self._merge_adapters(manifest["adapter"])
        self._check_geometry()

    @property
    def version(self) -> str:
        return self.descriptor.model_version

    def _merge_adapters(self, adapter_cfg: dict):
        scale = float(adapter_cfg["alpha"]) / int(adapter_cfg["rank"])
        merged = dict(self._weights)
        for name in list(self._weights):
            if not name.endswith(".lora_a"):
                continue
            base = name[: -len(".lora_a")]
            a = self._weights[name]
            b = self._weights[base + ".lora_b"]
            merged[base + ".weight"] = self._weights[base + ".weight"] + scale * (b @ a)
            del merged[name], merged[base + ".lora_b"]
        self._weights = merged

    def _check_geometry(self):
        g = self._geometry
        try:
            word = self._weights["embeddings.word.weight"]
            self._weights["classifier.out.weight"]
            for i in range(g.num_layers):
                self._weights[f"layers.{i}.attention.query.weight"]
        except KeyError as exc:
            raise ModelLoadError(f"weights file is missing tensor {exc}") from exc
        if word.shape != (g.vocab_size, g.hidden_size):
            raise ModelLoadError(
                f"word embedding shape {word.shape} does not match manifest geometry "
                f"({g.vocab_size}, {g.hidden_size})"
            )

    def _encode(self, text: NormalizedText) -> list[int]:
        tokens = text.split()[: self.descriptor.max_input_words]
        ids = [self._cls_id] + [self._vocab.get(t, self._unk_id) for t in tokens]
        return ids[: self._max_len]

    def score(self, text: NormalizedText) -> HateScore:
        try:
            return self._forward(self._encode(text))
        except Exception as exc:
            raise ScoringError(f"exported model forward pass failed: {exc}") from exc

    def score_batch(self, texts: list[NormalizedText]) -> list[HateScore]:
        return score_batch(self, texts)

    def _forward(self, ids: list[int]) -> float:
        w = self._weights
        g = self._geometry
        eps = g.layer_norm_eps
        x = w["embeddings.word.weight"][ids] + w["embeddings.position.weight"][: len(ids)]
        x = _layer_norm(x, w["embeddings.norm.weight"], w["embeddings.norm.bias"], eps)
        head_dim = g.hidden_size // g.num_heads
        for i in range(g.num_layers):
            p = f"layers.{i}"
            q = x @ w[f"{p}.attention.query.weight"].T + w[f"{p}.attention.query.bias"]
            k = x @ w[f"{p}.attention.key.weight"].T + w[f"{p}.attention.key.bias"]
            v = x @ w[f"{p}.attention.value.weight"].T + w[f"{p}.attention.value.bias"]
            t = len(ids)
            q = q.reshape(t, g.num_heads, head_dim).transpose(1, 0, 2)
            k = k.reshape(t, g.num_heads, head_dim).transpose(1, 0, 2)
            v = v.reshape(t, g.num_heads, head_dim).transpose(1, 0, 2)
            attn = _softmax(q @ k.transpose(0, 2, 1) / math.sqrt(head_dim))
            ctx = (attn @ v).transpose(1, 0, 2).reshape(t, g.hidden_size)
            a = ctx @ w[f"{p}.attention.output.weight"].T + w[f"{p}.attention.output.bias"]
            x = _layer_norm(x + a, w[f"{p}.attention.norm.weight"], w[f"{p}.attention.norm.bias"], eps)
            h = _gelu(x @ w[f"{p}.ffn.intermediate.weight"].T + w[f"{p}.ffn.intermediate.bias"])
            f = h @ w[f"{p}.ffn.output.weight"].T + w[f"{p}.ffn.output.bias"]
            x = _layer_norm(x + f, w[f"{p}.ffn.norm.weight"], w[f"{p}.ffn.norm.bias"], eps)
        cls = x[0]
        h = np.tanh(cls @ w["classifier.dense.weight"].T + w["classifier.dense.bias"])
        logits = h @ w["classifier.out.weight"].T + w["classifier.out.bias"]
        return float(_softmax(logits)[1])


def load_exported_model(path: str | Path) -> ExportedModelScorer:
    """Load an exported-model directory (manifest + tokenizer + weights).

    Raises ``FileNotFoundError`` for a missing directory or manifest and
    :class:`ModelLoadError` for unsupported schema versions or corrupt
    artifacts.
    """
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"exported model directory not found: {root}")
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"manifest.json not found in {root}")
    try:
        manifest = json.loads(manifest_path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelLoadError(f"manifest.json is not valid JSON: {exc}") from exc
    version = manifest.get("schema_version")
    if version not in SUPPORTED_MANIFEST_VERSIONS:
        raise ModelLoadError(
            f"unsupported manifest schema_version {version!r}; this build supports {SUPPORTED_MANIFEST_VERSIONS}"
        )
    files = manifest.get("files", {})
    try:
        tokenizer = json.loads((root / files["tokenizer"]).read_text("utf-8"))
        with np.load(root / files["weights"]) as npz:
            weights = {name: npz[name] for name in npz.files}
    except KeyError as exc:
        raise ModelLoadError(f"manifest is missing file entry {exc}") from exc
    except (OSError, ValueError) as exc:
        raise ModelLoadError(f"failed to read exported artifact: {exc}") from exc
    return ExportedModelScorer(manifest, weights, tokenizer)
