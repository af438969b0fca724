"""Corpus ingestion, unification, and reproducible stratified splitting.

CSV schema (shared with feedback exports): header ``text,label,source``,
label 0 = non-hate, 1 = hate. :func:`unify` concatenates corpora,
normalizes every text, drops overlength and empty rows, and deduplicates on
the normalized text keeping the first occurrence. Splits are seeded and
largest-remainder balanced per class, so class ratios deviate from the
input by less than one sample per class per split.
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .normalizer import DEFAULT_MAX_WORDS, normalize, passes_length_filter

CSV_HEADER = ["text", "label", "source"]
SPLIT_NAMES = ("train", "val", "test")

# Defaults approximating a 490K/30K/10K split of a 530K corpus.
DEFAULT_FRACTIONS = (0.925, 0.057, 0.018)


class DatasetError(Exception):
    """Malformed corpus file or unsatisfiable split."""


@dataclass(frozen=True)
class LabeledSample:
    text: str
    label: int  # 1 = hate, 0 = non_hate
    source: str = ""

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    val_fraction: float
    test_fraction: float
    seed: int

    def __post_init__(self):
        fractions = (self.train_fraction, self.val_fraction, self.test_fraction)
        if any(f <= 0 for f in fractions):
            raise ValueError(f"every split fraction must be > 0, got {fractions}")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fractions)!r}")

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.train_fraction, self.val_fraction, self.test_fraction)


@dataclass(frozen=True)
class UnifyResult:
    samples: tuple[LabeledSample, ...]
    duplicate_count: int
    label_conflicts: int
    dropped_overlength: int
    dropped_empty: int


@dataclass(frozen=True)
class CorpusStats:
    count: int
    class_counts: dict[str, int]
    class_ratio: float | None  # non_hate / total; None for an empty corpus
    duplicate_count: int
    dropped_overlength: int

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "class_counts": self.class_counts,
            "class_ratio": self.class_ratio,
            "duplicate_count": self.duplicate_count,
            "dropped_overlength": self.dropped_overlength,
        }


def ingest_csv(path: str | Path) -> list[LabeledSample]:
    """Read one corpus CSV; errors name the offending physical line."""
    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DatasetError(f"{path}: empty file (expected header {','.join(CSV_HEADER)})")
        if [f.strip() for f in reader.fieldnames] != CSV_HEADER:
            raise DatasetError(
                f"{path}: bad header {reader.fieldnames!r}, expected {','.join(CSV_HEADER)}"
            )
        for row in reader:
            line = reader.line_num
            if None in row or any(v is None for v in row.values()):
                raise DatasetError(f"{path}:{line}: wrong number of columns")
            label_raw = (row["label"] or "").strip()
            if label_raw not in ("0", "1"):
                raise DatasetError(f"{path}:{line}: label must be 0 or 1, got {label_raw!r}")
            samples.append(
                LabeledSample(text=row["text"], label=int(label_raw), source=(row["source"] or "").strip())
            )
    return samples


def unify(corpora: Sequence[Sequence[LabeledSample]], max_words: int = DEFAULT_MAX_WORDS) -> UnifyResult:
    """Concatenate, normalize, length-filter, and deduplicate corpora.

    Duplicates are detected on the normalized text; the first occurrence
    wins, and duplicates carrying a different label are counted separately
    as conflicts. Emitted samples carry their normalized text.
    """
    if not corpora:
        raise ValueError("need at least one corpus")
    kept: dict[str, LabeledSample] = {}
    duplicates = 0
    conflicts = 0
    overlength = 0
    empty = 0
    for corpus in corpora:
        for sample in corpus:
            text = normalize(sample.text)
            if not text:
                empty += 1
                continue
            if not passes_length_filter(text, max_words):
                overlength += 1
                continue
            existing = kept.get(text)
            if existing is not None:
                duplicates += 1
                if existing.label != sample.label:
                    conflicts += 1
                continue
            kept[text] = LabeledSample(text=text, label=sample.label, source=sample.source)
    return UnifyResult(
        samples=tuple(kept.values()),
        duplicate_count=duplicates,
        label_conflicts=conflicts,
        dropped_overlength=overlength,
        dropped_empty=empty,
    )


def _largest_remainder(n: int, fractions: Sequence[float]) -> list[int]:
    exact = [n * f for f in fractions]
    counts = [int(e) for e in exact]
    remainders = [e - c for e, c in zip(exact, counts)]
    short = n - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-remainders[i], i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def stratified_split(
    samples: Sequence[LabeledSample], spec: SplitSpec
) -> tuple[list[LabeledSample], list[LabeledSample], list[LabeledSample]]:
    """Seeded per-class shuffle + largest-remainder allocation.

    The three outputs partition the input exactly; identical
    (samples, spec) pairs produce identical splits.
    """
    by_class: dict[int, list[LabeledSample]] = {0: [], 1: []}
    for sample in samples:
        by_class[sample.label].append(sample)
    present = {label: group for label, group in by_class.items() if group}
    if not present:
        raise DatasetError("no samples to split")
    for label, group in present.items():
        if len(group) < len(SPLIT_NAMES):
            raise DatasetError(
                f"class {label} has {len(group)} samples, fewer than the {len(SPLIT_NAMES)} splits"
            )
    rng = random.Random(spec.seed)
    splits: tuple[list[LabeledSample], ...] = ([], [], [])
    for label in sorted(present):
        group = list(present[label])
        rng.shuffle(group)
        counts = _largest_remainder(len(group), spec.fractions)
        offset = 0
        for split, count in zip(splits, counts):
            split.extend(group[offset : offset + count])
            offset += count
    return splits[0], splits[1], splits[2]


def corpus_stats(
    samples: Sequence[LabeledSample],
    duplicate_count: int = 0,
    dropped_overlength: int = 0,
) -> CorpusStats:
    """Exact counts and the non-hate share of the corpus."""
    non_hate = sum(1 for s in samples if s.label == 0)
    hate = len(samples) - non_hate
    total = len(samples)
    return CorpusStats(
        count=total,
        class_counts={"non_hate": non_hate, "hate": hate},
        class_ratio=(non_hate / total) if total else None,
        duplicate_count=duplicate_count,
        dropped_overlength=dropped_overlength,
    )


def write_csv(path: str | Path, samples: Iterable[LabeledSample]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for sample in samples:
            writer.writerow([sample.text, sample.label, sample.source])


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_split(
    out_dir: str | Path,
    train: Sequence[LabeledSample],
    val: Sequence[LabeledSample],
    test: Sequence[LabeledSample],
    spec: SplitSpec,
) -> Path:
    """Write train/val/test CSVs plus a manifest with counts and hashes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"seed": spec.seed, "fractions": list(spec.fractions), "splits": {}}
    for name, part in zip(SPLIT_NAMES, (train, val, test)):
        csv_path = out / f"{name}.csv"
        write_csv(csv_path, part)
        stats = corpus_stats(part)
        manifest["splits"][name] = {
            "file": csv_path.name,
            "count": stats.count,
            "class_counts": stats.class_counts,
            "class_ratio": stats.class_ratio,
            "sha256": _sha256_file(csv_path),
        }
    manifest_path = out / "split_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", "utf-8")
    return manifest_path
