"""Shared builders for trainer tests: toy models and normalized corpora."""

from __future__ import annotations

import pytest
import torch

from modpipe.dataset import LabeledSample, SplitSpec, stratified_split
from modpipe.fixtures import synthetic_corpus
from modpipe.normalizer import normalize

from modpipe_trainer import EncoderGeometry, TinyEncoderClassifier, WordTokenizer


def toy_geometry(vocab_size=24, hidden=8, layers=2, heads=2, inter=16, max_pos=8):
    return EncoderGeometry(
        vocab_size=vocab_size,
        hidden_size=hidden,
        num_layers=layers,
        num_heads=heads,
        intermediate_size=inter,
        max_position=max_pos,
    )


def toy_model(seed=0, **geometry_kwargs) -> TinyEncoderClassifier:
    torch.manual_seed(seed)
    return TinyEncoderClassifier(toy_geometry(**geometry_kwargs))


def toy_batch(geometry: EncoderGeometry, batch=3, length=6, seed=1):
    gen = torch.Generator().manual_seed(seed)
    input_ids = torch.randint(0, geometry.vocab_size, (batch, length), generator=gen)
    mask = torch.ones(batch, length, dtype=torch.long)
    labels = torch.randint(0, geometry.num_classes, (batch,), generator=gen)
    return input_ids, mask, labels


def normalized_corpus(n, seed):
    return [
        LabeledSample(text=normalize(s.text), label=s.label, source=s.source)
        for s in synthetic_corpus(n, seed=seed)
    ]


@pytest.fixture(scope="session")
def desk_data():
    samples = normalized_corpus(1000, seed=5)
    train_set, val_set, _ = stratified_split(samples, SplitSpec(0.8, 0.15, 0.05, seed=2))
    tokenizer = WordTokenizer.build([s.text for s in train_set], max_len=32)
    return list(train_set), list(val_set), tokenizer
