"""Parameter audit: enumeration equals the closed form, at toy and full size."""

import torch

from modpipe_trainer import (
    EncoderGeometry,
    LoraConfig,
    TinyEncoderClassifier,
    adapter_param_formula,
    attach_adapters,
    classifier_param_formula,
    count_trainable,
)

from conftest import toy_model


def test_enumeration_equals_formula_toy():
    model = attach_adapters(toy_model(), LoraConfig(rank=2))
    audit = count_trainable(model)
    g = model.geometry
    assert audit.component_trainable("adapters") == adapter_param_formula(
        g.num_layers, 4, 2, g.hidden_size, g.hidden_size
    )
    assert audit.component_trainable("classifier") == classifier_param_formula(
        g.hidden_size, g.num_classes
    )
    assert audit.trainable_params == (
        audit.component_trainable("adapters") + audit.component_trainable("classifier")
    )


def test_breakdown_sums_to_totals():
    model = attach_adapters(toy_model(seed=2), LoraConfig(rank=4))
    audit = count_trainable(model)
    assert sum(b["total"] for b in audit.breakdown.values()) == audit.total_params
    assert sum(b["trainable"] for b in audit.breakdown.values()) == audit.trainable_params
    assert 0.0 < audit.trainable_fraction < 1.0
    assert audit.breakdown["embeddings"]["trainable"] == 0
    assert audit.breakdown["encoder"]["trainable"] == 0


def test_partial_targets_reduce_count():
    model = attach_adapters(toy_model(seed=3), LoraConfig(rank=2, target_projections=("query", "value")))
    audit = count_trainable(model)
    g = model.geometry
    assert audit.component_trainable("adapters") == adapter_param_formula(
        g.num_layers, 2, 2, g.hidden_size, g.hidden_size
    )


def test_full_size_geometry_trainable_count():
    """12 layers, hidden 768, 4 targets, r=16 plus a fully trained head."""
    torch.manual_seed(0)
    geometry = EncoderGeometry(
        vocab_size=128,  # embeddings are frozen; vocab size cannot change trainable counts
        hidden_size=768,
        num_layers=12,
        num_heads=12,
        intermediate_size=3072,
        max_position=64,
    )
    model = attach_adapters(TinyEncoderClassifier(geometry), LoraConfig(rank=16, alpha=12.0))
    audit = count_trainable(model)
    assert audit.component_trainable("adapters") == 1_179_648
    assert audit.component_trainable("adapters") == adapter_param_formula(12, 4, 16, 768, 768)
    assert audit.component_trainable("classifier") == 592_130
    assert audit.component_trainable("classifier") == classifier_param_formula(768, 2)
    assert audit.trainable_params == 1_771_778
