"""Trainable-parameter accounting with a closed-form cross-check."""

from __future__ import annotations

from dataclasses import dataclass

from torch import nn


@dataclass(frozen=True)
class ParamAudit:
    total_params: int
    trainable_params: int
    trainable_fraction: float
    breakdown: dict[str, dict[str, int]]  # component -> {total, trainable}

    def component_trainable(self, name: str) -> int:
        return self.breakdown.get(name, {}).get("trainable", 0)


def _component(param_name: str) -> str:
    if ".lora_a" in param_name or ".lora_b" in param_name:
        return "adapters"
    if param_name.startswith("embeddings."):
        return "embeddings"
    if param_name.startswith("classifier."):
        return "classifier"
    return "encoder"


def count_trainable(model: nn.Module) -> ParamAudit:
    """Enumerate every tensor, bucketed by component.

    The enumerated adapter count must equal :func:`adapter_param_formula`
    exactly; tests assert that identity.
    """
    breakdown: dict[str, dict[str, int]] = {}
    total = 0
    trainable = 0
    for name, param in model.named_parameters():
        bucket = breakdown.setdefault(_component(name), {"total": 0, "trainable": 0})
        n = param.numel()
        bucket["total"] += n
        total += n
        if param.requires_grad:
            bucket["trainable"] += n
            trainable += n
    return ParamAudit(
        total_params=total,
        trainable_params=trainable,
        trainable_fraction=trainable / total if total else 0.0,
        breakdown=breakdown,
    )


def adapter_param_formula(num_layers: int, num_targets: int, rank: int, d_in: int, d_out: int) -> int:
    """Adapter parameters: layers x targets x r x (d_in + d_out)."""
    return num_layers * num_targets * rank * (d_in + d_out)


def classifier_param_formula(hidden: int, num_classes: int) -> int:
    """Dense(h->h) + out(h->classes), biases included."""
    return hidden * hidden + hidden + hidden * num_classes + num_classes
