"""Low-rank adapters over attention projections.

Each adapted projection keeps its frozen base weight W and learns a rank-r
update: the effective weight is W + (alpha/r) * B @ A, with A small random
and B zero at attach time so the adapted model starts exactly equal to the
base model. Only A, B (and the classifier head, when configured) train.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .model import TinyEncoderClassifier

TARGET_ATTRS = {
    "query": "query",
    "key": "key",
    "value": "value",
    "attention_output_dense": "output",
}


@dataclass(frozen=True)
class LoraConfig:
    rank: int = 16
    alpha: float = 12.0
    target_projections: tuple[str, ...] = ("query", "key", "value", "attention_output_dense")
    train_classifier_fully: bool = True
    adapter_dropout: float = 0.0

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if not self.target_projections:
            raise ValueError("target_projections must be nonempty")
        unknown = set(self.target_projections) - set(TARGET_ATTRS)
        if unknown:
            raise ValueError(f"unknown target projections: {sorted(unknown)}")

    @property
    def scaling(self) -> float:
        return self.alpha / self.rank

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "alpha": self.alpha,
            "targets": list(self.target_projections),
            "train_classifier_fully": self.train_classifier_fully,
            "adapter_dropout": self.adapter_dropout,
        }


class LoraLinear(nn.Module):
    """Frozen linear layer plus a trainable low-rank residual."""

    def __init__(self, base: nn.Linear, rank: int, alpha: float, dropout: float = 0.0):
        super().__init__()
        self.base = base
        self.base.weight.requires_grad_(False)
        if self.base.bias is not None:
            self.base.bias.requires_grad_(False)
        self.scaling = alpha / rank
        self.lora_a = nn.Parameter(torch.randn(rank, base.in_features) * 0.02)
        self.lora_b = nn.Parameter(torch.zeros(base.out_features, rank))
        self.dropout = nn.Dropout(dropout) if dropout > 0 else nn.Identity()

    def forward(self, x):
        residual = (self.dropout(x) @ self.lora_a.T) @ self.lora_b.T
        return self.base(x) + self.scaling * residual

    def merged_weight(self) -> torch.Tensor:
        return self.base.weight + self.scaling * (self.lora_b @ self.lora_a)


class MissingTargetError(Exception):
    """A configured target projection does not exist in the model."""


def attach_adapters(model: TinyEncoderClassifier, cfg: LoraConfig) -> TinyEncoderClassifier:
    """Freeze the model, wrap configured projections, unfreeze the head.

    Returns the same model instance; attachment is in place.
    """
    for param in model.parameters():
        param.requires_grad_(False)
    for layer_idx, layer in enumerate(model.layers):
        for target in cfg.target_projections:
            attr = TARGET_ATTRS[target]
            base = getattr(layer.attention, attr, None)
            if not isinstance(base, nn.Linear):
                raise MissingTargetError(
                    f"layer {layer_idx} has no linear projection {target!r} (attribute {attr!r})"
                )
            setattr(
                layer.attention,
                attr,
                LoraLinear(base, cfg.rank, cfg.alpha, cfg.adapter_dropout),
            )
    if cfg.train_classifier_fully:
        for param in model.classifier.parameters():
            param.requires_grad_(True)
    return model


def adapter_modules(model: nn.Module) -> dict[str, LoraLinear]:
    return {name: mod for name, mod in model.named_modules() if isinstance(mod, LoraLinear)}


def merged_state_arrays(model: nn.Module) -> dict[str, torch.Tensor]:
    """State dict with adapters folded into their base weights.

    Keys use the export naming scheme (no ``.base`` segment, no lora
    factors); values are detached tensors.
    """
    arrays: dict[str, torch.Tensor] = {}
    adapters = adapter_modules(model)
    for name, tensor in model.state_dict().items():
        if name.endswith((".lora_a", ".lora_b")):
            continue
        if name.endswith(".base.weight"):
            prefix = name[: -len(".base.weight")]
            if prefix in adapters:
                arrays[prefix + ".weight"] = adapters[prefix].merged_weight().detach()
                continue
        arrays[name.replace(".base.", ".")] = tensor.detach()
    return arrays


def adapter_state_arrays(model: nn.Module) -> dict[str, torch.Tensor]:
    """State dict keeping base weights unmerged plus the lora factors."""
    arrays: dict[str, torch.Tensor] = {}
    for name, tensor in model.state_dict().items():
        arrays[name.replace(".base.", ".")] = tensor.detach()
    return arrays
