"""Miniature transformer encoder classifier.

Same block structure as the production encoder (post-layernorm attention
blocks with query/key/value/output projections, GELU feed-forward, tanh
pooled classifier head), shrunk so every invariant runs on a laptop CPU.
Module names line up 1:1 with the exported tensor names, so the export step
is a plain state-dict walk.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import torch
from torch import nn


@dataclass(frozen=True)
class EncoderGeometry:
    vocab_size: int
    hidden_size: int = 64
    num_layers: int = 2
    num_heads: int = 4
    intermediate_size: int = 128
    max_position: int = 64
    num_classes: int = 2
    layer_norm_eps: float = 1e-12

    def __post_init__(self):
        if self.hidden_size % self.num_heads != 0:
            raise ValueError("hidden_size must be divisible by num_heads")

    def to_dict(self) -> dict:
        return asdict(self)


class SelfAttention(nn.Module):
    def __init__(self, g: EncoderGeometry):
        super().__init__()
        self.num_heads = g.num_heads
        self.head_dim = g.hidden_size // g.num_heads
        self.query = nn.Linear(g.hidden_size, g.hidden_size)
        self.key = nn.Linear(g.hidden_size, g.hidden_size)
        self.value = nn.Linear(g.hidden_size, g.hidden_size)
        self.output = nn.Linear(g.hidden_size, g.hidden_size)
        self.norm = nn.LayerNorm(g.hidden_size, eps=g.layer_norm_eps)

    def forward(self, x, attention_mask=None):
        b, t, h = x.shape
        q = self.query(x).view(b, t, self.num_heads, self.head_dim).transpose(1, 2)
        k = self.key(x).view(b, t, self.num_heads, self.head_dim).transpose(1, 2)
        v = self.value(x).view(b, t, self.num_heads, self.head_dim).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        if attention_mask is not None:
            scores = scores + attention_mask[:, None, None, :]
        ctx = torch.softmax(scores, dim=-1) @ v
        ctx = ctx.transpose(1, 2).reshape(b, t, h)
        return self.norm(x + self.output(ctx))


class FeedForward(nn.Module):
    def __init__(self, g: EncoderGeometry):
        super().__init__()
        self.intermediate = nn.Linear(g.hidden_size, g.intermediate_size)
        self.output = nn.Linear(g.intermediate_size, g.hidden_size)
        self.norm = nn.LayerNorm(g.hidden_size, eps=g.layer_norm_eps)
        self.act = nn.GELU()  # exact erf form, mirrored by the serving adapter

    def forward(self, x):
        return self.norm(x + self.output(self.act(self.intermediate(x))))


class EncoderLayer(nn.Module):
    def __init__(self, g: EncoderGeometry):
        super().__init__()
        self.attention = SelfAttention(g)
        self.ffn = FeedForward(g)

    def forward(self, x, attention_mask=None):
        return self.ffn(self.attention(x, attention_mask))


class Embeddings(nn.Module):
    def __init__(self, g: EncoderGeometry):
        super().__init__()
        self.word = nn.Embedding(g.vocab_size, g.hidden_size)
        self.position = nn.Embedding(g.max_position, g.hidden_size)
        self.norm = nn.LayerNorm(g.hidden_size, eps=g.layer_norm_eps)

    def forward(self, input_ids):
        positions = torch.arange(input_ids.shape[1], device=input_ids.device)
        return self.norm(self.word(input_ids) + self.position(positions)[None, :, :])


class ClassifierHead(nn.Module):
    def __init__(self, g: EncoderGeometry):
        super().__init__()
        self.dense = nn.Linear(g.hidden_size, g.hidden_size)
        self.out = nn.Linear(g.hidden_size, g.num_classes)

    def forward(self, cls_state):
        return self.out(torch.tanh(self.dense(cls_state)))


class TinyEncoderClassifier(nn.Module):
    """Sequence classifier: embeddings -> encoder stack -> CLS head."""

    def __init__(self, geometry: EncoderGeometry):
        super().__init__()
        self.geometry = geometry
        self.embeddings = Embeddings(geometry)
        self.layers = nn.ModuleList(EncoderLayer(geometry) for _ in range(geometry.num_layers))
        self.classifier = ClassifierHead(geometry)

    def forward(self, input_ids, attention_mask=None):
        """``attention_mask``: 1 for real tokens, 0 for padding; optional."""
        additive = None
        if attention_mask is not None:
            additive = torch.where(attention_mask.bool(), 0.0, float("-inf")).to(
                self.embeddings.word.weight.dtype
            )
        x = self.embeddings(input_ids)
        for layer in self.layers:
            x = layer(x, additive)
        return self.classifier(x[:, 0])

    @torch.no_grad()
    def hate_probability(self, input_ids) -> float:
        """Single unpadded sequence -> P(hate), as served."""
        logits = self.forward(input_ids[None, :])
        return torch.softmax(logits[0], dim=-1)[1].item()
