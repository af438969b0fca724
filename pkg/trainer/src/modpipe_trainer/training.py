"""Fine-tuning loop: warmup + cosine decay, accumulation, clipping, MCC selection.

The schedule runs over optimizer steps: linear warmup from 0 for the first
warmup fraction of total steps, then cosine decay to 0. Gradients accumulate
for ``grad_accumulation_steps`` micro-batches per optimizer step and the
global norm of the trainable parameters is clipped at ``grad_clip_norm``.
The checkpoint with the best validation MCC wins.
"""

from __future__ import annotations

import copy
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

from modpipe.dataset import LabeledSample
from modpipe.metrics import confusion_from, macro_f1 as macro_f1_metric, mcc as mcc_metric

from .model import TinyEncoderClassifier
from .tokenizer import WordTokenizer


class TrainingDivergedError(Exception):
    """Loss went non-finite; training aborted."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 2e-3
    weight_decay: float = 0.01
    epochs: int = 3
    warmup_fraction: float = 0.10
    grad_accumulation_steps: int = 2
    effective_batch_size: int = 512
    grad_clip_norm: float = 1.0
    mixed_precision: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must be in [0, 1)")
        if self.effective_batch_size % self.grad_accumulation_steps != 0:
            raise ValueError("effective_batch_size must be divisible by grad_accumulation_steps")

    @property
    def per_device_batch_size(self) -> int:
        return self.effective_batch_size // self.grad_accumulation_steps

    def digest_payload(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "weight_decay": self.weight_decay,
            "epochs": self.epochs,
            "warmup_fraction": self.warmup_fraction,
            "grad_accumulation_steps": self.grad_accumulation_steps,
            "effective_batch_size": self.effective_batch_size,
            "grad_clip_norm": self.grad_clip_norm,
            "mixed_precision": self.mixed_precision,
            "seed": self.seed,
        }


def schedule_factor(step: int, total_steps: int, warmup_steps: int) -> float:
    """Learning-rate multiplier at an optimizer step (0-based)."""
    if warmup_steps > 0 and step < warmup_steps:
        return step / warmup_steps
    if total_steps <= warmup_steps:
        return 1.0
    progress = (step - warmup_steps) / (total_steps - warmup_steps)
    return 0.5 * (1.0 + math.cos(math.pi * min(progress, 1.0)))


@dataclass
class TrainResult:
    best_state: dict
    best_val_mcc: float
    best_epoch: int
    log: list[dict] = field(default_factory=list)
    epoch_metrics: list[dict] = field(default_factory=list)

    def write_log(self, path: str | Path) -> Path:
        """Per-step records (step, lr, loss) as line-delimited JSON."""
        path = Path(path)
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.log:
                fh.write(json.dumps(entry) + "\n")
        return path


def _batches(samples: list[LabeledSample], tokenizer: WordTokenizer, batch_size: int, rng: random.Random | None):
    order = list(range(len(samples)))
    if rng is not None:
        rng.shuffle(order)
    for start in range(0, len(order), batch_size):
        chunk = [samples[i] for i in order[start : start + batch_size]]
        encoded = [tokenizer.encode(s.text) for s in chunk]
        width = max(len(ids) for ids in encoded)
        input_ids = torch.full((len(chunk), width), tokenizer.pad_id, dtype=torch.long)
        mask = torch.zeros((len(chunk), width), dtype=torch.long)
        for row, ids in enumerate(encoded):
            input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            mask[row, : len(ids)] = 1
        labels = torch.tensor([s.label for s in chunk], dtype=torch.long)
        yield input_ids, mask, labels


@torch.no_grad()
def evaluate_split(model: TinyEncoderClassifier, samples, tokenizer: WordTokenizer) -> dict:
    model.eval()
    predictions, labels = [], []
    for input_ids, mask, batch_labels in _batches(samples, tokenizer, 64, rng=None):
        logits = model(input_ids, mask)
        predictions.extend(logits.argmax(dim=-1).tolist())
        labels.extend(batch_labels.tolist())
    cm = confusion_from(predictions, labels)
    return {"mcc": mcc_metric(cm), "macro_f1": macro_f1_metric(cm)}


def train(
    model: TinyEncoderClassifier,
    train_set: list[LabeledSample],
    val_set: list[LabeledSample],
    cfg: TrainConfig,
    tokenizer: WordTokenizer,
) -> TrainResult:
    """Run the full schedule; returns the best-val-MCC checkpoint and a log."""
    if not train_set:
        raise ValueError("empty training set")
    torch.manual_seed(cfg.seed)
    rng = random.Random(cfg.seed)

    trainable = [p for p in model.parameters() if p.requires_grad]
    if not trainable:
        raise ValueError("model has no trainable parameters (attach adapters first)")
    optimizer = torch.optim.AdamW(trainable, lr=cfg.learning_rate, weight_decay=cfg.weight_decay)

    micro = cfg.per_device_batch_size
    micro_batches_per_epoch = math.ceil(len(train_set) / micro)
    steps_per_epoch = math.ceil(micro_batches_per_epoch / cfg.grad_accumulation_steps)
    total_steps = steps_per_epoch * cfg.epochs
    warmup_steps = int(round(cfg.warmup_fraction * total_steps))
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: schedule_factor(step, total_steps, warmup_steps)
    )

    use_amp = cfg.mixed_precision and torch.cuda.is_available()
    scaler = torch.amp.GradScaler("cuda", enabled=use_amp)
    loss_fn = nn.CrossEntropyLoss()

    result = TrainResult(best_state={}, best_val_mcc=-math.inf, best_epoch=-1)
    step = 0
    for epoch in range(cfg.epochs):
        model.train()
        accumulated = 0
        step_losses = []
        for input_ids, mask, labels in _batches(train_set, tokenizer, micro, rng):
            with torch.autocast("cuda", enabled=use_amp):
                loss = loss_fn(model(input_ids, mask), labels)
            if not torch.isfinite(loss):
                raise TrainingDivergedError(f"non-finite loss at optimizer step {step}")
            scaler.scale(loss / cfg.grad_accumulation_steps).backward()
            step_losses.append(loss.item())
            accumulated += 1
            if accumulated == cfg.grad_accumulation_steps:
                lr_now = scheduler.get_last_lr()[0]
                scaler.unscale_(optimizer)
                torch.nn.utils.clip_grad_norm_(trainable, cfg.grad_clip_norm)
                scaler.step(optimizer)
                scaler.update()
                optimizer.zero_grad(set_to_none=True)
                scheduler.step()
                result.log.append({"step": step, "lr": lr_now, "loss": sum(step_losses) / len(step_losses)})
                step += 1
                accumulated = 0
                step_losses = []
        if accumulated:  # trailing partial accumulation window
            lr_now = scheduler.get_last_lr()[0]
            scaler.unscale_(optimizer)
            torch.nn.utils.clip_grad_norm_(trainable, cfg.grad_clip_norm)
            scaler.step(optimizer)
            scaler.update()
            optimizer.zero_grad(set_to_none=True)
            scheduler.step()
            result.log.append({"step": step, "lr": lr_now, "loss": sum(step_losses) / len(step_losses)})
            step += 1

        metrics = evaluate_split(model, val_set, tokenizer) if val_set else {"mcc": 0.0, "macro_f1": 0.0}
        metrics["epoch"] = epoch
        result.epoch_metrics.append(metrics)
        if metrics["mcc"] > result.best_val_mcc:
            result.best_val_mcc = metrics["mcc"]
            result.best_epoch = epoch
            result.best_state = copy.deepcopy(model.state_dict())
    return result
