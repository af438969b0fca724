"""Low-rank adapter fine-tuning for the moderation scorer.

Attaches rank-r adapters to the attention projections of a miniature
encoder classifier, trains with warmup+cosine scheduling and gradient
accumulation, audits trainable parameters against the closed form, and
exports artifacts the serving scorer loads directly.
"""

from .audit import ParamAudit, adapter_param_formula, classifier_param_formula, count_trainable
from .export import ExportError, export, load_self_test
from .lora import LoraConfig, LoraLinear, MissingTargetError, attach_adapters
from .model import EncoderGeometry, TinyEncoderClassifier
from .tokenizer import WordTokenizer
from .training import TrainConfig, TrainingDivergedError, TrainResult, evaluate_split, train

__all__ = [
    "EncoderGeometry",
    "ExportError",
    "LoraConfig",
    "LoraLinear",
    "MissingTargetError",
    "ParamAudit",
    "TinyEncoderClassifier",
    "TrainConfig",
    "TrainResult",
    "TrainingDivergedError",
    "WordTokenizer",
    "adapter_param_formula",
    "attach_adapters",
    "classifier_param_formula",
    "count_trainable",
    "evaluate_split",
    "export",
    "load_self_test",
    "train",
]
