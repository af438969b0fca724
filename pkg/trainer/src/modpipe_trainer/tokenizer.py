"""Word-level tokenizer shared (by specification) with the serving adapter.

Encoding is ``[cls] + vocab lookups of the first max_input_words whitespace
tokens, truncated to max_len``. The serving side reimplements exactly this
from the exported tokenizer.json, so any change here is a format change.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

PAD, CLS, UNK = "[pad]", "[cls]", "[unk]"


@dataclass(frozen=True)
class WordTokenizer:
    vocab: dict[str, int]
    max_len: int

    @property
    def pad_id(self) -> int:
        return self.vocab[PAD]

    @property
    def cls_id(self) -> int:
        return self.vocab[CLS]

    @property
    def unk_id(self) -> int:
        return self.vocab[UNK]

    @classmethod
    def build(cls, texts, max_len: int = 64, max_vocab: int = 20_000, min_freq: int = 1):
        counts = Counter(token for text in texts for token in text.split())
        vocab = {PAD: 0, CLS: 1, UNK: 2}
        for token, freq in counts.most_common():
            if freq < min_freq or len(vocab) >= max_vocab:
                break
            vocab[token] = len(vocab)
        return cls(vocab=vocab, max_len=max_len)

    def encode(self, text: str, max_input_words: int = 60) -> list[int]:
        tokens = text.split()[:max_input_words]
        ids = [self.cls_id] + [self.vocab.get(t, self.unk_id) for t in tokens]
        return ids[: self.max_len]

    def to_json(self) -> str:
        return json.dumps(
            {
                "type": "word",
                "vocab": self.vocab,
                "pad_id": self.pad_id,
                "cls_id": self.cls_id,
                "unk_id": self.unk_id,
                "max_len": self.max_len,
            }
        )

    @classmethod
    def from_json_file(cls, path: str | Path):
        data = json.loads(Path(path).read_text("utf-8"))
        return cls(vocab=data["vocab"], max_len=int(data["max_len"]))
