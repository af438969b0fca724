"""Deterministic text normalization shared by training and serving.

Every text entering the pipeline (corpus rows, live requests, feedback
exports) passes through :func:`normalize` so that the lexicon matcher and
the scorer always see the same representation. Steps, in order: Unicode NFC,
lowercasing, URL removal, @-mention removal, emoji removal, whitespace
collapse and trim. Hashtags are kept; only the ``@name`` form is stripped.

"NormalizedText" throughout the package is a plain ``str`` produced by
:func:`normalize`.
"""

from __future__ import annotations

import re
import unicodedata
from importlib import resources
from pathlib import Path

NormalizedText = str

DEFAULT_MAX_WORDS = 60

# URLs run to the next whitespace; mentions are '@' plus word characters.
# Removed spans are replaced by a single space, never deleted outright:
# deletion could fuse the surrounding fragments into a brand-new URL or
# mention and break idempotence.
_URL_PATTERN = re.compile(r"(?:https?://|www\.)\S*")
_MENTION_PATTERN = re.compile(r"@\w+")


def _parse_ranges(lines) -> list[tuple[int, int]]:
    ranges = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        m = re.fullmatch(r"U\+([0-9A-Fa-f]{1,6})\.\.U\+([0-9A-Fa-f]{1,6})", line)
        if m is None:
            raise ValueError(f"emoji range file line {lineno}: expected 'U+XXXX..U+YYYY', got {line!r}")
        lo, hi = int(m.group(1), 16), int(m.group(2), 16)
        if lo > hi:
            raise ValueError(f"emoji range file line {lineno}: empty range {line!r}")
        ranges.append((lo, hi))
    return ranges


def load_emoji_ranges(path: str | Path | None = None) -> list[tuple[int, int]]:
    """Load emoji codepoint ranges from ``path`` or the bundled table."""
    if path is None:
        text = resources.files("modpipe.data").joinpath("emoji_ranges.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return _parse_ranges(text.splitlines())


def _compile_emoji_pattern(ranges: list[tuple[int, int]]) -> re.Pattern:
    body = "".join(
        re.escape(chr(lo)) if lo == hi else f"{re.escape(chr(lo))}-{re.escape(chr(hi))}"
        for lo, hi in ranges
    )
    return re.compile(f"[{body}]")


EMOJI_RANGES = load_emoji_ranges()
_EMOJI_PATTERN = _compile_emoji_pattern(EMOJI_RANGES)


def _normalize_once(text: str) -> str:
    text = unicodedata.normalize("NFC", text)
    text = text.lower()
    text = _URL_PATTERN.sub(" ", text)
    text = _MENTION_PATTERN.sub(" ", text)
    text = _EMOJI_PATTERN.sub(" ", text)
    return " ".join(text.split())


def normalize(raw: str) -> NormalizedText:
    """Normalize ``raw`` text; accepts any Unicode string, may return "".

    Idempotent: feeding the output back in returns it unchanged. The pass is
    iterated to a fixed point as a guard against pathological interactions
    between case mapping and recomposition; real inputs converge in one pass.
    """
    out = _normalize_once(raw)
    for _ in range(8):
        again = _normalize_once(out)
        if again == out:
            return out
        out = again
    return out


def word_count(text: NormalizedText) -> int:
    """Number of whitespace-delimited tokens; empty text counts 0."""
    return len(text.split())


def passes_length_filter(text: NormalizedText, max_words: int = DEFAULT_MAX_WORDS) -> bool:
    """True iff the text has at most ``max_words`` tokens.

    Texts exceeding the limit are the ones the corpus pipeline drops.
    """
    if max_words < 1:
        raise ValueError(f"max_words must be >= 1, got {max_words}")
    return word_count(text) <= max_words
