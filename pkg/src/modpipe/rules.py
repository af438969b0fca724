"""Layer 1: deterministic lexicon/regex pre-filter.

Rules come from a TSV file (``id<TAB>category<TAB>kind<TAB>pattern``,
``#``-comment lines allowed). Term and hashtag patterns are matched with a
single Aho-Corasick pass under word-boundary semantics; regex rules are
searched leftmost-first one by one. A compiled rule set is immutable, so a
live service swaps in a freshly compiled set instead of mutating one.

Boundary semantics: a term/hashtag occurrence counts only when the characters
adjacent to the matched span are text edges or non-token characters. Token
characters are alphanumerics, ``_`` and ``#`` -- treating ``#`` as part of
the token keeps plain terms from firing inside hashtags while letting
hashtag rules anchor on their ``#``.
"""

from __future__ import annotations

import enum
import hashlib
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path


class RuleKind(enum.Enum):
    TERM = "term"
    HASHTAG = "hashtag"
    REGEX = "regex"


class RuleCategory(enum.Enum):
    PROFANITY = "profanity"
    HATE_TERM = "hate_term"
    EXTREMIST_HASHTAG = "extremist_hashtag"
    CODED_EXPRESSION = "coded_expression"


class RuleError(Exception):
    """Malformed rules file or unbuildable rule set."""


@dataclass(frozen=True)
class RuleEntry:
    id: str
    category: RuleCategory
    kind: RuleKind
    pattern: str

    def __post_init__(self):
        if not self.pattern:
            raise RuleError(f"rule {self.id!r}: empty pattern")
        if not self.id:
            raise RuleError("rule with empty id")


@dataclass(frozen=True)
class RuleHit:
    rule_id: str
    category: RuleCategory
    start: int
    end: int  # exclusive; offsets are code points into the normalized text


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    hits: tuple[RuleHit, ...]


_ASCII_TOKEN_CHARS = frozenset("#_abcdefghijklmnopqrstuvwxyz0123456789")


def is_token_char(ch: str) -> bool:
    """Characters that bind into a token for boundary purposes."""
    return ch in _ASCII_TOKEN_CHARS or ch.isalnum()


def load_rules(path: str | Path) -> list[RuleEntry]:
    """Parse a rules TSV file into entries, preserving file order.

    Raises :class:`RuleError` naming the offending line for malformed rows,
    unknown kinds/categories, non-normalized term patterns, and duplicate ids.
    """
    entries: list[RuleEntry] = []
    seen: dict[str, int] = {}
    text = Path(path).read_text("utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise RuleError(f"{path}:{lineno}: expected 4 tab-separated columns, got {len(cols)}")
        rule_id, category_s, kind_s, pattern = (c.strip() for c in cols)
        try:
            category = RuleCategory(category_s)
        except ValueError:
            raise RuleError(f"{path}:{lineno}: unknown category {category_s!r}") from None
        try:
            kind = RuleKind(kind_s)
        except ValueError:
            raise RuleError(f"{path}:{lineno}: unknown kind {kind_s!r}") from None
        if not pattern:
            raise RuleError(f"{path}:{lineno}: empty pattern")
        if kind in (RuleKind.TERM, RuleKind.HASHTAG) and pattern != pattern.lower():
            raise RuleError(f"{path}:{lineno}: {kind.value} pattern must be lowercase (normalized form)")
        if kind is RuleKind.HASHTAG and not pattern.startswith("#"):
            raise RuleError(f"{path}:{lineno}: hashtag pattern must start with '#'")
        if rule_id in seen:
            raise RuleError(f"{path}:{lineno}: duplicate rule id {rule_id!r} (first seen on line {seen[rule_id]})")
        seen[rule_id] = lineno
        entries.append(RuleEntry(id=rule_id, category=category, kind=kind, pattern=pattern))
    return entries


class _Automaton:
    """Aho-Corasick automaton over literal patterns, flattened to a DFA.

    Failure links are folded into the transition tables at build time, so
    matching costs one dict lookup per character: a single pass over the
    text reports every occurrence of every pattern, and match time stays
    linear in text length for a fixed rule set. Table size is bounded by
    trie states times the alphabet actually used in patterns.
    """

    def __init__(self, patterns: list[str]):
        self._lengths = [len(p) for p in patterns]
        delta: list[dict[str, int]] = [{}]
        out: list[list[int]] = [[]]
        for idx, pat in enumerate(patterns):
            state = 0
            for ch in pat:
                nxt = delta[state].get(ch)
                if nxt is None:
                    delta.append({})
                    out.append([])
                    nxt = len(delta) - 1
                    delta[state][ch] = nxt
                state = nxt
            out[state].append(idx)
        fail = [0] * len(delta)
        queue = deque(delta[0].values())
        while queue:
            state = queue.popleft()
            fallback = delta[fail[state]]
            trie_edges = list(delta[state].items())
            for ch, child in trie_edges:
                fail[child] = fallback.get(ch, 0)
                out[child].extend(out[fail[child]])
                queue.append(child)
            for ch, target in fallback.items():
                delta[state].setdefault(ch, target)
        self._delta = delta
        self._out = [tuple(o) for o in out]

    def boundary_hits(self, text: str) -> list[tuple[int, int, int]]:
        """(pattern_index, start, end) for every word-boundary occurrence.

        The end-side boundary is checked once per emitting position, before
        any per-pattern work, which is what keeps dense rule sets fast.
        """
        delta = self._delta
        out = self._out
        lengths = self._lengths
        tokens = _ASCII_TOKEN_CHARS
        n = len(text)
        hits = []
        state = 0
        pos = 0
        for ch in text:
            state = delta[state].get(ch, 0)
            pos += 1
            if out[state] and not (
                pos < n and (text[pos] in tokens or text[pos].isalnum())
            ):
                for idx in out[state]:
                    start = pos - lengths[idx]
                    if start == 0 or not (
                        text[start - 1] in tokens or text[start - 1].isalnum()
                    ):
                        hits.append((start, idx, pos))
        return hits


@dataclass(frozen=True)
class CompiledRuleSet:
    """Immutable, shareable compilation of a rule list."""

    rules: tuple[RuleEntry, ...]
    version: str
    _automaton: _Automaton = field(repr=False, compare=False)
    _literal_rule_indexes: tuple[int, ...] = field(repr=False, compare=False)
    _regexes: tuple[tuple[int, re.Pattern], ...] = field(repr=False, compare=False)

    def match(self, text: str) -> MatchResult:
        return match(self, text)


def ruleset_version(rules: list[RuleEntry] | tuple[RuleEntry, ...]) -> str:
    """Content hash over the canonical rule lines (comments don't count)."""
    h = hashlib.sha256()
    for r in rules:
        h.update(f"{r.id}\t{r.category.value}\t{r.kind.value}\t{r.pattern}\n".encode("utf-8"))
    return h.hexdigest()[:16]


def compile_rules(rules: list[RuleEntry]) -> CompiledRuleSet:
    """Build the automaton for term/hashtag rules and compile each regex.

    Raises :class:`RuleError` naming the rule whose regex does not compile.
    """
    literal_indexes = [i for i, r in enumerate(rules) if r.kind is not RuleKind.REGEX]
    automaton = _Automaton([rules[i].pattern for i in literal_indexes])
    regexes = []
    for i, rule in enumerate(rules):
        if rule.kind is RuleKind.REGEX:
            try:
                regexes.append((i, re.compile(rule.pattern)))
            except re.error as exc:
                raise RuleError(f"rule {rule.id!r}: regex does not compile: {exc}") from exc
    return CompiledRuleSet(
        rules=tuple(rules),
        version=ruleset_version(rules),
        _automaton=automaton,
        _literal_rule_indexes=tuple(literal_indexes),
        _regexes=tuple(regexes),
    )


def match(ruleset: CompiledRuleSet, text: str) -> MatchResult:
    """All rule occurrences in normalized ``text``.

    Term/hashtag hits are ordered by span start (rule order on ties), then
    regex hits in rule order; each regex contributes at most its leftmost
    match. The output equals what a rule-by-rule scan of the text would find.
    """
    rules = ruleset.rules
    rule_indexes = ruleset._literal_rule_indexes
    literal_hits = [
        (start, rule_indexes[pat_idx], end)
        for start, pat_idx, end in ruleset._automaton.boundary_hits(text)
    ]
    literal_hits.sort()
    hits = [
        RuleHit(rule_id=rules[ri].id, category=rules[ri].category, start=s, end=e)
        for s, ri, e in literal_hits
    ]
    for rule_idx, regex in ruleset._regexes:
        m = regex.search(text)
        if m is not None:
            rule = rules[rule_idx]
            hits.append(RuleHit(rule_id=rule.id, category=rule.category, start=m.start(), end=m.end()))
    return MatchResult(matched=bool(hits), hits=tuple(hits))


def compile_rules_file(path: str | Path) -> CompiledRuleSet:
    """Load + compile in one step (what the service does at boot/reload)."""
    return compile_rules(load_rules(path))
