"""Drug-name cleaning and tokenization.

Cleaning deletes whitespace, bracketed fragments, configured symbol
characters, and brand prefixes, while keeping a positional audit trail so
the trimmed input can always be reconstructed from the cleaned text plus
the removed fragments.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

# Removal reasons recorded on fragments.
WHITESPACE = "whitespace"
BRACKET = "bracket"
SYMBOL = "symbol"
BRAND = "brand"

DEFAULT_SYMBOLS = frozenset("*·-/+,.:;'\"，。：；、‘’“”")

BRACKET_PAIRS = {
    "(": ")",
    "（": "）",
    "【": "】",
    "[": "]",
    "「": "」",
}
_CLOSER_OF = dict(BRACKET_PAIRS)
_OPENERS = frozenset(BRACKET_PAIRS)
_CLOSERS = frozenset(BRACKET_PAIRS.values())

TOKEN_MODES = ("char_unigram", "char_bigram")


class EmptyResultError(ValueError):
    """Cleaning consumed the whole string; the name is unusable."""

    def __init__(self, raw: str):
        super().__init__(f"cleaning left nothing of {raw!r}")
        self.raw = raw


@dataclass(frozen=True)
class RemovedFragment:
    """A deleted run of characters: text, reason, and offset in the trimmed input."""

    text: str
    reason: str
    start: int


@dataclass(frozen=True)
class CleanName:
    """A cleaned product name plus the fragments removed to obtain it."""

    text: str
    removed: tuple[RemovedFragment, ...]

    def reconstruct(self) -> str:
        """Rebuild the trimmed input by splicing removed fragments back in."""
        frag_at = {f.start: f for f in self.removed}
        total = len(self.text) + sum(len(f.text) for f in self.removed)
        out: list[str] = []
        kept = iter(self.text)
        i = 0
        while i < total:
            frag = frag_at.get(i)
            if frag is not None:
                out.append(frag.text)
                i += len(frag.text)
            else:
                out.append(next(kept))
                i += 1
        return "".join(out)


@dataclass(frozen=True)
class TokenSeq:
    """An ordered, non-empty sequence of non-empty tokens."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens or any(not t for t in self.tokens):
            raise ValueError("tokens must be non-empty strings")

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


def bracket_spans(text: str) -> tuple[list[tuple[int, int]], list[int]]:
    """Locate bracketed fragments.

    Returns matched ``(open, close)`` index spans (inclusive; nested pairs
    yield nested spans) plus the positions of stray bracket characters that
    never found a same-family partner.
    """
    spans: list[tuple[int, int]] = []
    strays: list[int] = []
    stack: list[tuple[str, int]] = []
    for i, ch in enumerate(text):
        if ch in _OPENERS:
            stack.append((ch, i))
        elif ch in _CLOSERS:
            if stack and _CLOSER_OF[stack[-1][0]] == ch:
                _, start = stack.pop()
                spans.append((start, i))  # nested spans overlap harmlessly
            else:
                strays.append(i)
    strays.extend(pos for _, pos in stack)
    return spans, sorted(strays)


def clean_name(
    raw: str,
    brand_lexicon: Iterable[str] = (),
    symbols: frozenset[str] = DEFAULT_SYMBOLS,
) -> CleanName:
    """Clean a raw product name.

    Steps, in order: trim and delete whitespace (remembering a leading
    whitespace-separated token as a brand candidate), delete bracketed
    fragments, delete symbol characters, then delete brand prefixes (any
    lexicon entry, repeatedly, plus the remembered candidate when something
    else remains).  Raises :class:`EmptyResultError` when nothing survives.
    """
    trimmed = raw.strip()
    n = len(trimmed)
    reason: list[str | None] = [None] * n

    first_ws = None
    for i, ch in enumerate(trimmed):
        if ch.isspace():
            reason[i] = WHITESPACE
            if first_ws is None:
                first_ws = i

    spans, strays = bracket_spans(trimmed)
    for start, end in spans:
        for i in range(start, end + 1):
            if reason[i] is None:
                reason[i] = BRACKET
    for i in strays:
        if reason[i] is None:
            reason[i] = BRACKET

    for i, ch in enumerate(trimmed):
        if reason[i] is None and ch in symbols:
            reason[i] = SYMBOL

    kept = [i for i in range(n) if reason[i] is None]
    lexicon = tuple(sorted((e for e in brand_lexicon if e), key=len, reverse=True))

    def strip_lexicon():
        while kept:
            working = "".join(trimmed[i] for i in kept)
            for entry in lexicon:
                if working.startswith(entry):
                    for i in kept[: len(entry)]:
                        reason[i] = BRAND
                    del kept[: len(entry)]
                    break
            else:
                return

    strip_lexicon()
    if first_ws is not None:
        candidate = [i for i in kept if i < first_ws]
        # Heuristic: a surviving whitespace-separated leading token is a
        # brand, provided the rest of the name is non-empty.
        if candidate and len(kept) > len(candidate) and kept[: len(candidate)] == candidate:
            for i in candidate:
                reason[i] = BRAND
            del kept[: len(candidate)]
        strip_lexicon()

    if not kept:
        raise EmptyResultError(raw)

    text = "".join(trimmed[i] for i in kept)
    fragments: list[RemovedFragment] = []
    i = 0
    while i < n:
        if reason[i] is None:
            i += 1
            continue
        start = i
        why = reason[i]
        while i < n and reason[i] == why:
            i += 1
        fragments.append(RemovedFragment(text=trimmed[start:i], reason=why, start=start))
    return CleanName(text=text, removed=tuple(fragments))


def tokenize(name: CleanName, mode: str = "char_unigram") -> TokenSeq:
    """Tokenize a cleaned name into character unigrams or overlapping bigrams."""
    return tokenize_text(name.text, mode)


def tokenize_text(text: str, mode: str = "char_unigram") -> TokenSeq:
    if mode not in TOKEN_MODES:
        raise ValueError(f"unknown token mode {mode!r}; expected one of {TOKEN_MODES}")
    if not text:
        raise ValueError("cannot tokenize an empty name")
    if mode == "char_unigram" or len(text) == 1:
        return TokenSeq(tuple(text))
    return TokenSeq(tuple(text[i : i + 2] for i in range(len(text) - 1)))


def load_brand_lexicon(path: str | Path) -> frozenset[str]:
    """Read a brand lexicon file: one brand per line, UTF-8, ``#`` comments."""
    entries = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.add(line)
    return frozenset(entries)
