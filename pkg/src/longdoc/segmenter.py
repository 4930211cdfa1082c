"""Rule-based Arabic-aware sentence segmentation under a token budget.

Splitting happens after sentence-final punctuation, short fragments are
merged forward until they reach the minimum budget, and overlong stretches
are re-split at whitespace into balanced pieces.
"""

from __future__ import annotations

import math
import unicodedata
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

from .corpus import Document

# Sentence-final characters. The Arabic comma (U+060C) is deliberately absent:
# it joins clauses, not sentences.
DEFAULT_BOUNDARY_CHARS = frozenset({".", "!", "؟", "؛", "…", "\n"})

TokenCounter = Callable[[str], int]


class TokenTruncationWarning(UserWarning):
    """A whitespace-free stretch exceeded the budget and was cut."""


@dataclass(frozen=True)
class SegmentConfig:
    min_tokens: int = 30
    max_tokens: int = 150
    hard_cap: int = 512
    boundary_chars: frozenset[str] = DEFAULT_BOUNDARY_CHARS

    def __post_init__(self) -> None:
        if not (0 < self.min_tokens <= self.max_tokens <= self.hard_cap):
            raise ValueError(
                f"need 0 < min_tokens <= max_tokens <= hard_cap, got "
                f"({self.min_tokens}, {self.max_tokens}, {self.hard_cap})"
            )


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    text: str
    token_count: int
    label: Optional[str] = None


def _is_separator(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def tokenize_count(text: str) -> int:
    """Count maximal runs of non-separator characters (punctuation is not counted)."""
    count = 0
    in_token = False
    for ch in text:
        if _is_separator(ch):
            in_token = False
        elif not in_token:
            in_token = True
            count += 1
    return count


def split_boundaries(text: str, config: SegmentConfig | None = None) -> list[str]:
    """Split into raw sentence spans after boundary characters.

    A period between two digits never splits (decimal numbers), and a
    non-newline boundary only splits when followed by whitespace so the
    spans stay aligned to whitespace and jointly cover the text.
    """
    config = config or SegmentConfig()
    boundaries = config.boundary_chars
    spans: list[str] = []
    start = 0
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in boundaries:
            continue
        if ch == "\n":
            pass  # newline always ends a span
        else:
            if i + 1 < n and not text[i + 1].isspace():
                continue
            if ch == "." and 0 < i < n - 1 and text[i - 1].isdigit() and text[i + 1].isdigit():
                continue
        piece = text[start : i + 1].strip()
        if piece:
            spans.append(piece)
        start = i + 1
    tail = text[start:].strip()
    if tail:
        spans.append(tail)
    return spans


def _truncate_tokens(chunk: str, max_tokens: int) -> str:
    """Keep the prefix of a whitespace-free chunk covering its first max_tokens tokens."""
    count = 0
    in_token = False
    for pos, ch in enumerate(chunk):
        if _is_separator(ch):
            in_token = False
        elif not in_token:
            in_token = True
            count += 1
            if count > max_tokens:
                return chunk[:pos]
    return chunk


def _split_overlong(text: str, max_tokens: int, counter: TokenCounter) -> list[str]:
    """Split a span exceeding max_tokens at whitespace into balanced pieces."""
    chunks = text.split()
    counts = [counter(c) for c in chunks]
    total = sum(counts)
    if total <= max_tokens:
        return [text]
    n_pieces = math.ceil(total / max_tokens)
    target = math.ceil(total / n_pieces)
    pieces: list[str] = []
    cur: list[str] = []
    cur_count = 0
    for chunk, count in zip(chunks, counts):
        if count > max_tokens:
            warnings.warn(
                f"truncating a {count}-token whitespace-free stretch to {max_tokens} tokens",
                TokenTruncationWarning,
            )
            chunk = _truncate_tokens(chunk, max_tokens)
            count = max_tokens
        if cur and (cur_count >= target or cur_count + count > max_tokens):
            pieces.append(" ".join(cur))
            cur, cur_count = [], 0
        cur.append(chunk)
        cur_count += count
    if cur:
        pieces.append(" ".join(cur))
    return pieces


def segment(
    doc: Document,
    config: SegmentConfig | None = None,
    counter: TokenCounter = tokenize_count,
) -> list[Sentence]:
    """Segment a document into sentences within [min_tokens, max_tokens].

    Raw spans below min_tokens are merged forward; anything then exceeding
    max_tokens is re-split at whitespace. Only a trailing remainder (or a
    document shorter than min_tokens overall) may undershoot the minimum.
    """
    config = config or SegmentConfig()
    spans = split_boundaries(doc.text, config)
    if not spans:
        spans = [doc.text.strip()]

    merged: list[str] = []
    cur: list[str] = []
    cur_count = 0
    for span in spans:
        cur.append(span)
        cur_count += counter(span)
        if cur_count >= config.min_tokens:
            merged.append(" ".join(cur))
            cur, cur_count = [], 0
    if cur:
        merged.append(" ".join(cur))

    texts: list[str] = []
    for piece in merged:
        if counter(piece) > config.max_tokens:
            texts.extend(_split_overlong(piece, config.max_tokens, counter))
        else:
            texts.append(piece)

    return [
        Sentence(doc_id=doc.doc_id, index=i, text=t, token_count=counter(t), label=doc.label)
        for i, t in enumerate(texts)
    ]
