"""Shared text utilities: word tokenization and sentence splitting.

The tokenizer is intentionally simple and deterministic: words are
alphanumeric runs (internal apostrophes allowed), everything else
non-whitespace is a punctuation token. Punctuation tokens act as
boundaries for multi-word phrase matching.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:'[A-Za-z0-9]+)*|[^\sA-Za-z0-9]")

_SENTENCE_END_RE = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9\"'(])")


@dataclass(frozen=True)
class Token:
    """A token with its character span in the source text."""

    text: str
    start: int
    end: int
    is_word: bool


def tokenize(text: str) -> list[Token]:
    """Split text into word and punctuation tokens with character spans."""
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        piece = m.group(0)
        tokens.append(Token(piece, m.start(), m.end(), piece[0].isalnum()))
    return tokens


def word_tokens(text: str) -> list[str]:
    """Lowercased word tokens only (punctuation dropped)."""
    return [t.text.lower() for t in tokenize(text) if t.is_word]


def split_sentences(text: str) -> list[str]:
    """Split a description into sentences.

    Sentences end at ./!/? followed by whitespace and an upper-case or
    numeric start. Good enough for requirement descriptions; no attempt
    is made to handle abbreviations.
    """
    parts = [p.strip() for p in _SENTENCE_END_RE.split(text)]
    return [p for p in parts if p]
