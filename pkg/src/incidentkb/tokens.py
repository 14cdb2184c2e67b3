"""Shared tokenizer.

Every component that counts, matches, or windows tokens (chunking, sparse
scoring, answer budgeting, text metrics) must use this module so their
token arithmetic agrees.
"""

from __future__ import annotations

import re

# Unicode word characters minus underscore; digits count as tokens.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# Identifier persisted in index manifests; bump when tokenization changes.
TOKENIZER_ID = "unicode-words-lower-v1"


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens, punctuation and underscores dropped."""
    return _TOKEN_RE.findall(text.lower())


def token_spans(text: str) -> list[tuple[int, int]]:
    """Character (start, end) spans of each token in the original text."""
    return [m.span() for m in _TOKEN_RE.finditer(text)]


def count_tokens(text: str) -> int:
    return len(_TOKEN_RE.findall(text))
