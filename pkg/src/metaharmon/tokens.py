"""Column-name normalization into canonical token sequences.

Every matcher in this package compares normalized forms, never raw names.
A token sequence is a tuple of lowercase ``[a-z0-9]`` strings; the canonical
comparison string re-joins the tokens with single spaces.
"""

from __future__ import annotations

import re

TokenSeq = tuple[str, ...]

_SEPARATORS = re.compile(r"[\s_\-.]+")
_CAMEL_BOUNDARY = re.compile(r"(?<=[a-z])(?=[A-Z])")
_NON_ALNUM = re.compile(r"[^a-z0-9]")


def normalize_name(raw: str) -> TokenSeq:
    """Normalize a raw column name into lowercase alphanumeric tokens.

    Splits on whitespace, underscores, hyphens, dots and lower-to-upper
    camelCase boundaries, lowercases everything, strips characters outside
    ``[a-z0-9]`` and drops fragments that end up empty.  Punctuation-only
    input yields an empty sequence.
    """
    tokens: list[str] = []
    for fragment in _SEPARATORS.split(raw):
        for piece in _CAMEL_BOUNDARY.split(fragment):
            token = _NON_ALNUM.sub("", piece.lower())
            if token:
                tokens.append(token)
    return tuple(tokens)


def canonical_form(raw: str) -> str:
    """Normalized tokens re-joined with single spaces (comparison form)."""
    return " ".join(normalize_name(raw))


def join_tokens(tokens: TokenSeq) -> str:
    return " ".join(tokens)
