"""Entity resolution over column names via Levenshtein distance.

Scores live on a 0-100 scale where 100 means exact match of the canonical
comparison strings.  A score strictly above the qualified-match threshold
(default 70) marks a qualified match.  Ties on equal scores are resolved by
a three-stage cascade: matching block key first, then longest common prefix
with the query, then lowest entry id.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .model import ColumnMeta, CrosswalkResult, DEFAULT_THRESHOLD, StandardSchema
from .tokens import TokenSeq, normalize_name

# The five descriptive meta-metadata fields that may join the comparison
# string, in canonical order.
META_FIELDS = ("verbose_name", "business_terms", "description", "glossary_terms", "dictionary_entry")


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character edits transforming ``a`` into ``b``."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)

    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a):
        current = [i + 1]
        append = current.append
        for j, cb in enumerate(b):
            append(min(previous[j + 1] + 1, current[j] + 1, previous[j] + (ca != cb)))
        previous = current
    return previous[-1]


def similarity_score(a: str, b: str) -> int:
    """0-100 similarity: max-length-normalized edit distance, rounded.

    ``round(100 * (1 - d / max(len(a), len(b))))`` with half-away-from-zero
    rounding, computed in exact integer arithmetic.  Two empty strings score
    100 by definition.
    """
    if not a and not b:
        return 100
    m = max(len(a), len(b))
    d = levenshtein(a, b)
    return (200 * (m - d) + m) // (2 * m)


def block_key(tokens: TokenSeq) -> str:
    """Blocking key: first character of each token, sorted, concatenated."""
    return "".join(sorted(t[0] for t in tokens))


def comparison_string(meta: ColumnMeta, use_meta_fields: frozenset[str] = frozenset()) -> str:
    """Canonical comparison form: normalized name, plus any selected
    descriptive fields' tokens appended in canonical field order."""
    tokens = list(normalize_name(meta.name))
    for field in META_FIELDS:
        if field not in use_meta_fields:
            continue
        value = getattr(meta, field)
        if value is None:
            continue
        if isinstance(value, str):
            tokens.extend(normalize_name(value))
        else:
            for term in value:
                tokens.extend(normalize_name(term))
    return " ".join(tokens)


@dataclass(frozen=True)
class MatchCandidate:
    entry_id: str
    score: int
    block_key: str


def _common_prefix_len(a: str, b: str) -> int:
    n = 0
    for ca, cb in zip(a, b):
        if ca != cb:
            break
        n += 1
    return n


@lru_cache(maxsize=16)
def _entry_strings(schema: StandardSchema, use_meta_fields: frozenset[str]) -> tuple[tuple[str, str, str], ...]:
    # (entry id, comparison string, block key) per entry; cached because
    # match_column is called once per source column over the same schema.
    return tuple(
        (e.id, comparison_string(e.meta, use_meta_fields), block_key(e.tokens))
        for e in schema.entries
    )


def rank_entries(
    query: ColumnMeta,
    schema: StandardSchema,
    use_meta_fields: frozenset[str] = frozenset(),
) -> list[MatchCandidate]:
    """Score the query against every entry, best first.

    Ordering: score descending, then block-key agreement with the query,
    then longest common prefix with the query string, then entry id.
    """
    query_string = comparison_string(query, use_meta_fields)
    query_block = block_key(normalize_name(query.name))

    scored = []
    for entry_id, entry_string, entry_block in _entry_strings(schema, use_meta_fields):
        score = similarity_score(query_string, entry_string)
        sort_key = (
            -score,
            0 if entry_block == query_block else 1,
            -_common_prefix_len(query_string, entry_string),
            entry_id,
        )
        scored.append((sort_key, MatchCandidate(entry_id, score, entry_block)))
    scored.sort(key=lambda pair: pair[0])
    return [candidate for _, candidate in scored]


def match_column(
    query: ColumnMeta,
    schema: StandardSchema,
    threshold: int = DEFAULT_THRESHOLD,
    k: int = 5,
    use_meta_fields: frozenset[str] = frozenset(),
) -> CrosswalkResult:
    """Resolve one source column against a refined standard schema.

    The best-scoring entry is always reported (confidence ``qualified`` when
    its score strictly exceeds the threshold, ``weak`` otherwise); only an
    empty schema yields an unmatched result.  ``alternates`` carries the next
    ``k - 1`` candidates under the same ordering.
    """
    if not schema.normalized:
        raise ValueError("schema must be refined (normalized=True) before matching")

    ranked = rank_entries(query, schema, use_meta_fields)
    if not ranked:
        return CrosswalkResult(
            source_column=query.name,
            matched_entry_id=None,
            predicted_path=(),
            score=0,
            method="none",
            confidence="unmatched",
        )

    best = ranked[0]
    entry = schema.entry(best.entry_id)
    return CrosswalkResult(
        source_column=query.name,
        matched_entry_id=best.entry_id,
        predicted_path=entry.path,
        score=best.score,
        method="levenshtein",
        confidence="qualified" if best.score > threshold else "weak",
        alternates=tuple((c.entry_id, c.score) for c in ranked[1:k]),
    )
