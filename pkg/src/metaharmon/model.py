"""Shared domain types for the harmonization pipeline.

All types are immutable after construction and safe to share across threads.
Construction is permissive: invalid data (an empty name, a duplicate id) is
representable so that :func:`validate_schema` can report it instead of the
constructor blowing up mid-ingest.  No I/O happens here; serialization lives
in :mod:`metaharmon.ingest`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

from .tokens import TokenSeq, normalize_name

# A tier path is ordered outermost-first: ("plastics", "soft plastics").
# The empty path is legal and means "no ontology assigned".
TierPath = tuple[str, ...]

MAX_TIER_DEPTH = 8

Method = Literal["levenshtein", "embedding", "classifier", "none"]
Confidence = Literal["qualified", "weak", "unmatched"]
Decision = Literal["accepted", "overridden"]

DEFAULT_THRESHOLD = 70


def _as_tuple(value) -> tuple:
    if isinstance(value, tuple):
        return value
    return tuple(value)


@dataclass(frozen=True)
class ColumnMeta:
    """Meta-metadata describing one column.

    ``name`` is the raw name as ingested; the descriptive fields (verbose
    name, business terms, description, glossary terms, dictionary entry) are
    optional and may be folded into the matchers' comparison string via the
    crosswalk strategy.
    """

    name: str
    verbose_name: Optional[str] = None
    business_terms: tuple[str, ...] = ()
    description: Optional[str] = None
    glossary_terms: tuple[str, ...] = ()
    dictionary_entry: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "business_terms", _as_tuple(self.business_terms))
        object.__setattr__(self, "glossary_terms", _as_tuple(self.glossary_terms))


@dataclass(frozen=True)
class StandardEntry:
    """One target-ontology entry: column meta-metadata plus its tier path."""

    id: str
    meta: ColumnMeta
    path: TierPath = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "path", _as_tuple(self.path))

    @property
    def tokens(self) -> TokenSeq:
        return normalize_name(self.meta.name)


@dataclass(frozen=True)
class StandardSchema:
    """The crosswalk target: a named collection of standard entries.

    ``normalized`` is set by refine; matchers require a refined schema.
    """

    name: str
    entries: tuple[StandardEntry, ...] = ()
    normalized: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _as_tuple(self.entries))

    def entry(self, entry_id: str) -> StandardEntry:
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise KeyError(entry_id)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class SourceSchema:
    """Column meta-metadata of one newly ingested dataset."""

    dataset_id: str
    columns: tuple[ColumnMeta, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", _as_tuple(self.columns))


@dataclass(frozen=True)
class CrosswalkResult:
    """Per-column prediction: matched entry, inferred path, score, method.

    Invariants: ``confidence == "qualified"`` iff the score strictly exceeds
    the qualified-match threshold; ``method == "none"`` iff no entry matched
    iff ``confidence == "unmatched"``; alternates are sorted by descending
    score with a deterministic tie order.
    """

    source_column: str
    matched_entry_id: Optional[str]
    predicted_path: TierPath
    score: float
    method: Method
    confidence: Confidence
    alternates: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "predicted_path", _as_tuple(self.predicted_path))
        object.__setattr__(self, "alternates", _as_tuple(self.alternates))


@dataclass(frozen=True)
class GroundTruthRecord:
    """One steward decision; the unit the feedback classifier trains on."""

    source_column: str
    dataset_id: str
    decided_entry_id: str
    decided_path: TierPath
    decision: Decision
    engine_suggestion: Optional[str] = None
    timestamp: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "decided_path", _as_tuple(self.decided_path))


def _meta_violations(entry_id: str, meta: ColumnMeta) -> list[str]:
    out = []
    if not meta.name.strip():
        out.append(f"empty name in entry {entry_id}")
    for field_name in ("business_terms", "glossary_terms"):
        values = getattr(meta, field_name)
        if any(not v for v in values):
            out.append(f"empty {field_name} value in entry {entry_id}")
        if len(set(values)) != len(values):
            out.append(f"duplicate {field_name} value in entry {entry_id}")
    return out


def _path_violations(entry_id: str, path: TierPath) -> list[str]:
    out = []
    if any(not tier for tier in path):
        out.append(f"empty tier label in entry {entry_id}")
    if len(path) > MAX_TIER_DEPTH:
        out.append(f"tier path deeper than {MAX_TIER_DEPTH} in entry {entry_id}")
    for a, b in zip(path, path[1:]):
        if a == b:
            out.append(f"identical adjacent tiers {a!r} in entry {entry_id}")
            break
    return out


def validate_schema(schema: StandardSchema) -> list[str]:
    """Check every type invariant; return violation descriptions.

    Total: never raises on well-typed input.  An empty list means the schema
    is valid.  Each violation names the offending entry id and the rule.
    """
    violations: list[str] = []

    seen_ids: set[str] = set()
    for entry in schema.entries:
        if entry.id in seen_ids:
            violations.append(f"duplicate id {entry.id}")
        seen_ids.add(entry.id)

    for entry in schema.entries:
        violations.extend(_meta_violations(entry.id, entry.meta))
        violations.extend(_path_violations(entry.id, entry.path))

    if schema.normalized:
        # A refined schema must hold no two entries with the same normalized
        # token sequence and the same tier path.
        seen_keys: dict[tuple[TokenSeq, TierPath], str] = {}
        for entry in schema.entries:
            key = (entry.tokens, entry.path)
            if key in seen_keys:
                violations.append(
                    f"duplicate normalized entry {entry.id} (same tokens and path as {seen_keys[key]})"
                )
            else:
                seen_keys[key] = entry.id

    return violations
