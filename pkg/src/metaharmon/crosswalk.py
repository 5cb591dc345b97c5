"""The prediction engine: matcher orchestration and ontology assignment.

Three modes: pure edit-distance matching, pure embedding retrieval, or the
hybrid that tries embeddings first and falls back to (and competes against)
the edit-distance matcher.  Embedding cosines are mapped onto the same 0-100
scale as the edit-distance scores so one threshold governs both.

When steward decisions exist, a nearest-centroid classifier over hashed
character trigrams learns from them and overrides either matcher whenever
its own mapped score is strictly higher.  The predicted tier path is always
copied verbatim from the matched standard entry, never synthesized.
"""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .embedding import EmbeddingModel, nearest_entries
from .levmatch import META_FIELDS, match_column
from .model import (
    ColumnMeta,
    CrosswalkResult,
    DEFAULT_THRESHOLD,
    GroundTruthRecord,
    SourceSchema,
    StandardSchema,
    TierPath,
)
from .tokens import canonical_form

Mode = Literal["levenshtein", "embedding", "hybrid"]

FEATURE_DIM = 4096


@dataclass(frozen=True)
class Strategy:
    """Which matcher(s) to run and how to band the results.

    ``use_meta_fields`` selects which descriptive fields join the comparison
    string (off by default: names only).  ``strict`` turns below-threshold
    results into unmatched ones instead of best-effort weak matches.
    """

    mode: Mode = "levenshtein"
    threshold: int = DEFAULT_THRESHOLD
    k: int = 5
    use_meta_fields: frozenset[str] = field(default_factory=frozenset)
    strict: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.threshold <= 100:
            raise ValueError("threshold must be in [0, 100]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        fields = frozenset(self.use_meta_fields)
        unknown = fields - set(META_FIELDS)
        if unknown:
            raise ValueError(f"unknown meta fields {sorted(unknown)}; choose from {list(META_FIELDS)}")
        object.__setattr__(self, "use_meta_fields", fields)


def cosine_to_score(cos: float) -> int:
    """Affine map of cosine similarity onto the 0-100 match scale."""
    return int(math.floor(100.0 * (cos + 1.0) / 2.0 + 0.5))


class ConflictingGroundTruth(ValueError):
    """The decision log labels the same source string with different entries."""


def trigram_features(text: str) -> np.ndarray:
    """L2-normalized hashed character-trigram counts of a canonical string."""
    vec = np.zeros(FEATURE_DIM)
    grams = [text[i : i + 3] for i in range(len(text) - 2)] if len(text) >= 3 else ([text] if text else [])
    for gram in grams:
        vec[zlib.crc32(gram.encode("utf-8")) % FEATURE_DIM] += 1.0
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


@dataclass
class Classifier:
    """Nearest-centroid text classifier trained on steward ground truth."""

    entry_ids: tuple[str, ...]
    centroids: np.ndarray  # (len(entry_ids), FEATURE_DIM), rows L2-normalized

    def __len__(self) -> int:
        return len(self.entry_ids)


def train_classifier(records: list[GroundTruthRecord], schema: StandardSchema) -> Classifier:
    """Per decided entry, centroid = L2-normalized mean of its records' features.

    Features come from the normalized form of each record's source column.
    Entries with no records get no centroid.  Raises on an empty record list,
    on records pointing at unknown entries, and on contradictory records
    (identical normalized strings labeled with different entries).
    """
    if not records:
        raise ValueError("no ground-truth records to train on")
    known_ids = {e.id for e in schema.entries}

    labeled: dict[str, GroundTruthRecord] = {}
    by_entry: dict[str, list[np.ndarray]] = {}
    for record in records:
        if record.decided_entry_id not in known_ids:
            raise ValueError(f"record for {record.source_column!r} names unknown entry {record.decided_entry_id}")
        text = canonical_form(record.source_column)
        earlier = labeled.get(text)
        if earlier is not None and earlier.decided_entry_id != record.decided_entry_id:
            raise ConflictingGroundTruth(f"conflicting ground truth: {earlier} vs {record}")
        labeled.setdefault(text, record)
        features = trigram_features(text)
        if not features.any():
            continue  # nothing to learn from a featureless string
        by_entry.setdefault(record.decided_entry_id, []).append(features)

    entry_ids = tuple(sorted(by_entry))
    centroids = np.zeros((len(entry_ids), FEATURE_DIM))
    for row, entry_id in enumerate(entry_ids):
        mean = np.mean(by_entry[entry_id], axis=0)
        centroids[row] = mean / np.linalg.norm(mean)
    return Classifier(entry_ids=entry_ids, centroids=centroids)


def classify(query: ColumnMeta, clf: Classifier) -> Optional[tuple[str, float]]:
    """Nearest centroid by cosine; ties go to the lowest entry id.

    Returns None when the query yields an all-zero feature vector.
    """
    features = trigram_features(canonical_form(query.name))
    if not features.any() or len(clf.entry_ids) == 0:
        return None
    cosines = clf.centroids @ features
    best = int(np.argmax(cosines))  # first occurrence wins: ids are sorted ascending
    return clf.entry_ids[best], float(cosines[best])


def _unmatched(query: ColumnMeta) -> CrosswalkResult:
    return CrosswalkResult(
        source_column=query.name,
        matched_entry_id=None,
        predicted_path=(),
        score=0,
        method="none",
        confidence="unmatched",
    )


def _embedding_result(
    query: ColumnMeta, schema: StandardSchema, model: EmbeddingModel, strategy: Strategy
) -> CrosswalkResult:
    neighbors = nearest_entries(query, model, schema, strategy.k)
    if not neighbors:
        return _unmatched(query)
    mapped = [(entry_id, cosine_to_score(cos)) for entry_id, cos in neighbors]
    best_id, best_score = mapped[0]
    return CrosswalkResult(
        source_column=query.name,
        matched_entry_id=best_id,
        predicted_path=schema.entry(best_id).path,
        score=best_score,
        method="embedding",
        confidence="qualified" if best_score > strategy.threshold else "weak",
        alternates=tuple(mapped[1:]),
    )


def _apply_classifier(
    query: ColumnMeta, schema: StandardSchema, clf: Classifier, result: CrosswalkResult, strategy: Strategy
) -> CrosswalkResult:
    hit = classify(query, clf)
    if hit is None:
        return result
    entry_id, cos = hit
    mapped = cosine_to_score(cos)
    if mapped <= result.score:
        return result
    # Keep the displaced engine suggestion at the head of the alternates.
    alternates: list[tuple[str, float]] = []
    if result.matched_entry_id is not None:
        alternates.append((result.matched_entry_id, result.score))
    alternates.extend(result.alternates)
    alternates = [a for a in alternates if a[0] != entry_id][: strategy.k - 1]
    return CrosswalkResult(
        source_column=query.name,
        matched_entry_id=entry_id,
        predicted_path=schema.entry(entry_id).path,
        score=mapped,
        method="classifier",
        confidence="qualified" if mapped > strategy.threshold else "weak",
        alternates=tuple(alternates),
    )


def crosswalk_column(
    query: ColumnMeta,
    schema: StandardSchema,
    model: Optional[EmbeddingModel] = None,
    clf: Optional[Classifier] = None,
    strategy: Strategy = Strategy(),
) -> CrosswalkResult:
    """Predict the standard entry (and thereby the tier path) for one column.

    Hybrid mode runs the embedding retriever first and consults the
    edit-distance matcher whenever retrieval comes back empty or below the
    threshold, keeping whichever scores higher (the edit-distance result on
    a tie).  A trained classifier overrides either matcher when its mapped
    score is strictly higher.
    """
    if strategy.mode in ("embedding", "hybrid") and model is None:
        raise ValueError(f"mode {strategy.mode!r} requires an embedding model")

    if strategy.mode == "levenshtein":
        result = match_column(query, schema, strategy.threshold, strategy.k, strategy.use_meta_fields)
    elif strategy.mode == "embedding":
        result = _embedding_result(query, schema, model, strategy)
    else:
        result = _embedding_result(query, schema, model, strategy)
        if result.matched_entry_id is None or result.score <= strategy.threshold:
            lev = match_column(query, schema, strategy.threshold, strategy.k, strategy.use_meta_fields)
            if lev.score >= result.score or result.matched_entry_id is None:
                result = lev

    if clf is not None:
        result = _apply_classifier(query, schema, clf, result, strategy)

    if strategy.strict and result.confidence == "weak":
        return _unmatched(query)
    return result


def crosswalk_schema(
    source: SourceSchema,
    schema: StandardSchema,
    model: Optional[EmbeddingModel] = None,
    clf: Optional[Classifier] = None,
    strategy: Strategy = Strategy(),
) -> list[CrosswalkResult]:
    """One result per source column, in input order, each column independent."""
    return [crosswalk_column(c, schema, model, clf, strategy) for c in source.columns]


def infer_ontology(result: CrosswalkResult, schema: StandardSchema) -> TierPath:
    """The matched entry's tier path, copied; empty for unmatched results."""
    if result.matched_entry_id is None:
        return ()
    return schema.entry(result.matched_entry_id).path


RESULT_COLUMNS = ("source_column", "matched_name", "matched_id", "path", "score", "method", "confidence")


def results_to_rows(results: list[CrosswalkResult], schema: StandardSchema) -> list[dict]:
    rows = []
    for r in results:
        matched_name = "" if r.matched_entry_id is None else schema.entry(r.matched_entry_id).meta.name
        rows.append(
            {
                "source_column": r.source_column,
                "matched_name": matched_name,
                "matched_id": r.matched_entry_id or "",
                "path": "|".join(r.predicted_path),
                "score": r.score,
                "method": r.method,
                "confidence": r.confidence,
            }
        )
    return rows


def results_to_csv(results: list[CrosswalkResult], schema: StandardSchema) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(results_to_rows(results, schema))
    return buffer.getvalue()


def results_to_json(results: list[CrosswalkResult], schema: StandardSchema) -> str:
    return json.dumps(results_to_rows(results, schema), ensure_ascii=False, indent=2) + "\n"


def strategy_from_payload(data: dict) -> Strategy:
    """Build a Strategy from a JSON object, validating field by field."""
    if not isinstance(data, dict):
        raise ValueError("strategy: expected an object")
    mode = data.get("mode", "levenshtein")
    if mode not in ("levenshtein", "embedding", "hybrid"):
        raise ValueError(f"strategy.mode: unknown mode {mode!r}")
    threshold = data.get("threshold", DEFAULT_THRESHOLD)
    if not isinstance(threshold, int) or isinstance(threshold, bool):
        raise ValueError("strategy.threshold: expected an integer")
    k = data.get("k", 5)
    if not isinstance(k, int) or isinstance(k, bool):
        raise ValueError("strategy.k: expected an integer")
    fields = data.get("use_meta_fields", [])
    if not isinstance(fields, list) or any(not isinstance(f, str) for f in fields):
        raise ValueError("strategy.use_meta_fields: expected an array of field names")
    strict = data.get("strict", False)
    if not isinstance(strict, bool):
        raise ValueError("strategy.strict: expected a boolean")
    try:
        return Strategy(mode=mode, threshold=threshold, k=k, use_meta_fields=frozenset(fields), strict=strict)
    except ValueError as exc:
        raise ValueError(f"strategy: {exc}") from exc
