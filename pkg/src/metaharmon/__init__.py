"""Metadata harmonization: crosswalk source schemas onto a standard schema.

The pipeline in one breath: ingest and refine a standard schema, match each
source column against it by edit-distance scoring and/or trained token
embeddings, copy the matched entry's ontology tier path onto the column, and
fold steward corrections back in through a nearest-centroid classifier.
"""

from .crosswalk import (
    Classifier,
    ConflictingGroundTruth,
    Strategy,
    classify,
    cosine_to_score,
    crosswalk_column,
    crosswalk_schema,
    infer_ontology,
    results_to_csv,
    results_to_json,
    train_classifier,
)
from .embedding import (
    EmbeddingModel,
    Hyperparams,
    cosine,
    load_model,
    nearest_entries,
    save_model,
    train,
)
from .evaluation import (
    EvalReport,
    PerturbationSpec,
    evaluate,
    format_report,
    generate_benchmark,
    synthetic_standard_schema,
)
from .fixtures import marine_litter_schema
from .ingest import (
    IngestError,
    load_source_schema,
    load_standard_schema,
    refine_schema,
    schema_from_json,
    schema_to_json,
    write_standard_schema,
)
from .levmatch import block_key, levenshtein, match_column, similarity_score
from .model import (
    ColumnMeta,
    CrosswalkResult,
    GroundTruthRecord,
    SourceSchema,
    StandardEntry,
    StandardSchema,
    TierPath,
    validate_schema,
)
from .textify import Corpus, textify_entry, textify_schema
from .tokens import canonical_form, normalize_name

__version__ = "0.1.0"

__all__ = [
    "Classifier",
    "ColumnMeta",
    "ConflictingGroundTruth",
    "Corpus",
    "CrosswalkResult",
    "EmbeddingModel",
    "EvalReport",
    "GroundTruthRecord",
    "Hyperparams",
    "IngestError",
    "PerturbationSpec",
    "SourceSchema",
    "StandardEntry",
    "StandardSchema",
    "Strategy",
    "TierPath",
    "block_key",
    "canonical_form",
    "classify",
    "cosine",
    "cosine_to_score",
    "crosswalk_column",
    "crosswalk_schema",
    "evaluate",
    "format_report",
    "generate_benchmark",
    "infer_ontology",
    "levenshtein",
    "load_model",
    "load_source_schema",
    "load_standard_schema",
    "marine_litter_schema",
    "match_column",
    "nearest_entries",
    "normalize_name",
    "refine_schema",
    "results_to_csv",
    "results_to_json",
    "save_model",
    "schema_from_json",
    "schema_to_json",
    "similarity_score",
    "synthetic_standard_schema",
    "textify_entry",
    "textify_schema",
    "train",
    "train_classifier",
    "validate_schema",
    "write_standard_schema",
]
