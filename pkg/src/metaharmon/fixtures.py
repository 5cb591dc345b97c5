"""Bundled marine-litter fixture schema.

A hand-built standard schema of common beach-survey litter categories with
one to three ontology tiers.  Small enough for sub-second tests, rich enough
to exercise tier paths, meta fields, and fuzzy matching.
"""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

from .ingest import load_standard_schema, refine_schema
from .model import StandardSchema


def marine_litter_csv_path() -> Path:
    return Path(str(files("metaharmon").joinpath("data/marine_litter.csv")))


def marine_litter_schema() -> StandardSchema:
    """The fixture schema, refined and ready for matching."""
    return refine_schema(load_standard_schema(marine_litter_csv_path()))
