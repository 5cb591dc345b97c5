"""Schema ingestion: CSV/JSON parsing, refinement, canonical serialization.

Two file formats are understood:

* CSV — UTF-8, comma-separated, first row is the header.  Mandatory column
  ``name``; optional ``verbose_name``, ``description``, ``business_terms``
  (semicolon-joined), ``glossary_terms`` (semicolon-joined),
  ``dictionary_entry``; tier columns ``T1``, ``T2``, ... in ascending order.
* JSON — either a top-level array of row objects with the same field names
  (``path`` as an array of strings replaces the T-columns), or the canonical
  schema object this module writes.

Canonical JSON output has a fixed field order so that serialize -> parse ->
serialize is byte-identical.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Optional

from .model import ColumnMeta, SourceSchema, StandardEntry, StandardSchema, TierPath
from .tokens import TokenSeq, canonical_form, join_tokens, normalize_name  # noqa: F401  (re-exported)

_TIER_COLUMN = re.compile(r"^T(\d+)$")

_LIST_FIELDS = ("business_terms", "glossary_terms")
_TEXT_FIELDS = ("verbose_name", "description", "dictionary_entry")


class IngestError(ValueError):
    """A file could not be parsed in its declared format.

    ``row`` is the 1-based physical line number when the problem is local to
    one row.
    """

    def __init__(self, message: str, path: Optional[str] = None, row: Optional[int] = None):
        location = ""
        if path is not None:
            location += f"{path}: "
        if row is not None:
            location += f"row {row}: "
        super().__init__(location + message)
        self.path = path
        self.row = row


def _entry_id(ordinal: int) -> str:
    # Stable, diff-friendly ids: 1-based ordinal of first appearance.
    return f"e{ordinal:04d}"


def _infer_format(path: str | Path, format: Optional[str]) -> str:
    if format is not None:
        if format not in ("csv", "json"):
            raise IngestError(f"unknown format {format!r}", path=str(path))
        return format
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in ("csv", "json"):
        return suffix
    raise IngestError("cannot infer format from suffix; pass format='csv' or 'json'", path=str(path))


def _split_terms(cell: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in cell.split(";") if t.strip())


def _meta_from_csv_row(row: dict) -> ColumnMeta:
    def text(field: str) -> Optional[str]:
        value = (row.get(field) or "").strip()
        return value or None

    return ColumnMeta(
        name=(row.get("name") or "").strip(),
        verbose_name=text("verbose_name"),
        business_terms=_split_terms(row.get("business_terms") or ""),
        description=text("description"),
        glossary_terms=_split_terms(row.get("glossary_terms") or ""),
        dictionary_entry=text("dictionary_entry"),
    )


def _tier_columns(header: list[str], path: str) -> list[str]:
    indexed = sorted(
        (int(m.group(1)), col) for col in header if (m := _TIER_COLUMN.match(col))
    )
    for expected, (index, _) in enumerate(indexed, start=1):
        if index != expected:
            raise IngestError(
                f"tier columns must be contiguous starting at T1, got {[c for _, c in indexed]}",
                path=path,
            )
    return [col for _, col in indexed]


def _path_from_csv_row(row: dict, tier_cols: list[str]) -> TierPath:
    tiers: list[str] = []
    for col in tier_cols:
        cell = (row.get(col) or "").strip()
        if not cell:
            break  # a blank tier truncates the path
        tiers.append(cell)
    return tuple(tiers)


def _read_csv_rows(path: str | Path) -> tuple[list[str], list[tuple[int, dict]]]:
    try:
        handle = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(str(exc), path=str(path)) from exc
    with handle:
        reader = csv.DictReader(handle, restkey="_extra")
        if reader.fieldnames is None:
            raise IngestError("empty file", path=str(path))
        header = list(reader.fieldnames)
        if "name" not in header:
            raise IngestError("missing mandatory 'name' column", path=str(path))
        rows = []
        for row in reader:
            if row.get("_extra"):
                raise IngestError(
                    f"row has more cells than the header ({len(header)})",
                    path=str(path),
                    row=reader.line_num,
                )
            rows.append((reader.line_num, row))
    return header, rows


def _meta_from_json_obj(obj: dict, path: str, row: int) -> ColumnMeta:
    if not isinstance(obj, dict):
        raise IngestError("expected an object per row", path=path, row=row)
    name = obj.get("name")
    if not isinstance(name, str):
        raise IngestError("missing mandatory 'name' field", path=path, row=row)

    def text(field: str) -> Optional[str]:
        value = obj.get(field)
        if value is None:
            return None
        if not isinstance(value, str):
            raise IngestError(f"field {field!r} must be a string", path=path, row=row)
        return value or None

    def terms(field: str) -> tuple[str, ...]:
        value = obj.get(field)
        if value is None:
            return ()
        if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
            raise IngestError(f"field {field!r} must be an array of strings", path=path, row=row)
        return tuple(value)

    return ColumnMeta(
        name=name,
        verbose_name=text("verbose_name"),
        business_terms=terms("business_terms"),
        description=text("description"),
        glossary_terms=terms("glossary_terms"),
        dictionary_entry=text("dictionary_entry"),
    )


def _json_path(obj: dict, path: str, row: int) -> TierPath:
    value = obj.get("path")
    if value is None:
        return ()
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise IngestError("field 'path' must be an array of strings", path=path, row=row)
    return tuple(value)


def _load_json(path: str | Path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(str(exc), path=str(path)) from exc
    if not text.strip():
        raise IngestError("empty file", path=str(path))
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid JSON: {exc}", path=str(path), row=exc.lineno) from exc


def load_standard_schema(path: str | Path, format: Optional[str] = None) -> StandardSchema:
    """Parse a standard schema file; one entry per data row, ids by ordinal.

    Tier columns map to the entry's path in ascending order; a blank tier
    cell truncates the path.  Rows whose names are blank or duplicated are
    kept here and cleaned up by :func:`refine_schema`.
    """
    fmt = _infer_format(path, format)
    name = Path(path).stem
    if fmt == "csv":
        header, rows = _read_csv_rows(path)
        tier_cols = _tier_columns(header, str(path))
        entries = tuple(
            StandardEntry(
                id=_entry_id(i),
                meta=_meta_from_csv_row(row),
                path=_path_from_csv_row(row, tier_cols),
            )
            for i, (_, row) in enumerate(rows, start=1)
        )
        return StandardSchema(name=name, entries=entries)

    data = _load_json(path)
    if isinstance(data, dict) and "entries" in data:
        return schema_from_json_obj(data, path=str(path))
    if not isinstance(data, list):
        raise IngestError("expected a top-level array of row objects", path=str(path))
    entries = tuple(
        StandardEntry(
            id=_entry_id(i),
            meta=_meta_from_json_obj(obj, str(path), i),
            path=_json_path(obj, str(path), i),
        )
        for i, obj in enumerate(data, start=1)
    )
    return StandardSchema(name=name, entries=entries)


def load_source_schema(
    path: str | Path, format: Optional[str] = None, dataset_id: Optional[str] = None
) -> SourceSchema:
    """Parse a source schema file; only ``name`` is mandatory per row."""
    fmt = _infer_format(path, format)
    dataset = dataset_id or Path(path).stem
    if fmt == "csv":
        _, rows = _read_csv_rows(path)
        columns = []
        for line_num, row in rows:
            meta = _meta_from_csv_row(row)
            if not meta.name:
                raise IngestError("blank 'name' cell", path=str(path), row=line_num)
            columns.append(meta)
    else:
        data = _load_json(path)
        if not isinstance(data, list):
            raise IngestError("expected a top-level array of row objects", path=str(path))
        columns = []
        for i, obj in enumerate(data, start=1):
            meta = _meta_from_json_obj(obj, str(path), i)
            if not meta.name.strip():
                raise IngestError("blank 'name' field", path=str(path), row=i)
            columns.append(meta)
    if not columns:
        raise IngestError("no columns", path=str(path))
    return SourceSchema(dataset_id=dataset, columns=tuple(columns))


def refine_schema(schema: StandardSchema) -> StandardSchema:
    """Standardize and deduplicate a parsed standard schema.

    Entries whose names normalize to nothing are dropped as erroneous; among
    entries sharing the same normalized token sequence and the same tier
    path only the first-ingested survives.  Survivors keep their ids and are
    never otherwise mutated.  Idempotent.
    """
    survivors: list[StandardEntry] = []
    seen: set[tuple[TokenSeq, TierPath]] = set()
    for entry in schema.entries:
        tokens = entry.tokens
        if not tokens:
            continue
        key = (tokens, entry.path)
        if key in seen:
            continue
        seen.add(key)
        survivors.append(entry)
    return StandardSchema(name=schema.name, entries=tuple(survivors), normalized=True)


def _entry_to_obj(entry: StandardEntry) -> dict:
    return {
        "id": entry.id,
        "name": entry.meta.name,
        "verbose_name": entry.meta.verbose_name,
        "business_terms": list(entry.meta.business_terms),
        "description": entry.meta.description,
        "glossary_terms": list(entry.meta.glossary_terms),
        "dictionary_entry": entry.meta.dictionary_entry,
        "path": list(entry.path),
    }


def schema_to_json(schema: StandardSchema) -> str:
    """Canonical JSON: fixed field order, two-space indent, trailing newline."""
    payload = {
        "name": schema.name,
        "normalized": schema.normalized,
        "entries": [_entry_to_obj(e) for e in schema.entries],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def schema_from_json_obj(data: dict, path: str = "<json>") -> StandardSchema:
    entries = []
    raw_entries = data.get("entries")
    if not isinstance(raw_entries, list):
        raise IngestError("canonical schema object needs an 'entries' array", path=path)
    for i, obj in enumerate(raw_entries, start=1):
        meta = _meta_from_json_obj(obj, path, i)
        entry_id = obj.get("id")
        if not isinstance(entry_id, str) or not entry_id:
            raise IngestError("missing entry 'id'", path=path, row=i)
        entries.append(StandardEntry(id=entry_id, meta=meta, path=_json_path(obj, path, i)))
    return StandardSchema(
        name=str(data.get("name", "")),
        entries=tuple(entries),
        normalized=bool(data.get("normalized", False)),
    )


def schema_from_json(text: str) -> StandardSchema:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid JSON: {exc}", row=exc.lineno) from exc
    if not isinstance(data, dict):
        raise IngestError("expected a canonical schema object")
    return schema_from_json_obj(data)


def write_standard_schema(schema: StandardSchema, path: str | Path) -> None:
    Path(path).write_text(schema_to_json(schema), encoding="utf-8")


def source_schema_from_payload(data: dict) -> SourceSchema:
    """Build a source schema from a JSON payload (wire submissions)."""
    if not isinstance(data, dict):
        raise IngestError("expected an object with dataset_id and columns")
    dataset_id = data.get("dataset_id")
    if not isinstance(dataset_id, str) or not dataset_id:
        raise IngestError("missing 'dataset_id'")
    raw_columns = data.get("columns")
    if not isinstance(raw_columns, list) or not raw_columns:
        raise IngestError("'columns' must be a non-empty array")
    columns = []
    for i, obj in enumerate(raw_columns, start=1):
        meta = _meta_from_json_obj(obj, "<payload>", i)
        if not meta.name.strip():
            raise IngestError("blank 'name' field", path="<payload>", row=i)
        columns.append(meta)
    return SourceSchema(dataset_id=dataset_id, columns=tuple(columns))


def source_schema_to_payload(source: SourceSchema) -> dict:
    return {
        "dataset_id": source.dataset_id,
        "columns": [
            {
                "name": c.name,
                "verbose_name": c.verbose_name,
                "business_terms": list(c.business_terms),
                "description": c.description,
                "glossary_terms": list(c.glossary_terms),
                "dictionary_entry": c.dictionary_entry,
            }
            for c in source.columns
        ],
    }
