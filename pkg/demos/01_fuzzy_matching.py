"""
Fuzzy column matching with edit-distance scores
===============================================

Match messy source column names against a curated standard schema using
normalized Levenshtein similarity, and watch how the qualification
threshold separates confident matches from best-effort guesses.
"""

from metaharmon import (
    ColumnMeta,
    levenshtein,
    marine_litter_schema,
    match_column,
    similarity_score,
)

# Raw edit distance counts single-character inserts, deletes, substitutes.
print("levenshtein('straw', 'straws') =", levenshtein("straw", "straws"))
print("levenshtein('plates', 'pilates') =", levenshtein("plates", "pilates"))

# Scores normalize by the longer string onto 0-100; 100 is an exact match.
for a, b in [("straw", "straw"), ("straw", "straws"), ("straw", "strategy")]:
    print(f"similarity_score({a!r}, {b!r}) = {similarity_score(a, b)}")

# The bundled schema is a small beach-litter catalog with tier paths.
schema = marine_litter_schema()
print(f"\nstandard schema: {len(schema.entries)} entries, e.g.")
for entry in schema.entries[:3]:
    print(f"  {entry.id}  {entry.meta.name!r}  path={'/'.join(entry.path)}")

# A close name qualifies: score strictly above the threshold (default 70).
result = match_column(ColumnMeta(name="Plastic Bags"), schema)
print(f"\n'Plastic Bags' -> {result.matched_entry_id} score={result.score} {result.confidence}")
print("  inferred path:", "/".join(result.predicted_path))

# A distant name still gets a best-effort answer, flagged weak.
result = match_column(ColumnMeta(name="mystery debris"), schema)
print(f"'mystery debris' -> {result.matched_entry_id} score={result.score} {result.confidence}")

# Runners-up ride along so a reviewer can see what almost won.
result = match_column(ColumnMeta(name="fishing nets"), schema, k=3)
print(f"'fishing nets' -> {result.matched_entry_id}, alternates {list(result.alternates)}")

# Descriptive fields can join the comparison when names alone mislead:
# by name alone 'carrier bag' lands on 'paper bag', but folding in the
# source's business terms pulls it over to 'plastic bag'.
query = ColumnMeta(name="carrier bag", business_terms=("plastic bag",))
by_name = match_column(query, schema)
with_terms = match_column(query, schema, use_meta_fields=frozenset({"business_terms"}))
print(f"'carrier bag' by name only -> {schema.entry(by_name.matched_entry_id).meta.name!r}")
print(f"'carrier bag' + business terms -> {schema.entry(with_terms.matched_entry_id).meta.name!r}")
