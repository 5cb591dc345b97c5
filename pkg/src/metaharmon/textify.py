"""Turn standard-schema rows into token sentences for embedding training.

Each entry becomes one sentence.  Cell values are emitted as whole-cell
tokens (multi-word values underscore-joined) so that ontology labels like
"soft plastics" stay atomic in the vocabulary, and every token carries a
column prefix so a name token can never collide with a tier token:

    name:used_plates t1:metal
    name:straw t1:plastics t2:soft_plastics term:drinking_straw

Token grammar: ``prefix ":" body`` with prefix in {name, t1..t8, term} and
body over ``[a-z0-9_]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .model import StandardEntry, StandardSchema
from .tokens import normalize_name

Sentence = tuple[str, ...]


def _cell_token(prefix: str, raw: str) -> str | None:
    tokens = normalize_name(raw)
    if not tokens:
        return None
    return f"{prefix}:{'_'.join(tokens)}"


def name_token(raw: str) -> str | None:
    """The token a raw column name contributes to a sentence or query."""
    return _cell_token("name", raw)


def textify_entry(entry: StandardEntry) -> Sentence:
    """One sentence per entry: name token, tier tokens, then term tokens.

    Tier indices are positional (1-based); a tier label that normalizes to
    nothing emits no token but does not shift later indices.  Empty optional
    fields emit nothing.
    """
    tokens: list[str] = []
    name = name_token(entry.meta.name)
    if name is None:
        raise ValueError(f"entry {entry.id} has no name tokens; refine the schema first")
    tokens.append(name)
    for i, label in enumerate(entry.path, start=1):
        tier = _cell_token(f"t{i}", label)
        if tier is not None:
            tokens.append(tier)
    for term in entry.meta.business_terms + entry.meta.glossary_terms:
        term_token = _cell_token("term", term)
        if term_token is not None:
            tokens.append(term_token)
    return tuple(tokens)


@dataclass(frozen=True)
class Corpus:
    """Textified schema: sentence i belongs to entry ``entry_ids[i]``."""

    sentences: tuple[Sentence, ...]
    entry_ids: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.sentences)


def textify_schema(schema: StandardSchema) -> Corpus:
    """Textify every entry, in entry order, keeping the reverse index."""
    if not schema.normalized:
        raise ValueError("schema must be refined (normalized=True) before textification")
    sentences = tuple(textify_entry(e) for e in schema.entries)
    entry_ids = tuple(e.id for e in schema.entries)
    return Corpus(sentences=sentences, entry_ids=entry_ids)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Dump one sentence per line, tokens space-separated, UTF-8, LF endings."""
    text = "".join(" ".join(sentence) + "\n" for sentence in corpus.sentences)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
