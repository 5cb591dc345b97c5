"""Token embeddings for nearest-record retrieval over the standard schema.

A two-matrix skip-gram model trained with negative sampling on the textified
corpus.  The window is sentence-wide: every ordered pair of distinct tokens
within a sentence is a positive example, which is what lets the vectors pick
up which cell values co-occur with which tiers.  Training is single-threaded
and fully seeded, so identical (corpus, hyperparams) give bit-identical
models.

Records are represented by mean-pooling their sentence's token vectors;
queries are matched against those per-entry vectors by cosine similarity,
with a spelling-tolerant fallback for out-of-vocabulary query tokens.

A note on frequency skew: tokens shared by many sentences (typically tier
labels) receive proportionally more gradient updates, so their norms grow
and they drift toward a common direction.  Past a corpus-dependent number
of epochs the pooled entry vectors become dominated by those shared
components and nearest-entry retrieval degrades.  Larger corpora therefore
want a wider, shorter schedule than the defaults; raising `dim` dilutes
the drift and fewer epochs stop before it accumulates.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .levmatch import levenshtein
from .model import ColumnMeta, StandardSchema
from .textify import Corpus, Sentence, name_token

MODEL_MAGIC = b"MHARM1"

_LOGIT_CLAMP = 30.0
_NOISE_POWER = 0.75


@dataclass(frozen=True)
class Hyperparams:
    """Training knobs.  The learning rate decays linearly across epochs."""

    dim: int = 64
    epochs: int = 200
    learning_rate: float = 0.025
    learning_rate_min: float = 0.0001
    negatives: int = 5
    min_count: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")


@dataclass
class EmbeddingModel:
    """Trained vectors plus everything needed to answer nearest-record queries.

    ``output_vectors`` and ``hyper`` exist only on freshly trained models;
    persistence keeps the query-side state (vocab, input vectors, per-entry
    vectors).
    """

    dim: int
    vocab: dict[str, int]
    input_vectors: np.ndarray
    entry_vectors: dict[str, np.ndarray]
    output_vectors: Optional[np.ndarray] = None
    hyper: Optional[Hyperparams] = None
    epoch_losses: tuple[float, ...] = ()

    def vector(self, token: str) -> Optional[np.ndarray]:
        index = self.vocab.get(token)
        if index is None:
            return None
        return self.input_vectors[index]


def build_vocab(corpus: Sequence[Sentence], min_count: int = 1) -> tuple[dict[str, int], dict[str, int]]:
    """Index tokens with count >= min_count in first-appearance order.

    Returns (vocab, unigram counts of the kept tokens).
    """
    if not corpus:
        raise ValueError("empty corpus")
    counts: dict[str, int] = {}
    for sentence in corpus:
        for token in sentence:
            counts[token] = counts.get(token, 0) + 1
    vocab: dict[str, int] = {}
    kept_counts: dict[str, int] = {}
    for sentence in corpus:
        for token in sentence:
            if token in vocab or counts[token] < min_count:
                continue
            vocab[token] = len(vocab)
            kept_counts[token] = counts[token]
    return vocab, kept_counts


def _sigmoid(logits: np.ndarray) -> np.ndarray:
    clipped = np.clip(logits, -_LOGIT_CLAMP, _LOGIT_CLAMP)
    return 1.0 / (1.0 + np.exp(-clipped))


def _positive_pairs(sentences: Sequence[Sentence], vocab: dict[str, int]) -> tuple[np.ndarray, np.ndarray]:
    centers: list[int] = []
    contexts: list[int] = []
    for sentence in sentences:
        indices = [vocab[t] for t in sentence if t in vocab]
        for a in indices:
            for b in indices:
                if a != b:
                    centers.append(a)
                    contexts.append(b)
    return np.asarray(centers, dtype=np.intp), np.asarray(contexts, dtype=np.intp)


def train(corpus: Union[Corpus, Sequence[Sentence]], hyper: Hyperparams) -> EmbeddingModel:
    """Skip-gram/negative-sampling training by plain SGD.

    Noise tokens come from the unigram distribution smoothed to the 0.75
    power.  Positive pairs never pair a token with itself, so a drawn
    negative equal to the center token is skipped for the same reason; a
    draw that hits the context token stays, where it softly caps how far
    that pair's alignment can grow.  The pair visiting order is reshuffled
    every epoch.  The per-epoch loss is evaluated after each epoch against
    one fixed noise sample drawn up front, so the trace tracks model
    movement instead of the noise redraws.  All randomness flows from
    ``hyper.seed``.  Raises when the corpus is empty or leaves nothing to
    contrast (fewer than two vocabulary tokens, or no sentence with two
    distinct in-vocabulary tokens).
    """
    if isinstance(corpus, Corpus):
        sentences: Sequence[Sentence] = corpus.sentences
        entry_ids: tuple[str, ...] = corpus.entry_ids
    else:
        sentences = tuple(corpus)
        entry_ids = ()

    vocab, counts = build_vocab(sentences, hyper.min_count)
    if len(vocab) < 2:
        raise ValueError("nothing to contrast")
    centers, contexts = _positive_pairs(sentences, vocab)
    if centers.size == 0:
        raise ValueError("nothing to contrast")

    dim = hyper.dim
    vocab_size = len(vocab)
    rng = np.random.default_rng(np.uint64(hyper.seed))
    bound = 0.5 / dim
    input_vectors = rng.uniform(-bound, bound, size=(vocab_size, dim))
    output_vectors = rng.uniform(-bound, bound, size=(vocab_size, dim))

    freq = np.array([counts[t] for t in vocab], dtype=np.float64) ** _NOISE_POWER
    noise_cdf = np.cumsum(freq / freq.sum())

    n_pairs = centers.size
    labels = np.zeros(hyper.negatives + 1)
    labels[0] = 1.0

    probe_negatives = np.searchsorted(noise_cdf, rng.random((n_pairs, hyper.negatives)))
    probe_mask = probe_negatives != centers[:, None]

    epoch_losses: list[float] = []
    for epoch in range(hyper.epochs):
        if hyper.epochs > 1:
            frac = epoch / (hyper.epochs - 1)
            lr = hyper.learning_rate + (hyper.learning_rate_min - hyper.learning_rate) * frac
        else:
            lr = hyper.learning_rate
        negatives = np.searchsorted(noise_cdf, rng.random((n_pairs, hyper.negatives)))
        order = rng.permutation(n_pairs)

        for p in order:
            center = centers[p]
            context = contexts[p]
            rows = np.empty(hyper.negatives + 1, dtype=np.intp)
            rows[0] = context
            rows[1:] = negatives[p]
            keep = np.empty(hyper.negatives + 1, dtype=bool)
            keep[0] = True
            keep[1:] = rows[1:] != center
            rows = rows[keep]
            row_labels = labels[keep]

            center_vec = input_vectors[center]
            out = output_vectors[rows]
            sig = _sigmoid(out @ center_vec)

            grad = (sig - row_labels) * lr
            np.add.at(output_vectors, rows, -grad[:, None] * center_vec)
            input_vectors[center] = center_vec - grad @ out

        center_vecs = input_vectors[centers]
        pos_sig = _sigmoid(np.einsum("ij,ij->i", output_vectors[contexts], center_vecs))
        neg_sig = _sigmoid(np.einsum("ijk,ik->ij", output_vectors[probe_negatives], center_vecs))
        loss = -np.log(pos_sig) - (np.log1p(-neg_sig) * probe_mask).sum(axis=1)
        epoch_losses.append(float(loss.mean()))

    entry_vectors: dict[str, np.ndarray] = {}
    if entry_ids:
        for entry_id, sentence in zip(entry_ids, sentences):
            vec = entity_vector_from_matrix(sentence, vocab, input_vectors)
            if vec is None:
                raise ValueError(f"entry {entry_id} has no in-vocabulary tokens")
            entry_vectors[entry_id] = vec

    return EmbeddingModel(
        dim=dim,
        vocab=vocab,
        input_vectors=input_vectors,
        entry_vectors=entry_vectors,
        output_vectors=output_vectors,
        hyper=hyper,
        epoch_losses=tuple(epoch_losses),
    )


def entity_vector_from_matrix(
    tokens: Sequence[str], vocab: dict[str, int], input_vectors: np.ndarray
) -> Optional[np.ndarray]:
    indices = [vocab[t] for t in tokens if t in vocab]
    if not indices:
        return None
    return input_vectors[indices].mean(axis=0)


def entity_vector(tokens: Sequence[str], model: EmbeddingModel) -> Optional[np.ndarray]:
    """Mean of the in-vocabulary tokens' input vectors; None when all are OOV."""
    return entity_vector_from_matrix(tokens, model.vocab, model.input_vectors)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    denom = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denom == 0.0:
        return 0.0
    return float(np.dot(a, b)) / denom


def _token_body(token: str) -> str:
    _, _, body = token.partition(":")
    return body if body else token


def _resolve_oov_token(token: str, model: EmbeddingModel) -> Optional[str]:
    # Spelling-tolerant fallback: adopt a vocabulary token whose body is
    # within edit distance 1 of the query token's body, but only when that
    # body is unambiguous.  Prefer name: tokens among equal bodies.
    body = _token_body(token)
    if not body:
        return None
    by_body: dict[str, str] = {}
    for candidate in model.vocab:
        candidate_body = _token_body(candidate)
        if candidate_body in by_body:
            preferred = by_body[candidate_body]
            if candidate.startswith("name:") and not preferred.startswith("name:"):
                by_body[candidate_body] = candidate
            continue
        by_body[candidate_body] = candidate
    close = [b for b in by_body if abs(len(b) - len(body)) <= 1 and levenshtein(body, b) <= 1]
    if len(close) != 1:
        return None
    return by_body[close[0]]


def nearest_entries(
    query: ColumnMeta, model: EmbeddingModel, schema: StandardSchema, k: int = 5
) -> list[tuple[str, float]]:
    """Standard-schema records closest to the query, by cosine similarity.

    The query's name becomes a textify-grammar ``name:`` token; if that is
    out of vocabulary, each token retries via the distance-1 body fallback so
    that misspelled inputs still resolve.  Returns [] when the query stays
    out of vocabulary, in which case callers fall back to the edit-distance
    matcher.
    """
    token = name_token(query.name)
    query_tokens = [token] if token is not None else []
    vec = entity_vector(query_tokens, model)
    if vec is None:
        resolved = [r for t in query_tokens if (r := _resolve_oov_token(t, model)) is not None]
        vec = entity_vector(resolved, model)
    if vec is None:
        return []

    missing = [e.id for e in schema.entries if e.id not in model.entry_vectors]
    if missing:
        raise ValueError(f"model was not trained on this schema (missing entries {missing[:3]}...)")

    scored = [(e.id, cosine(vec, model.entry_vectors[e.id])) for e in schema.entries]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


def save_model(model: EmbeddingModel, path: str | Path) -> None:
    """Binary persistence: magic, dim, vocab, input vectors, entry vectors.

    Float64 throughout, so a write/read round trip is lossless.
    """
    with open(path, "wb") as handle:
        handle.write(MODEL_MAGIC)
        handle.write(struct.pack("<III", model.dim, len(model.vocab), len(model.entry_vectors)))
        for token in model.vocab:
            encoded = token.encode("utf-8")
            handle.write(struct.pack("<H", len(encoded)))
            handle.write(encoded)
        handle.write(np.ascontiguousarray(model.input_vectors, dtype="<f8").tobytes())
        for entry_id, vec in model.entry_vectors.items():
            encoded = entry_id.encode("utf-8")
            handle.write(struct.pack("<H", len(encoded)))
            handle.write(encoded)
            handle.write(np.ascontiguousarray(vec, dtype="<f8").tobytes())


def load_model(path: str | Path) -> EmbeddingModel:
    data = Path(path).read_bytes()
    if data[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ValueError(f"not a model file (bad magic): {path}")
    offset = len(MODEL_MAGIC)
    dim, vocab_size, n_entries = struct.unpack_from("<III", data, offset)
    offset += struct.calcsize("<III")

    vocab: dict[str, int] = {}
    for index in range(vocab_size):
        (length,) = struct.unpack_from("<H", data, offset)
        offset += 2
        vocab[data[offset : offset + length].decode("utf-8")] = index
        offset += length

    matrix_bytes = vocab_size * dim * 8
    input_vectors = np.frombuffer(data[offset : offset + matrix_bytes], dtype="<f8").reshape(
        vocab_size, dim
    ).copy()
    offset += matrix_bytes

    entry_vectors: dict[str, np.ndarray] = {}
    for _ in range(n_entries):
        (length,) = struct.unpack_from("<H", data, offset)
        offset += 2
        entry_id = data[offset : offset + length].decode("utf-8")
        offset += length
        entry_vectors[entry_id] = np.frombuffer(data[offset : offset + dim * 8], dtype="<f8").copy()
        offset += dim * 8

    return EmbeddingModel(
        dim=dim, vocab=vocab, input_vectors=input_vectors, entry_vectors=entry_vectors
    )
