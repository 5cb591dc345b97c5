"""
Training token embeddings for schema retrieval
==============================================

Every schema entry becomes one sentence of prefixed tokens; a small
skip-gram model learns which names, tiers, and terms co-occur, and then
whole entries are retrieved by cosine similarity against a query.
"""

import tempfile
from pathlib import Path

from metaharmon import (
    ColumnMeta,
    Hyperparams,
    load_model,
    marine_litter_schema,
    nearest_entries,
    save_model,
    textify_schema,
    train,
)

schema = marine_litter_schema()
corpus = textify_schema(schema)

# One sentence per entry: name token, tier tokens, any glossary terms.
print("first three sentences:")
for sentence in corpus.sentences[:3]:
    print("  ", " ".join(sentence))

# Training is single-threaded and fully seeded, so this model is the same
# on every machine.  A few seconds for this 32-entry catalog.
hyper = Hyperparams(dim=64, epochs=200, learning_rate=0.0075, negatives=2, seed=0)
model = train(corpus, hyper)
print(f"\ntrained: {len(model.vocab)} tokens, dim={model.dim}")
print(f"loss {model.epoch_losses[0]:.4f} -> {model.epoch_losses[-1]:.4f} over {hyper.epochs} epochs")

# Retrieval: nearest entry vectors by cosine.  The top hit for a clean
# name is the entry itself.
for name in ("straw", "plastic bottle"):
    top = nearest_entries(ColumnMeta(name=name), model, schema, k=3)
    shown = ", ".join(f"{schema.entry(i).meta.name}({c:.2f})" for i, c in top)
    print(f"{name!r} -> {shown}")

# Misspelled queries fall back to any in-vocabulary token within one edit.
top = nearest_entries(ColumnMeta(name="strw"), model, schema, k=1)
print(f"'strw' resolves to -> {schema.entry(top[0][0]).meta.name!r}")

# Hopeless queries return nothing rather than guessing; callers then use
# the edit-distance matcher instead.
print("'zzqq' ->", nearest_entries(ColumnMeta(name="zzqq"), model, schema))

# Models persist as a small binary; the round trip is lossless.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "litter.bin"
    save_model(model, path)
    reloaded = load_model(path)
    print(f"\nsaved {path.stat().st_size} bytes; reloaded dim={reloaded.dim}")
