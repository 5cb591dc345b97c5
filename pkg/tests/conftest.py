"""Shared fixtures: the bundled litter schema and a small trained model."""

from __future__ import annotations

import pytest

from metaharmon import Hyperparams, train
from metaharmon.fixtures import marine_litter_schema
from metaharmon.textify import textify_schema


@pytest.fixture(scope="session")
def litter_schema():
    return marine_litter_schema()


@pytest.fixture(scope="session")
def litter_model(litter_schema):
    # negatives=2 keeps tiny-vocab training isotropic; see the embedding
    # module docstring for why high negative counts collapse small corpora.
    hyper = Hyperparams(dim=64, epochs=200, learning_rate=0.0075, negatives=2, seed=0)
    return train(textify_schema(litter_schema), hyper)
