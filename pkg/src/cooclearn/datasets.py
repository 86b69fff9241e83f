"""Synthetic corpora with known structure, for tests and demos."""

from __future__ import annotations

import numpy as np

from .corpus import Corpus
from .utils import substream


def make_planted_pairs(
    n_pairs: int = 50,
    n_records: int = 10_000,
    n_noise: int = 3,
    seed: int = 0,
) -> Corpus:
    """Corpus of ``2 * n_pairs`` items with a planted partner structure.

    Items ``2p`` and ``2p + 1`` form pair ``p``. Every record holds one full
    pair chosen uniformly plus ``n_noise`` items drawn uniformly from the
    whole item range (collisions collapse). Partners are perfectly
    predictive of each other while marginal item frequencies stay uniform by
    symmetry, so context-aware models can solve masked prediction and
    popularity models cannot.
    """
    n_items = 2 * n_pairs
    rng = substream(seed, "init")
    records = []
    for _ in range(n_records):
        p = int(rng.integers(n_pairs))
        noise = rng.integers(0, n_items, size=n_noise)
        records.append(np.unique(np.concatenate([[2 * p, 2 * p + 1], noise])))
    return Corpus(n_items, records)


def make_bernoulli(
    occurrence_probs,
    n_records: int = 2000,
    seed: int = 0,
) -> Corpus:
    """Independent-items corpus: item ``i`` joins each record with its own
    probability. Records that come out empty are dropped."""
    probs = np.asarray(occurrence_probs, dtype=np.float64)
    rng = substream(seed, "init")
    records = []
    for _ in range(n_records):
        mask = rng.random(probs.size) < probs
        items = np.flatnonzero(mask).astype(np.int64)
        if items.size:
            records.append(items)
    return Corpus(probs.size, records)
