"""Shared helpers: id-array coercion, argument checks, named random substreams."""

from __future__ import annotations

import numpy as np

# Every source of randomness in the library draws from one master seed
# through a named substream, so perturbing e.g. the negative sampler does
# not shift fold assignment or masking.
_STREAMS = {
    "split": 0,
    "mask": 1,
    "init": 2,
    "shuffle": 3,
    "negatives": 4,
    "train": 5,
}


def substream(seed: int, name: str, *indices: int) -> np.random.Generator:
    """Return a Generator for the named substream of a master seed.

    Extra ``indices`` (fold number, record index, ...) select independent
    streams within one name. Deterministic across platforms.
    """
    key = _STREAMS[name]
    entropy = (int(seed) % (1 << 63), key) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def as_id_array(ids, n_items: int | None = None, name: str = "items") -> np.ndarray:
    """Coerce ``ids`` to a 1-D int64 array and bounds-check against ``n_items``."""
    arr = np.asarray(ids, dtype=np.int64).reshape(-1)
    if arr.size:
        if arr.min() < 0:
            raise ValueError(f"{name} contains negative ids")
        if n_items is not None and arr.max() >= n_items:
            raise ValueError(
                f"{name} contains id {int(arr.max())} outside [0, {n_items})"
            )
    return arr


def check_sorted_unique(items: np.ndarray, name: str = "items") -> None:
    if items.size > 1 and not np.all(np.diff(items) > 0):
        raise ValueError(f"{name} must be strictly increasing (sorted, no duplicates)")


def check_disjoint(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.size and b.size and np.intersect1d(a, b).size:
        raise ValueError(what)
