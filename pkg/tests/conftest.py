"""Shared fixtures and dataset discovery for the optional real-data tests."""

import os
from pathlib import Path

import numpy as np
import pytest

from cooclearn.corpus import Corpus

DATA_ENV = "COOCLEARN_DATA"


def dataset_path(*names: str) -> Path | None:
    """First existing file among ``names`` under the data directory.

    The directory comes from the COOCLEARN_DATA environment variable and
    defaults to ``./data``. Returns None when nothing is found, so callers
    can skip with a warning.
    """
    root = Path(os.environ.get(DATA_ENV, "data"))
    for name in names:
        cand = root / name
        if cand.exists():
            return cand
    return None


def skip_missing_dataset(label: str, *names: str) -> Path:
    path = dataset_path(*names)
    if path is None:
        pytest.skip(
            f"warning: {label} dataset not found (set {DATA_ENV}, tried "
            f"{', '.join(names)})"
        )
    return path


@pytest.fixture
def tiny_corpus() -> Corpus:
    """Five small records over six items."""
    records = [
        np.array([0, 1, 2]),
        np.array([0, 1]),
        np.array([2, 3, 4]),
        np.array([1, 4, 5]),
        np.array([0, 3]),
    ]
    return Corpus(6, records)
