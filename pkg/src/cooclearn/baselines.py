"""Heuristic co-occurrence baselines: co-visiting graph scores and local
random walk.

The co-visiting graph weights an item pair by the number of records the two
items share. A candidate is scored by summing the edge weights into it from
the context (CVG), by the same sum with frequency normalization (NormCVG),
or by the probability mass a short random walk started on the context
deposits on it (LRW).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus
from .utils import as_id_array, check_disjoint

_CHUNK = 4_000_000  # pair-buffer flush threshold during graph construction


@dataclass
class CovisitGraph:
    """Symmetric whole-number co-occurrence counts plus per-item record
    membership counts."""

    counts: sp.csr_matrix
    item_freq: np.ndarray

    @property
    def n_items(self) -> int:
        return self.item_freq.shape[0]

    def transition_matrix(self) -> sp.csr_matrix:
        """Row-normalized counts; rows of isolated items stay all-zero."""
        degree = np.asarray(self.counts.sum(axis=1)).ravel().astype(np.float64)
        inv = np.divide(1.0, degree, out=np.zeros_like(degree), where=degree > 0)
        return sp.diags(inv) @ self.counts.astype(np.float64)


def build_covisit(corpus: Corpus) -> CovisitGraph:
    """Count, for every item pair, the records containing both items."""
    n = corpus.n_items
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    buffered = 0
    acc = sp.csr_matrix((n, n), dtype=np.int64)

    def flush():
        nonlocal acc, rows, cols, buffered
        if not buffered:
            return
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        ones = np.ones(r.size, dtype=np.int64)
        acc = acc + sp.coo_matrix((ones, (r, c)), shape=(n, n)).tocsr()
        rows, cols, buffered = [], [], 0

    for rec in corpus.records:
        m = rec.size
        if m < 2:
            continue
        iu, ju = np.triu_indices(m, k=1)
        rows.append(rec[iu])
        cols.append(rec[ju])
        buffered += iu.size
        if buffered >= _CHUNK:
            flush()
    flush()
    counts = (acc + acc.T).tocsr()
    counts.sum_duplicates()
    return CovisitGraph(counts=counts, item_freq=corpus.item_frequencies())


def _check_scoring(graph: CovisitGraph, context, candidates):
    context = as_id_array(context, graph.n_items, name="context")
    candidates = as_id_array(candidates, graph.n_items, name="candidates")
    check_disjoint(candidates, context, "candidates overlap the context")
    return context, candidates


def cvg_score_all(graph: CovisitGraph, context, candidates) -> np.ndarray:
    """Sum of co-occurrence counts from the context into each candidate."""
    context, candidates = _check_scoring(graph, context, candidates)
    block = graph.counts[context][:, candidates]
    return np.asarray(block.sum(axis=0)).ravel().astype(np.float64)


def normcvg_score_all(
    graph: CovisitGraph, context, candidates, norm: str = "cosine"
) -> np.ndarray:
    """Frequency-normalized co-occurrence scores.

    ``cosine`` (default) divides each edge count by the geometric mean of
    the endpoint frequencies; ``source`` and ``target`` divide by one
    endpoint only. Zero-frequency items score zero.
    """
    context, candidates = _check_scoring(graph, context, candidates)
    src, dst = _norm_weights(graph, context, norm)
    block = graph.counts[context][:, candidates].astype(np.float64)
    weighted = np.asarray(block.multiply(src[:, None]).sum(axis=0)).ravel()
    return weighted * dst[candidates]


def lrw_score_all(
    graph: CovisitGraph,
    context,
    candidates,
    steps: int = 3,
    aggregate: bool = True,
) -> np.ndarray:
    """Random-walk visiting mass on each candidate, walked from the context.

    Runs ``steps`` sparse vector-matrix products from the context indicator
    and, by default, accumulates the mass over all steps; with
    ``aggregate=False`` only the final step counts. The step matrices are
    never materialized.
    """
    context, candidates = _check_scoring(graph, context, candidates)
    return _lrw_vector(graph, context, steps, aggregate)[candidates]


def cvg_score(graph: CovisitGraph, context, t: int) -> float:
    return float(cvg_score_all(graph, context, [t])[0])


def normcvg_score(graph: CovisitGraph, context, t: int, norm: str = "cosine") -> float:
    return float(normcvg_score_all(graph, context, [t], norm)[0])


def lrw_score(
    graph: CovisitGraph, context, t: int, steps: int = 3, aggregate: bool = True
) -> float:
    return float(lrw_score_all(graph, context, [t], steps, aggregate)[0])


def _norm_weights(graph: CovisitGraph, context: np.ndarray, norm: str):
    freq = graph.item_freq.astype(np.float64)
    if norm == "cosine":
        root = np.sqrt(freq)
        src = np.divide(
            1.0, root[context], out=np.zeros(context.size), where=root[context] > 0
        )
        dst = np.divide(1.0, root, out=np.zeros_like(root), where=root > 0)
    elif norm == "source":
        src = np.divide(
            1.0, freq[context], out=np.zeros(context.size), where=freq[context] > 0
        )
        dst = np.ones_like(freq)
    elif norm == "target":
        src = np.ones(context.size)
        dst = np.divide(1.0, freq, out=np.zeros_like(freq), where=freq > 0)
    else:
        raise ValueError(f"norm must be 'cosine', 'source' or 'target', got {norm!r}")
    return src, dst


def _lrw_vector(
    graph: CovisitGraph, context: np.ndarray, steps: int, aggregate: bool
) -> np.ndarray:
    if steps < 1:
        raise ValueError("steps must be at least 1")
    P = graph.transition_matrix()
    x = np.zeros(graph.n_items)
    x[context] = 1.0
    total = np.zeros(graph.n_items)
    for _ in range(steps):
        x = P.T @ x
        if aggregate:
            total += x
    return total if aggregate else x
