"""Missing-item prediction harness.

A test record has one item masked out; a scorer ranks every item outside
the remaining context and is credited when the masked item appears in its
top K. Cross-validation trains on four of five folds and evaluates on the
fifth, reporting the mean and sample standard deviation of Top@K accuracy
across folds. Paired scorers are compared with an exact McNemar test on
the per-record hit indicators.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .corpus import Corpus, MaskedRecord, mask_one_item, split_folds
from .utils import substream


def _scorer_n_items(scorer) -> int:
    n = getattr(scorer, "n_items_", None)
    if n is None:
        n = scorer.n_items
    return int(n)


@dataclass
class RankedList:
    """Candidates in descending score order; ties break toward smaller ids."""

    items: np.ndarray
    scores: np.ndarray


def rank_candidates(scorer, context, k: int) -> RankedList:
    """Top-``k`` items outside the context, by score then ascending id.

    Asking for more candidates than exist truncates rather than failing.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n = _scorer_n_items(scorer)
    context = np.asarray(context, dtype=np.int64)
    candidates = np.setdiff1d(np.arange(n, dtype=np.int64), context)
    scores = np.asarray(scorer.score_all(context, candidates), dtype=np.float64)
    order = np.lexsort((candidates, -scores))[: min(k, candidates.size)]
    return RankedList(items=candidates[order], scores=scores[order])


def _target_rank(scorer, masked: MaskedRecord) -> int:
    """1-based rank of the target among all non-context candidates.

    Equivalent to its position in ``rank_candidates`` output: items with a
    strictly higher score, plus equal-scored items with a smaller id, come
    first.
    """
    n = _scorer_n_items(scorer)
    candidates = np.setdiff1d(np.arange(n, dtype=np.int64), masked.context)
    scores = np.asarray(scorer.score_all(masked.context, candidates), dtype=np.float64)
    t_pos = int(np.searchsorted(candidates, masked.target))
    t_score = scores[t_pos]
    ahead = int(np.sum(scores > t_score))
    ahead += int(np.sum((scores == t_score) & (candidates < masked.target)))
    return ahead + 1


def target_ranks(masked_records, scorer) -> np.ndarray:
    """1-based target rank for every masked record."""
    return np.array([_target_rank(scorer, m) for m in masked_records], dtype=np.int64)


def topk_accuracy(masked_records, scorer, k: int) -> float:
    """Fraction of masked records whose target lands in the scorer's top k."""
    masked_records = list(masked_records)
    if not masked_records:
        raise ValueError("empty test set")
    ranks = target_ranks(masked_records, scorer)
    return float(np.mean(ranks <= k))


def mask_test_records(corpus: Corpus, indices, seed: int, fold: int = 0):
    """Masked records for the eligible (size >= 2) records at ``indices``.

    Each record is masked once; the choice is seeded per record index so
    results do not depend on evaluation order.
    """
    masked = []
    for i in indices:
        rec = corpus.records[int(i)]
        if rec.size < 2:
            continue
        rec_seed = int(substream(seed, "mask", fold, int(i)).integers(1 << 62))
        masked.append(mask_one_item(rec, rec_seed))
    return masked


@dataclass
class EvalReport:
    """Cross-fold Top@K accuracy summary for one model."""

    label: str
    per_k: dict[int, tuple[float, float]]
    per_fold: dict[int, list[float]] = field(default_factory=dict)
    n_test: int = 0
    wall_time: float = 0.0

    def table_rows(self):
        for k in sorted(self.per_k):
            mean, std = self.per_k[k]
            yield (self.label, k, mean, std, self.n_test, self.wall_time)


def cross_validate(
    corpus: Corpus,
    estimator,
    k_list=(1, 10),
    k_folds: int = 5,
    seed: int = 0,
    label: str | None = None,
    verbose: int = 0,
) -> EvalReport:
    """Five-fold (by default) cross-validated Top@K accuracy.

    Each fold trains a fresh clone of ``estimator`` on the other folds and
    ranks candidates for the fold's masked records. When the estimator has a
    ``random_state`` parameter, each fold's clone is reseeded from the
    evaluation seed so the whole report is a pure function of ``seed``.
    """
    k_list = sorted(int(k) for k in k_list)
    if not k_list or k_list[0] < 1:
        raise ValueError("k_list must contain positive integers")
    t0 = time.perf_counter()
    split = split_folds(corpus, k_folds, seed)
    per_fold: dict[int, list[float]] = {k: [] for k in k_list}
    n_test = 0
    for fold in range(k_folds):
        model = clone(estimator)
        if "random_state" in model.get_params():
            fold_seed = int(substream(seed, "train", fold).integers(1 << 62))
            model.set_params(random_state=fold_seed)
        model.fit(corpus.subset(split.train_indices(fold)))
        masked = mask_test_records(corpus, split.test_indices(fold), seed, fold)
        if not masked:
            raise ValueError(f"fold {fold} has no eligible test records")
        ranks = target_ranks(masked, model)
        n_test += len(masked)
        for k in k_list:
            per_fold[k].append(float(np.mean(ranks <= k)))
        if verbose:
            shown = ", ".join(f"top@{k}={per_fold[k][-1]:.4f}" for k in k_list)
            print(f"fold {fold + 1}/{k_folds}  {shown}")
    per_k = {
        k: (float(np.mean(v)), float(np.std(v, ddof=1)) if len(v) > 1 else 0.0)
        for k, v in per_fold.items()
    }
    return EvalReport(
        label=label or type(estimator).__name__,
        per_k=per_k,
        per_fold=per_fold,
        n_test=n_test,
        wall_time=time.perf_counter() - t0,
    )


def paired_hits(corpus: Corpus, scorers, k_list=(1, 10), seed: int = 0):
    """Hit indicators for several fitted scorers on one shared masked set.

    Every eligible record is masked once (seeded); each scorer ranks the
    same contexts, so the outputs are paired per record for significance
    testing.
    """
    masked = mask_test_records(corpus, range(len(corpus)), seed)
    if not masked:
        raise ValueError("no eligible test records")
    k_list = sorted(int(k) for k in k_list)
    out = []
    for scorer in scorers:
        ranks = target_ranks(masked, scorer)
        out.append({k: ranks <= k for k in k_list})
    return out


def mcnemar_significance(hits_a, hits_b) -> float:
    """Exact two-sided McNemar test on paired hit indicators.

    Only discordant pairs matter; under the null they split evenly, so the
    p-value is the doubled lower binomial tail of the smaller count (capped
    at one).
    """
    a = np.asarray(hits_a, dtype=bool)
    b = np.asarray(hits_b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError("hit vectors must have equal length")
    n01 = int(np.sum(a & ~b))
    n10 = int(np.sum(~a & b))
    n = n01 + n10
    if n == 0:
        return 1.0
    k = min(n01, n10)
    tail = sum(math.comb(n, i) for i in range(k + 1))
    return min(1.0, 2.0 * tail / 2.0**n)


def format_report(reports, timings: bool = True) -> str:
    """Tab-separated table: model, K, mean, std, n_test, seconds."""
    lines = ["model\tk\tmean\tstd\tn_test\tseconds"]
    for rep in reports:
        for label, k, mean, std, n_test, secs in rep.table_rows():
            secs_txt = f"{secs:.2f}" if timings else "-"
            lines.append(f"{label}\t{k}\t{mean:.6f}\t{std:.6f}\t{n_test}\t{secs_txt}")
    return "\n".join(lines)
