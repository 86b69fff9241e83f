"""Pseudo-likelihood SGD with negative sampling.

One training example is one record. Each item present is scored against the
rest of the record (leave-one-out context) as a positive; a fixed number of
items sampled uniformly from outside the record are scored against the full
record as negatives. The per-example loss is the summed logistic loss of
those terms, and one update applies its exact gradient (ascent on the
pseudo-likelihood), computed in closed form for every parameter family and
verifiable coordinate-by-coordinate against central finite differences.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .scoring import BiasParams, DemParams, LblParams, sigmoid
from .utils import as_id_array, check_disjoint, substream


@dataclass
class Hyperparams:
    """Knobs for the SGD trainer.

    ``negatives`` is the number of sampled absent items per record. With
    ``reweight_negatives`` the negative terms are scaled by
    ``(n_items - record size) / negatives`` so their expected contribution
    matches enumerating every absent item (unbiased but higher variance);
    the default keeps the cheap subsampled objective.
    """

    learning_rate: float = 0.05
    lr_decay: float = 0.95
    negatives: int = 5
    epochs: int = 20
    layer_sizes: tuple[int, ...] = ()
    init_scale: float = 1.0
    weight_decay: float = 1e-6
    seed: int = 0
    reweight_negatives: bool = False


@dataclass
class TrainingTrace:
    epoch_losses: list[float] = field(default_factory=list)
    wall_times: list[float] = field(default_factory=list)


def init_dem_params(
    n_items: int,
    layer_sizes=(),
    init_scale: float = 1.0,
    seed: int = 0,
) -> DemParams:
    """Fresh deep-model parameters.

    Bias and pairwise readout start at zero; layer weights and readouts are
    uniform in ``[-a, a]`` with ``a = init_scale * sqrt(6 / (fan_in +
    fan_out))``; layer biases start at zero. With no layers this is exactly a
    pairwise model with every initial probability at one half.
    """
    if n_items < 1:
        raise ValueError("n_items must be positive")
    rng = substream(seed, "init")
    weights, biases, readouts = [], [], []
    fan_in = n_items
    for width in layer_sizes:
        a = init_scale * np.sqrt(6.0 / (fan_in + width))
        weights.append(rng.uniform(-a, a, size=(width, fan_in)))
        biases.append(np.zeros(width))
        a_r = init_scale * np.sqrt(6.0 / (width + n_items))
        readouts.append(rng.uniform(-a_r, a_r, size=(n_items, width)))
        fan_in = width
    return DemParams(
        bias=np.zeros(n_items),
        pair_readout=np.zeros((n_items, n_items)),
        layer_weights=weights,
        layer_biases=biases,
        readouts=readouts,
    )


def init_bias_params(n_items: int) -> BiasParams:
    return BiasParams(bias=np.zeros(n_items))


def init_lbl_params(
    n_items: int,
    dim: int,
    init_scale: float = 1.0,
    seed: int = 0,
    use_bias: bool = True,
) -> LblParams:
    rng = substream(seed, "init")
    a = init_scale * np.sqrt(6.0 / (n_items + dim))
    return LblParams(
        embed=rng.uniform(-a, a, size=(n_items, dim)),
        bias=np.zeros(n_items),
        use_bias=use_bias,
    )


def sample_negatives(
    record: np.ndarray, n: int, n_items: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``n`` items uniformly from outside the record, with replacement.

    Draws landing inside the record are rejected and redrawn.
    """
    record = np.asarray(record, dtype=np.int64)
    if record.size >= n_items:
        raise ValueError("record covers every item; no negatives exist")
    if n == 0:
        return np.empty(0, dtype=np.int64)
    members = set(record.tolist())
    draws = rng.integers(0, n_items, size=n).tolist()
    for k in range(n):
        while draws[k] in members:
            draws[k] = int(rng.integers(0, n_items))
    return np.array(draws, dtype=np.int64)


# ---------------------------------------------------------------------------
# Per-example forward passes: scores and residuals for all terms of a record.
# ---------------------------------------------------------------------------


def _dem_terms(p: DemParams, record, negatives, negative_weight):
    """Scores, residuals and cached activations for one record's terms.

    Hidden activations are computed for ``m + 1`` distinct contexts: the m
    leave-one-out contexts of the positives and the full record shared by
    every negative. ``idx`` maps each of the ``m + T`` terms to its row.
    """
    m, T = record.size, negatives.size
    cands = np.concatenate([record, negatives])

    acts: list[np.ndarray] = []
    idx = None
    if p.layer_weights:
        idx = np.concatenate([np.arange(m), np.full(T, m, dtype=np.int64)])
        W1, B1 = p.layer_weights[0], p.layer_biases[0]
        cols = W1[:, record]
        a_full = cols.sum(axis=1) + B1
        pre = np.empty((m + 1, a_full.size))
        pre[:] = a_full
        pre[:m] -= cols.T
        H = sigmoid(pre)
        acts.append(H)
        for W, B in zip(p.layer_weights[1:], p.layer_biases[1:]):
            H = sigmoid(H @ W.T + B)
            acts.append(H)

    s = p.bias[cands].copy()
    sub = p.pair_readout[record[:, None], cands[None, :]]
    # the (j, j) entries of the positive block are each positive's own item;
    # zero them so the sum is the leave-one-out context regardless of storage
    np.fill_diagonal(sub, 0.0)
    s += sub.sum(axis=0)
    for R, H in zip(p.readouts, acts):
        s += np.einsum("ij,ij->i", R[cands], H[idx])

    loss = float(
        np.logaddexp(0.0, -s[:m]).sum()
        + negative_weight * np.logaddexp(0.0, s[m:]).sum()
    )
    delta = -sigmoid(s)
    delta[:m] += 1.0
    if negative_weight != 1.0:
        delta[m:] *= negative_weight
    return loss, cands, idx, delta, acts


def _dem_backprop(p: DemParams, cands, idx, delta, acts, corrupt_backprop=False):
    """Per-term pre-activation gradients for every layer (ascent direction).

    The score feeds from every hidden layer directly, so the message into a
    layer combines its own readout row with what flows back from the layer
    above. ``corrupt_backprop`` drops the back-propagated part (debug hook
    for the finite-difference checker).
    """
    k = len(acts)
    dpre: list[np.ndarray] = [np.empty(0)] * k
    for l in range(k - 1, -1, -1):
        lam = delta[:, None] * p.readouts[l][cands]
        if l + 1 < k and not corrupt_backprop:
            lam = lam + dpre[l + 1] @ p.layer_weights[l + 1]
        H = acts[l][idx]
        dpre[l] = lam * H * (1.0 - H)
    return dpre


def _lbl_terms(p: LblParams, record, negatives, negative_weight):
    m = record.size
    P = p.embed[record]
    M = P.sum(axis=0)
    s_pos = P @ M - np.einsum("ij,ij->i", P, P)
    Q = p.embed[negatives]
    s_neg = Q @ M
    if p.use_bias:
        s_pos = s_pos + p.bias[record]
        s_neg = s_neg + p.bias[negatives]
    s = np.concatenate([s_pos, s_neg])
    loss = float(
        np.logaddexp(0.0, -s[:m]).sum()
        + negative_weight * np.logaddexp(0.0, s[m:]).sum()
    )
    delta = -sigmoid(s)
    delta[:m] += 1.0
    delta[m:] *= negative_weight
    return loss, delta, P, M, Q


def _bias_terms(p: BiasParams, record, negatives, negative_weight):
    s = np.concatenate([p.bias[record], p.bias[negatives]])
    m = record.size
    loss = float(
        np.logaddexp(0.0, -s[:m]).sum()
        + negative_weight * np.logaddexp(0.0, s[m:]).sum()
    )
    delta = -sigmoid(s)
    delta[:m] += 1.0
    delta[m:] *= negative_weight
    return loss, delta


def _dedupe(negatives: np.ndarray, delta_neg: np.ndarray):
    """Aggregate residuals of repeated negative draws onto unique items."""
    acc: dict[int, float] = {}
    for item, d in zip(negatives.tolist(), delta_neg.tolist()):
        acc[item] = acc.get(item, 0.0) + d
    uniq = np.fromiter(acc.keys(), dtype=np.int64, count=len(acc))
    agg = np.fromiter(acc.values(), dtype=np.float64, count=len(acc))
    return uniq, agg


def _validate_example(params, record, negatives):
    record = as_id_array(record, params.n_items, name="record")
    negatives = as_id_array(negatives, params.n_items, name="negatives")
    check_disjoint(record, negatives, "negatives overlap the record")
    return record, negatives


def _loss_only(params, record, negatives, negative_weight) -> float:
    if isinstance(params, DemParams):
        return _dem_terms(params, record, negatives, negative_weight)[0]
    if isinstance(params, LblParams):
        return _lbl_terms(params, record, negatives, negative_weight)[0]
    if isinstance(params, BiasParams):
        return _bias_terms(params, record, negatives, negative_weight)[0]
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def per_example_loss(params, record, negatives, negative_weight: float = 1.0) -> float:
    """Summed logistic loss of one record's positive and negative terms.

    Positives are scored against their leave-one-out context, negatives
    against the full record.
    """
    record, negatives = _validate_example(params, record, negatives)
    return _loss_only(params, record, negatives, negative_weight)


def _param_arrays(params) -> list[tuple[str, np.ndarray]]:
    """Trainable arrays of a model in canonical order."""
    if isinstance(params, BiasParams):
        return [("bias", params.bias)]
    if isinstance(params, LblParams):
        out = [("embed", params.embed)]
        if params.use_bias:
            out.append(("bias", params.bias))
        return out
    if isinstance(params, DemParams):
        out = [("bias", params.bias), ("pair_readout", params.pair_readout)]
        for l in range(len(params.layer_weights)):
            out.append((f"layer_weights[{l}]", params.layer_weights[l]))
            out.append((f"layer_biases[{l}]", params.layer_biases[l]))
            out.append((f"readouts[{l}]", params.readouts[l]))
        return out
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def per_example_grad(
    params,
    record,
    negatives,
    negative_weight: float = 1.0,
    corrupt_backprop: bool = False,
) -> tuple[float, list[tuple[str, np.ndarray]]]:
    """Loss and its full ascent gradient as dense arrays.

    The arrays align with ``_param_arrays``; adding ``learning_rate`` times
    each gradient to the matching parameter is exactly one SGD step.
    """
    record, negatives = _validate_example(params, record, negatives)
    n = params.n_items
    m, T = record.size, negatives.size

    if isinstance(params, BiasParams):
        loss, delta = _bias_terms(params, record, negatives, negative_weight)
        g = np.zeros(n)
        np.add.at(g, np.concatenate([record, negatives]), delta)
        return loss, [("bias", g)]

    if isinstance(params, LblParams):
        loss, delta, P, M, Q = _lbl_terms(params, record, negatives, negative_weight)
        d_pos, d_neg = delta[:m], delta[m:]
        g_embed = np.zeros_like(params.embed)
        carried = d_pos @ P + (d_neg @ Q if T else 0.0)
        g_embed[record] = d_pos[:, None] * (M - 2.0 * P) + carried
        if T:
            uniq, agg = _dedupe(negatives, d_neg)
            g_embed[uniq] += agg[:, None] * M
        out = [("embed", g_embed)]
        if params.use_bias:
            g_bias = np.zeros(n)
            np.add.at(g_bias, np.concatenate([record, negatives]), delta)
            out.append(("bias", g_bias))
        return loss, out

    if isinstance(params, DemParams):
        loss, cands, idx, delta, acts = _dem_terms(
            params, record, negatives, negative_weight
        )
        d_pos, d_neg = delta[:m], delta[m:]
        g_bias = np.zeros(n)
        np.add.at(g_bias, cands, delta)
        g_r0 = np.zeros((n, n))
        g_r0[np.ix_(record, record)] += d_pos[None, :]
        g_r0[record, record] -= d_pos
        if T:
            uniq, agg = _dedupe(negatives, d_neg)
            g_r0[np.ix_(record, uniq)] += agg[None, :]
        out = [("bias", g_bias), ("pair_readout", g_r0)]
        if params.layer_weights:
            dpre = _dem_backprop(params, cands, idx, delta, acts, corrupt_backprop)
            for l in range(len(params.layer_weights)):
                if l == 0:
                    g_w = np.zeros_like(params.layer_weights[0])
                    tot = dpre[0].sum(axis=0)
                    g_w[:, record] = tot[:, None] - dpre[0][:m].T
                else:
                    g_w = dpre[l].T @ acts[l - 1][idx]
                g_b = dpre[l].sum(axis=0)
                g_r = np.zeros_like(params.readouts[l])
                np.add.at(g_r, cands, delta[:, None] * acts[l][idx])
                out.append((f"layer_weights[{l}]", g_w))
                out.append((f"layer_biases[{l}]", g_b))
                out.append((f"readouts[{l}]", g_r))
        return loss, out

    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def _apply_dem(p: DemParams, record, negatives, lr, negative_weight) -> float:
    """In-place SGD step touching only the slices the gradient lives on."""
    m, T = record.size, negatives.size
    loss, cands, idx, delta, acts = _dem_terms(p, record, negatives, negative_weight)
    d_pos, d_neg = delta[:m], delta[m:]

    rows = record[:, None]
    p.bias[record] += lr * d_pos
    p.pair_readout[rows, record[None, :]] += lr * d_pos[None, :]
    p.pair_readout[record, record] -= lr * d_pos
    if T:
        uniq, agg = _dedupe(negatives, d_neg)
        p.bias[uniq] += lr * agg
        p.pair_readout[rows, uniq[None, :]] += lr * agg[None, :]

    if p.layer_weights:
        dpre = _dem_backprop(p, cands, idx, delta, acts)
        for l in range(len(p.layer_weights)):
            p.readouts[l][record] += lr * d_pos[:, None] * acts[l][:m]
            if T:
                p.readouts[l][uniq] += lr * agg[:, None] * acts[l][m]
            if l == 0:
                tot = dpre[0].sum(axis=0)
                p.layer_weights[0][:, record] += lr * (tot[:, None] - dpre[0][:m].T)
                p.layer_biases[0] += lr * tot
            else:
                p.layer_weights[l] += lr * (dpre[l].T @ acts[l - 1][idx])
                p.layer_biases[l] += lr * dpre[l].sum(axis=0)
    return loss


def _apply_lbl(p: LblParams, record, negatives, lr, negative_weight) -> float:
    m, T = record.size, negatives.size
    loss, delta, P, M, Q = _lbl_terms(p, record, negatives, negative_weight)
    d_pos, d_neg = delta[:m], delta[m:]
    carried = d_pos @ P + (d_neg @ Q if T else 0.0)
    p.embed[record] += lr * (d_pos[:, None] * (M - 2.0 * P) + carried)
    if T:
        uniq, agg = _dedupe(negatives, d_neg)
        p.embed[uniq] += lr * agg[:, None] * M
    if p.use_bias:
        p.bias[record] += lr * d_pos
        if T:
            p.bias[uniq] += lr * agg
    return loss


def _apply_bias(p: BiasParams, record, negatives, lr, negative_weight) -> float:
    loss, delta = _bias_terms(p, record, negatives, negative_weight)
    m = record.size
    p.bias[record] += lr * delta[:m]
    if negatives.size:
        uniq, agg = _dedupe(negatives, delta[m:])
        p.bias[uniq] += lr * agg
    return loss


def sgd_update(
    params,
    record,
    hyper: Hyperparams,
    rng: np.random.Generator,
    learning_rate: float | None = None,
) -> float:
    """One SGD step on one record: sample negatives, step along the exact
    per-example gradient. Returns the example's loss before the step."""
    record = np.asarray(record, dtype=np.int64)
    if record.size >= params.n_items:
        # record covers every item: no negatives exist, train positives only
        negatives = np.empty(0, dtype=np.int64)
    else:
        negatives = sample_negatives(record, hyper.negatives, params.n_items, rng)
    lr = hyper.learning_rate if learning_rate is None else learning_rate
    weight = 1.0
    if hyper.reweight_negatives and hyper.negatives:
        weight = (params.n_items - record.size) / hyper.negatives
    if isinstance(params, DemParams):
        return _apply_dem(params, record, negatives, lr, weight)
    if isinstance(params, LblParams):
        return _apply_lbl(params, record, negatives, lr, weight)
    if isinstance(params, BiasParams):
        return _apply_bias(params, record, negatives, lr, weight)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def _decay_matrices(params, factor: float) -> None:
    """Multiplicative shrink of weight and readout matrices (not biases)."""
    if factor >= 1.0:
        return
    if isinstance(params, DemParams):
        params.pair_readout *= factor
        for l in range(len(params.layer_weights)):
            params.layer_weights[l] *= factor
            params.readouts[l] *= factor
    elif isinstance(params, LblParams):
        params.embed *= factor


def train(
    corpus: Corpus,
    hyper: Hyperparams,
    model: str = "dem",
    embedding_dim: int = 64,
    use_bias: bool = True,
    verbose: int = 0,
):
    """Train the selected model family by pseudo-likelihood SGD.

    ``model`` is one of ``dem``, ``fvbm``, ``l1``, ``lbl``; a pairwise model
    is trained as a deep model with no hidden layers. Records are reshuffled
    every epoch, the learning rate decays per epoch, and weight decay is
    compounded over the epoch's updates and applied at the epoch boundary.
    Returns the fitted parameters and the per-epoch trace of mean loss.
    """
    if len(corpus) == 0:
        raise ValueError("corpus has no records")
    n = corpus.n_items
    if model == "dem":
        params = init_dem_params(n, hyper.layer_sizes, hyper.init_scale, hyper.seed)
    elif model == "fvbm":
        params = init_dem_params(n, (), hyper.init_scale, hyper.seed)
    elif model == "l1":
        params = init_bias_params(n)
    elif model == "lbl":
        params = init_lbl_params(n, embedding_dim, hyper.init_scale, hyper.seed, use_bias)
    else:
        raise ValueError(f"unknown model {model!r}")

    trace = TrainingTrace()
    rng_shuffle = substream(hyper.seed, "shuffle")
    rng_neg = substream(hyper.seed, "negatives")
    records = corpus.records
    lr = hyper.learning_rate
    for epoch in range(hyper.epochs):
        t0 = time.perf_counter()
        total = 0.0
        for i in rng_shuffle.permutation(len(records)):
            total += sgd_update(params, records[i], hyper, rng_neg, learning_rate=lr)
        if hyper.weight_decay > 0.0:
            _decay_matrices(params, (1.0 - lr * hyper.weight_decay) ** len(records))
        elapsed = time.perf_counter() - t0
        trace.epoch_losses.append(total / len(records))
        trace.wall_times.append(elapsed)
        if verbose:
            print(
                f"epoch {epoch + 1}/{hyper.epochs}  "
                f"loss {trace.epoch_losses[-1]:.6f}  ({elapsed:.2f}s)"
            )
        lr *= hyper.lr_decay
    return params, trace


def gradient_check(
    params,
    record,
    n_negatives: int = 5,
    epsilon: float = 1e-5,
    seed: int = 0,
    negative_weight: float = 1.0,
    corrupt_backprop: bool = False,
) -> float:
    """Max relative error of the analytic gradient vs central differences.

    Negatives are sampled once and frozen; every parameter coordinate is
    perturbed by ``±epsilon``. The relative error of a coordinate is
    ``|analytic - numeric| / max(1e-8, |analytic| + |numeric|)``.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError("epsilon must lie in [1e-7, 1e-3]")
    record = as_id_array(record, params.n_items, name="record")
    negatives = sample_negatives(
        record, n_negatives, params.n_items, substream(seed, "negatives")
    )
    _, grads = per_example_grad(
        params, record, negatives, negative_weight, corrupt_backprop
    )
    worst = 0.0
    arrays = dict(_param_arrays(params))
    for name, g in grads:
        arr = arrays[name]
        flat = arr.reshape(-1)
        gflat = np.asarray(g).reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = _loss_only(params, record, negatives, negative_weight)
            flat[i] = orig - epsilon
            down = _loss_only(params, record, negatives, negative_weight)
            flat[i] = orig
            # loss gradient is the descent direction; analytic grads are ascent
            numeric = -(up - down) / (2.0 * epsilon)
            analytic = gflat[i]
            err = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
            worst = max(worst, err)
    return worst
