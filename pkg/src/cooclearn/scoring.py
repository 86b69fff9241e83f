"""Model parameters and dynamic-energy scoring.

Every model family exposes ``score(t, context)``: the drop in energy from
adding item ``t`` to the context, so that ``sigmoid(score)`` is the
conditional probability that item ``t`` is present given the context.
Higher score means more likely present.

For the bias-only and pairwise families the score has an independent
cross-check: the same conditional probability computed straight from the
explicit energy of the two configurations (context with and without ``t``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .utils import as_id_array, check_disjoint


def sigmoid(x):
    """Numerically stable logistic function, scalar or array."""
    if np.ndim(x) == 0:
        return float(expit(float(x)))
    return expit(np.asarray(x, dtype=np.float64))


def _check_query(t: int, context: np.ndarray, n_items: int) -> np.ndarray:
    context = as_id_array(context, n_items, name="context")
    if not 0 <= t < n_items:
        raise ValueError(f"item {t} outside [0, {n_items})")
    if np.any(context == t):
        raise ValueError(f"item {t} already present in context")
    return context


def _check_candidates(candidates, context, n_items) -> tuple[np.ndarray, np.ndarray]:
    context = as_id_array(context, n_items, name="context")
    candidates = as_id_array(candidates, n_items, name="candidates")
    check_disjoint(candidates, context, "candidates overlap the context")
    return context, candidates


@dataclass
class BiasParams:
    """Bias-only model: items occur independently of each other.

    ``bias[t]`` is stored so that ``sigmoid(bias[t])`` is the occurrence
    probability of item ``t`` (the log-odds of the item).
    """

    bias: np.ndarray

    def __post_init__(self):
        self.bias = np.asarray(self.bias, dtype=np.float64)

    @property
    def n_items(self) -> int:
        return self.bias.shape[0]

    def score(self, t: int, context) -> float:
        """Single-candidate convenience wrapper over ``score_all``."""
        return float(self.score_all(context, [t])[0])

    def score_all(self, context, candidates) -> np.ndarray:
        _, candidates = _check_candidates(candidates, context, self.n_items)
        return self.bias[candidates].copy()

    def energy(self, items) -> float:
        """Explicit energy of a configuration (lower = more probable)."""
        items = as_id_array(items, self.n_items)
        return float(-self.bias[items].sum())


@dataclass
class PairParams:
    """Pairwise model (fully visible Boltzmann machine).

    ``pair`` is symmetric with zero diagonal; ``pair[i][t]`` is the gain in
    score of item ``t`` from having item ``i`` in the context.
    """

    bias: np.ndarray
    pair: np.ndarray

    def __post_init__(self):
        self.bias = np.asarray(self.bias, dtype=np.float64)
        self.pair = np.asarray(self.pair, dtype=np.float64)
        n = self.bias.shape[0]
        if self.pair.shape != (n, n):
            raise ValueError("pair must be n_items x n_items")
        if np.any(np.diag(self.pair) != 0.0):
            raise ValueError("pair diagonal must be zero")
        if not np.array_equal(self.pair, self.pair.T):
            raise ValueError("pair must be symmetric")

    @property
    def n_items(self) -> int:
        return self.bias.shape[0]

    def score(self, t: int, context) -> float:
        """Single-candidate convenience wrapper over ``score_all``."""
        return float(self.score_all(context, [t])[0])

    def score_all(self, context, candidates) -> np.ndarray:
        context, candidates = _check_candidates(candidates, context, self.n_items)
        # candidate-major gather: the per-candidate reduction order is then
        # independent of how many candidates are scored together
        block = self.pair[context[None, :], candidates[:, None]]
        return self.bias[candidates] + block.sum(axis=1)

    def energy(self, items) -> float:
        """Explicit energy: minus the biases minus the within-set pair weights.

        Each unordered pair inside the configuration contributes once, which
        makes ``energy(context) - energy(context + t)`` equal ``score(t,
        context)`` exactly.
        """
        items = as_id_array(items, self.n_items)
        sub = self.pair[np.ix_(items, items)]
        return float(-self.bias[items].sum() - 0.5 * sub.sum())


@dataclass
class LblParams:
    """Log-bilinear embedding model.

    The score of a candidate is the inner product of its embedding with the
    sum of the context embeddings, plus an optional per-item bias that keeps
    empty contexts informative. ``use_bias=False`` removes the bias from both
    scoring and training.
    """

    embed: np.ndarray
    bias: np.ndarray
    use_bias: bool = True

    def __post_init__(self):
        self.embed = np.asarray(self.embed, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.embed.ndim != 2 or self.embed.shape[0] != self.bias.shape[0]:
            raise ValueError("embed must be n_items x dim, bias length n_items")

    @property
    def n_items(self) -> int:
        return self.bias.shape[0]

    @property
    def dim(self) -> int:
        return self.embed.shape[1]

    def score(self, t: int, context) -> float:
        """Single-candidate convenience wrapper over ``score_all``."""
        return float(self.score_all(context, [t])[0])

    def score_all(self, context, candidates) -> np.ndarray:
        context, candidates = _check_candidates(candidates, context, self.n_items)
        # einsum keeps per-row accumulation order independent of batch size
        s = np.einsum("ij,j->i", self.embed[candidates], self.embed[context].sum(axis=0))
        if self.use_bias:
            s = s + self.bias[candidates]
        return s


@dataclass
class DemParams:
    """Deep embedding model parameters.

    The score of item ``t`` stacks three dependence levels: a per-item bias,
    a pairwise readout summed over the context, and per-layer readout vectors
    dotted with the sigmoid activations of a feed-forward stack driven by the
    context indicator vector. ``pair_readout`` is not required to be
    symmetric; its diagonal stays zero.
    """

    bias: np.ndarray
    pair_readout: np.ndarray
    layer_weights: list[np.ndarray] = field(default_factory=list)
    layer_biases: list[np.ndarray] = field(default_factory=list)
    readouts: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.bias = np.asarray(self.bias, dtype=np.float64)
        self.pair_readout = np.asarray(self.pair_readout, dtype=np.float64)
        n = self.bias.shape[0]
        if self.pair_readout.shape != (n, n):
            raise ValueError("pair_readout must be n_items x n_items")
        if np.any(np.diag(self.pair_readout) != 0.0):
            raise ValueError("pair_readout diagonal must be zero")
        if not (len(self.layer_weights) == len(self.layer_biases) == len(self.readouts)):
            raise ValueError("layer_weights, layer_biases and readouts must align")
        width = n
        for l, (W, B, R) in enumerate(
            zip(self.layer_weights, self.layer_biases, self.readouts)
        ):
            W = np.asarray(W, dtype=np.float64)
            B = np.asarray(B, dtype=np.float64)
            R = np.asarray(R, dtype=np.float64)
            if W.ndim != 2 or W.shape[1] != width:
                raise ValueError(f"layer {l}: weight shape {W.shape} does not chain")
            if B.shape != (W.shape[0],):
                raise ValueError(f"layer {l}: bias shape {B.shape} mismatches weights")
            if R.shape != (n, W.shape[0]):
                raise ValueError(f"layer {l}: readout shape {R.shape} mismatches")
            self.layer_weights[l], self.layer_biases[l], self.readouts[l] = W, B, R
            width = W.shape[0]

    @property
    def n_items(self) -> int:
        return self.bias.shape[0]

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return tuple(W.shape[0] for W in self.layer_weights)

    def forward(self, context) -> list[np.ndarray]:
        """Hidden activations for a context indicator vector, layer by layer.

        The first layer exploits sparsity: its pre-activation is the sum of
        the weight columns selected by the context.
        """
        context = as_id_array(context, self.n_items, name="context")
        acts: list[np.ndarray] = []
        h = None
        for l, (W, B) in enumerate(zip(self.layer_weights, self.layer_biases)):
            if l == 0:
                pre = W[:, context].sum(axis=1) + B
            else:
                pre = W @ h + B
            h = sigmoid(pre)
            acts.append(h)
        return acts

    def score(self, t: int, context) -> float:
        """Single-candidate convenience wrapper over ``score_all``."""
        return float(self.score_all(context, [t])[0])

    def score_all(self, context, candidates) -> np.ndarray:
        """Scores for many candidates sharing one context (one forward pass)."""
        context, candidates = _check_candidates(candidates, context, self.n_items)
        # candidate-major gather and einsum keep each candidate's accumulation
        # order independent of how many candidates are scored together
        block = self.pair_readout[context[None, :], candidates[:, None]]
        s = self.bias[candidates] + block.sum(axis=1)
        for R, h in zip(self.readouts, self.forward(context)):
            s = s + np.einsum("ij,j->i", R[candidates], h)
        return s


def conditional_probability(params, t: int, context) -> float:
    """p(item t present | context), computed through the model's score."""
    return float(sigmoid(params.score(t, context)))


def explicit_energy(params, items) -> float:
    """Explicit configuration energy for the bias-only and pairwise models."""
    return params.energy(items)


def oracle_conditional(params, t: int, context) -> float:
    """Conditional probability straight from energy differences.

    Independent of the closed-form score: evaluates the explicit energy of
    the context with and without item ``t`` and squashes the difference.
    """
    context = _check_query(t, context, params.n_items)
    with_t = np.sort(np.append(context, t))
    return float(sigmoid(params.energy(context) - params.energy(with_t)))


def dem_from_pairwise(pair_params: PairParams) -> DemParams:
    """Zero-layer deep model equivalent to a pairwise model.

    Copies the symmetric pair matrix into the (asymmetric) pairwise readout;
    scores agree exactly for every query.
    """
    return DemParams(
        bias=pair_params.bias.copy(),
        pair_readout=pair_params.pair.copy(),
    )
