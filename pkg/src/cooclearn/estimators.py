"""Scikit-learn style estimators for the co-occurrence models.

Each estimator takes a Corpus (or any iterable of item-id iterables) in
``fit`` and afterwards scores candidate items against a context through
``score_all`` / ``predict_proba`` / ``top_k``. Hyperparameters follow the
scikit-learn convention: set in ``__init__``, untouched by ``fit``, fitted
state in trailing-underscore attributes, so the estimators compose with
``clone`` and the evaluation harness.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import baselines
from .corpus import as_corpus
from .evaluation import RankedList, rank_candidates
from .scoring import sigmoid
from .training import Hyperparams, train


class _RankingMixin:
    """Candidate ranking shared by every fitted co-occurrence scorer."""

    def _check_fitted(self):
        if not hasattr(self, "n_items_"):
            raise NotFittedError(
                f"{type(self).__name__} must be fitted before scoring"
            )

    def top_k(self, context, k: int = 10) -> RankedList:
        """Best ``k`` candidate items outside the context."""
        self._check_fitted()
        return rank_candidates(self, context, k)


class _TrainedModel(_RankingMixin, BaseEstimator):
    """Shared fit plumbing and scoring for the SGD-trained families."""

    _model_kind = ""

    def _hyper(self) -> Hyperparams:
        return Hyperparams(
            learning_rate=self.learning_rate,
            lr_decay=self.lr_decay,
            negatives=self.n_negatives,
            epochs=self.n_epochs,
            layer_sizes=tuple(getattr(self, "layer_sizes", ()) or ()),
            init_scale=getattr(self, "init_scale", 1.0),
            weight_decay=self.weight_decay,
            seed=self.random_state,
            reweight_negatives=self.reweight_negatives,
        )

    def fit(self, X, y=None):
        """Train on a Corpus or an iterable of item-id iterables."""
        corpus = as_corpus(X)
        self.params_, self.trace_ = train(
            corpus,
            self._hyper(),
            model=self._model_kind,
            embedding_dim=getattr(self, "n_components", 64),
            use_bias=getattr(self, "use_bias", True),
            verbose=self.verbose,
        )
        self.n_items_ = corpus.n_items
        return self

    def score_all(self, context, candidates) -> np.ndarray:
        """Scores of the given candidate items against one context."""
        self._check_fitted()
        return self.params_.score_all(context, candidates)

    def score_item(self, t: int, context) -> float:
        self._check_fitted()
        return self.params_.score(t, context)

    def predict_proba(self, context, candidates=None) -> np.ndarray:
        """Conditional presence probabilities for the candidates.

        With ``candidates=None`` every item outside the context is scored,
        in ascending item-id order.
        """
        self._check_fitted()
        if candidates is None:
            candidates = np.setdiff1d(
                np.arange(self.n_items_, dtype=np.int64),
                np.asarray(context, dtype=np.int64),
            )
        return sigmoid(self.score_all(context, candidates))


class ItemBiasModel(_TrainedModel):
    """Bias-only (popularity) model: items occur independently.

    The fitted score of an item does not depend on the context; its sigmoid
    estimates the item's occurrence probability.

    Parameters
    ----------
    learning_rate : float
        Initial SGD step size.
    lr_decay : float
        Multiplicative learning-rate decay per epoch.
    n_negatives : int
        Number of absent items sampled per record and epoch.
    n_epochs : int
        Passes over the shuffled corpus.
    weight_decay : float
        Multiplicative shrink rate for weight matrices (no-op here, kept for
        a uniform interface).
    reweight_negatives : bool
        Scale negative terms by (N - record size) / n_negatives to unbias
        the subsampled objective.
    random_state : int
        Master seed for initialization, shuffling and negative sampling.

    Attributes
    ----------
    params_ : BiasParams
        Fitted per-item score vector.
    trace_ : TrainingTrace
        Mean per-example loss and wall time per epoch.
    n_items_ : int
        Item-space size seen at fit time.
    """

    _model_kind = "l1"

    def __init__(
        self,
        learning_rate=0.05,
        lr_decay=0.95,
        n_negatives=5,
        n_epochs=20,
        weight_decay=1e-6,
        reweight_negatives=False,
        random_state=0,
        verbose=0,
    ):
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.n_negatives = n_negatives
        self.n_epochs = n_epochs
        self.weight_decay = weight_decay
        self.reweight_negatives = reweight_negatives
        self.random_state = random_state
        self.verbose = verbose


class FullyVisibleBoltzmann(_TrainedModel):
    """Pairwise energy model (fully visible Boltzmann machine).

    A candidate's score is its bias plus the sum of learned pairwise weights
    from the context into it. Trained exactly like a deep embedding model
    with no hidden layers, so the pairwise weight matrix is free to be
    asymmetric.

    Attributes
    ----------
    params_ : DemParams
        Zero-layer deep-model parameters (bias plus pairwise readout).
    """

    _model_kind = "fvbm"

    def __init__(
        self,
        learning_rate=0.05,
        lr_decay=0.95,
        n_negatives=5,
        n_epochs=20,
        init_scale=1.0,
        weight_decay=1e-6,
        reweight_negatives=False,
        random_state=0,
        verbose=0,
    ):
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.n_negatives = n_negatives
        self.n_epochs = n_epochs
        self.init_scale = init_scale
        self.weight_decay = weight_decay
        self.reweight_negatives = reweight_negatives
        self.random_state = random_state
        self.verbose = verbose

    @property
    def pair_weights_(self) -> np.ndarray:
        self._check_fitted()
        return self.params_.pair_readout


class LogBilinearModel(_TrainedModel):
    """Log-bilinear embedding model.

    Each item owns one embedding vector; a candidate is scored by the inner
    product of its vector with the sum of the context vectors, plus an
    optional per-item bias (``use_bias=False`` drops it, leaving the pure
    bilinear form).
    """

    _model_kind = "lbl"

    def __init__(
        self,
        n_components=64,
        learning_rate=0.05,
        lr_decay=0.95,
        n_negatives=5,
        n_epochs=20,
        init_scale=1.0,
        weight_decay=1e-6,
        use_bias=True,
        reweight_negatives=False,
        random_state=0,
        verbose=0,
    ):
        self.n_components = n_components
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.n_negatives = n_negatives
        self.n_epochs = n_epochs
        self.init_scale = init_scale
        self.weight_decay = weight_decay
        self.use_bias = use_bias
        self.reweight_negatives = reweight_negatives
        self.random_state = random_state
        self.verbose = verbose

    @property
    def embedding_(self) -> np.ndarray:
        self._check_fitted()
        return self.params_.embed


class DeepEmbeddingModel(_TrainedModel):
    """Deep embedding model over co-occurrence records.

    Scores stack a per-item bias, a pairwise readout summed over the
    context, and per-layer readout vectors dotted with the activations of a
    sigmoid feed-forward stack driven by the context. ``layer_sizes=()``
    yields the zero-layer model, which scores and trains identically to
    :class:`FullyVisibleBoltzmann`.

    Parameters
    ----------
    layer_sizes : tuple of int
        Hidden widths bottom-up, e.g. ``(32, 16)`` for two hidden layers.

    Attributes
    ----------
    params_ : DemParams
        Fitted tensors: bias, pairwise readout, layer weights/biases and
        per-layer readouts.
    """

    _model_kind = "dem"

    def __init__(
        self,
        layer_sizes=(32,),
        learning_rate=0.05,
        lr_decay=0.95,
        n_negatives=5,
        n_epochs=20,
        init_scale=1.0,
        weight_decay=1e-6,
        reweight_negatives=False,
        random_state=0,
        verbose=0,
    ):
        self.layer_sizes = layer_sizes
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.n_negatives = n_negatives
        self.n_epochs = n_epochs
        self.init_scale = init_scale
        self.weight_decay = weight_decay
        self.reweight_negatives = reweight_negatives
        self.random_state = random_state
        self.verbose = verbose

    def item_embeddings(self) -> np.ndarray:
        """Per-item representation: the readout rows concatenated across
        layers. Requires at least one hidden layer."""
        self._check_fitted()
        if not self.params_.readouts:
            raise ValueError("model has no hidden layers, nothing to export")
        return np.concatenate(self.params_.readouts, axis=1)


class CovisitRecommender(_RankingMixin, BaseEstimator):
    """Heuristic recommender over the co-visiting graph.

    Parameters
    ----------
    method : {'cvg', 'normcvg', 'lrw'}
        Plain co-occurrence sums, frequency-normalized sums, or local
        random walk.
    steps : int
        Walk length for ``lrw``.
    aggregate_steps : bool
        Accumulate walk mass over steps 1..steps instead of the final step
        only.
    norm : {'cosine', 'source', 'target'}
        Denominator convention for ``normcvg``.
    """

    def __init__(self, method="cvg", steps=3, aggregate_steps=True, norm="cosine"):
        self.method = method
        self.steps = steps
        self.aggregate_steps = aggregate_steps
        self.norm = norm

    def fit(self, X, y=None):
        if self.method not in ("cvg", "normcvg", "lrw"):
            raise ValueError(f"unknown method {self.method!r}")
        corpus = as_corpus(X)
        self.graph_ = baselines.build_covisit(corpus)
        self.n_items_ = corpus.n_items
        return self

    def score_all(self, context, candidates) -> np.ndarray:
        self._check_fitted()
        if self.method == "cvg":
            return baselines.cvg_score_all(self.graph_, context, candidates)
        if self.method == "normcvg":
            return baselines.normcvg_score_all(
                self.graph_, context, candidates, self.norm
            )
        return baselines.lrw_score_all(
            self.graph_, context, candidates, self.steps, self.aggregate_steps
        )
