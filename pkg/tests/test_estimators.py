import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cooclearn.datasets import make_planted_pairs
from cooclearn.estimators import (
    CovisitRecommender,
    DeepEmbeddingModel,
    FullyVisibleBoltzmann,
    ItemBiasModel,
    LogBilinearModel,
)
from cooclearn.scoring import sigmoid
from cooclearn.training import _param_arrays

ALL_ESTIMATORS = [
    ItemBiasModel(),
    FullyVisibleBoltzmann(),
    LogBilinearModel(n_components=8),
    DeepEmbeddingModel(layer_sizes=(6,)),
    CovisitRecommender(method="normcvg"),
]


@pytest.fixture(scope="module")
def corpus():
    return make_planted_pairs(n_pairs=5, n_records=120, seed=0)


class TestSklearnProtocol:
    @pytest.mark.parametrize("est", ALL_ESTIMATORS, ids=lambda e: type(e).__name__)
    def test_get_set_params_roundtrip(self, est):
        params = est.get_params()
        rebuilt = type(est)(**params)
        assert rebuilt.get_params() == params

    @pytest.mark.parametrize("est", ALL_ESTIMATORS, ids=lambda e: type(e).__name__)
    def test_clone_preserves_params(self, est):
        assert clone(est).get_params() == est.get_params()

    @pytest.mark.parametrize("est", ALL_ESTIMATORS, ids=lambda e: type(e).__name__)
    def test_unfitted_scoring_raises(self, est):
        with pytest.raises(NotFittedError):
            clone(est).top_k([0], k=2)

    @pytest.mark.parametrize("est", ALL_ESTIMATORS, ids=lambda e: type(e).__name__)
    def test_fit_returns_self_and_scores(self, est, corpus):
        model = clone(est)
        if "n_epochs" in model.get_params():
            model.set_params(n_epochs=2)
        assert model.fit(corpus) is model
        assert model.n_items_ == corpus.n_items
        ranked = model.top_k([0], k=3)
        assert len(ranked.items) == 3
        assert 0 not in ranked.items
        scores = model.score_all([0, 2], [1, 3])
        assert scores.shape == (2,)

    def test_fit_accepts_raw_record_lists(self):
        model = ItemBiasModel(n_epochs=1).fit([[0, 1], [1, 2], [2, 3]])
        assert model.n_items_ == 4


class TestTrainedModels:
    def test_fvbm_equals_zero_layer_dem(self, corpus):
        fv = FullyVisibleBoltzmann(n_epochs=3, random_state=7).fit(corpus)
        dem0 = DeepEmbeddingModel(layer_sizes=(), n_epochs=3, random_state=7).fit(corpus)
        for (_, a), (_, b) in zip(
            _param_arrays(fv.params_), _param_arrays(dem0.params_)
        ):
            assert np.array_equal(a, b)

    def test_trace_records_epochs(self, corpus):
        model = ItemBiasModel(n_epochs=4).fit(corpus)
        assert len(model.trace_.epoch_losses) == 4
        assert len(model.trace_.wall_times) == 4

    def test_predict_proba_default_candidates(self, corpus):
        model = ItemBiasModel(n_epochs=1).fit(corpus)
        probs = model.predict_proba([0, 1])
        assert probs.shape == (corpus.n_items - 2,)
        assert np.all((probs > 0) & (probs < 1))

    def test_predict_proba_is_sigmoid_of_scores(self, corpus):
        model = FullyVisibleBoltzmann(n_epochs=2).fit(corpus)
        cands = np.array([3, 5])
        assert np.allclose(
            model.predict_proba([0], cands), sigmoid(model.score_all([0], cands))
        )

    def test_same_seed_same_fit(self, corpus):
        a = DeepEmbeddingModel(layer_sizes=(4,), n_epochs=2, random_state=3).fit(corpus)
        b = DeepEmbeddingModel(layer_sizes=(4,), n_epochs=2, random_state=3).fit(corpus)
        for (_, x), (_, y) in zip(_param_arrays(a.params_), _param_arrays(b.params_)):
            assert np.array_equal(x, y)

    def test_item_embeddings_concatenate_readouts(self, corpus):
        model = DeepEmbeddingModel(layer_sizes=(4, 3), n_epochs=1).fit(corpus)
        table = model.item_embeddings()
        assert table.shape == (corpus.n_items, 7)
        assert np.array_equal(table[:, :4], model.params_.readouts[0])
        zero_layer = DeepEmbeddingModel(layer_sizes=(), n_epochs=1).fit(corpus)
        with pytest.raises(ValueError):
            zero_layer.item_embeddings()

    def test_lbl_use_bias_flag_propagates(self, corpus):
        model = LogBilinearModel(n_components=4, n_epochs=1, use_bias=False).fit(corpus)
        assert model.params_.use_bias is False
        assert np.all(model.params_.bias == 0)


class TestCovisitRecommender:
    def test_methods_rank_differently_but_validly(self, corpus):
        ranked = {}
        for method in ("cvg", "normcvg", "lrw"):
            model = CovisitRecommender(method=method).fit(corpus)
            ranked[method] = model.top_k([0], k=3).items.tolist()
        for items in ranked.values():
            assert len(items) == 3 and 0 not in items

    def test_unknown_method_rejected(self, corpus):
        with pytest.raises(ValueError):
            CovisitRecommender(method="magic").fit(corpus)

    def test_pair_partner_ranked_first(self, corpus):
        model = CovisitRecommender(method="cvg").fit(corpus)
        assert model.top_k([0], k=1).items[0] == 1
