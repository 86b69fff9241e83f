import math

import numpy as np
import pytest

from cooclearn.scoring import (
    BiasParams,
    DemParams,
    LblParams,
    PairParams,
    conditional_probability,
    dem_from_pairwise,
    explicit_energy,
    oracle_conditional,
    sigmoid,
)


def random_pairwise(n, rng, scale=1.0) -> PairParams:
    w = rng.normal(0, scale, (n, n))
    w = (w + w.T) / 2
    np.fill_diagonal(w, 0.0)
    return PairParams(bias=rng.normal(0, scale, n), pair=w)


def random_dem(n, layer_sizes, rng, scale=0.5) -> DemParams:
    weights, biases, readouts = [], [], []
    prev = n
    for width in layer_sizes:
        weights.append(rng.normal(0, scale, (width, prev)))
        biases.append(rng.normal(0, scale, width))
        readouts.append(rng.normal(0, scale, (n, width)))
        prev = width
    pr = rng.normal(0, scale, (n, n))
    np.fill_diagonal(pr, 0.0)
    return DemParams(
        bias=rng.normal(0, scale, n),
        pair_readout=pr,
        layer_weights=weights,
        layer_biases=biases,
        readouts=readouts,
    )


def random_query(n, rng, max_context=None):
    size = int(rng.integers(0, n - 1 if max_context is None else max_context))
    context = np.sort(rng.choice(n, size=size, replace=False))
    rest = np.setdiff1d(np.arange(n), context)
    return int(rng.choice(rest)), context


class TestSigmoid:
    def test_midpoint(self):
        assert sigmoid(0.0) == 0.5

    def test_log_four(self):
        assert sigmoid(math.log(4)) == pytest.approx(0.8, abs=1e-12)

    def test_stable_negative_tail(self):
        v = sigmoid(-50.0)
        assert v == pytest.approx(1.9287498479639178e-22, rel=1e-9)
        assert v > 0.0

    def test_extreme_arguments_finite(self):
        assert sigmoid(700.0) == 1.0
        lo = sigmoid(-700.0)
        assert 0.0 < lo < 1e-300 and np.isfinite(lo)

    def test_vectorized(self):
        x = np.array([-5.0, 0.0, 5.0])
        out = sigmoid(x)
        assert out.shape == (3,)
        assert np.all(np.diff(out) > 0)


class TestDemForward:
    def test_zero_weights_give_half(self):
        p = DemParams(
            bias=np.zeros(4),
            pair_readout=np.zeros((4, 4)),
            layer_weights=[np.zeros((3, 4)), np.zeros((2, 3))],
            layer_biases=[np.zeros(3), np.zeros(2)],
            readouts=[np.zeros((4, 3)), np.zeros((4, 2))],
        )
        acts = p.forward([0, 2])
        assert all(np.all(h == 0.5) for h in acts)

    def test_empty_context_uses_layer_bias(self):
        b1 = np.array([0.3, -1.2])
        p = DemParams(
            bias=np.zeros(3),
            pair_readout=np.zeros((3, 3)),
            layer_weights=[np.zeros((2, 3))],
            layer_biases=[b1],
            readouts=[np.zeros((3, 2))],
        )
        (h1,) = p.forward([])
        assert np.allclose(h1, sigmoid(b1))

    def test_hand_computed_single_layer(self):
        p = DemParams(
            bias=np.zeros(2),
            pair_readout=np.zeros((2, 2)),
            layer_weights=[np.array([[1.0, 0.0], [0.0, 1.0]])],
            layer_biases=[np.zeros(2)],
            readouts=[np.zeros((2, 2))],
        )
        (h1,) = p.forward([0])
        assert np.allclose(h1, [sigmoid(1.0), 0.5])

    def test_activations_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(0)
        p = random_dem(10, (6, 4), rng, scale=2.0)
        for _ in range(20):
            _, context = random_query(10, rng)
            for h in p.forward(context):
                assert np.all(h > 0.0) and np.all(h < 1.0)


class TestScore:
    def test_bias_model_ignores_context(self):
        p = BiasParams(bias=np.array([0.0, 1.3863, -2.0]))
        assert p.score(1, [0, 2]) == pytest.approx(1.3863)
        assert p.score(1, []) == pytest.approx(1.3863)
        assert conditional_probability(p, 1, [2]) == pytest.approx(0.8, abs=1e-4)

    def test_pairwise_hand_value(self):
        pair = np.zeros((3, 3))
        pair[1, 2] = pair[2, 1] = 1.0
        p = PairParams(bias=np.zeros(3), pair=pair)
        assert p.score(2, [1]) == 1.0
        assert conditional_probability(p, 2, [1]) == pytest.approx(
            sigmoid(1.0), abs=1e-12
        )

    def test_rejects_item_in_context(self):
        p = BiasParams(bias=np.zeros(3))
        with pytest.raises(ValueError):
            p.score(1, [1, 2])

    def test_zero_layer_dem_matches_pairwise_everywhere(self):
        rng = np.random.default_rng(4)
        fv = random_pairwise(9, rng)
        dem = dem_from_pairwise(fv)
        for _ in range(300):
            t, context = random_query(9, rng)
            assert dem.score(t, context) == fv.score(t, context)

    def test_pairwise_monotone_in_context_growth(self):
        rng = np.random.default_rng(5)
        fv = random_pairwise(8, rng)
        for _ in range(100):
            t, context = random_query(8, rng, max_context=5)
            rest = np.setdiff1d(np.arange(8), np.append(context, t))
            if rest.size == 0:
                continue
            j = int(rng.choice(rest))
            grown = np.sort(np.append(context, j))
            gain = fv.score(t, grown) - fv.score(t, context)
            assert gain == pytest.approx(fv.pair[j, t], abs=1e-12)

    def test_lbl_linear_in_context(self):
        rng = np.random.default_rng(6)
        p = LblParams(embed=rng.normal(0, 1, (10, 4)), bias=rng.normal(0, 1, 10))
        for _ in range(50):
            items = rng.choice(10, size=5, replace=False)
            t = int(items[0])
            a, b = np.sort(items[1:3]), np.sort(items[3:5])
            lhs = p.score(t, np.sort(items[1:5])) + p.score(t, [])
            rhs = p.score(t, a) + p.score(t, b)
            assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_lbl_bias_flag(self):
        embed = np.zeros((3, 2))
        p = LblParams(embed=embed, bias=np.array([1.0, 2.0, 3.0]), use_bias=False)
        assert p.score(0, [1]) == 0.0
        p_with = LblParams(embed=embed, bias=np.array([1.0, 2.0, 3.0]))
        assert p_with.score(0, [1]) == 1.0


class TestScoreAll:
    def test_empty_candidates(self):
        p = BiasParams(bias=np.zeros(3))
        assert p.score_all([0], []).tolist() == []

    def test_single_matches_score(self):
        rng = np.random.default_rng(7)
        p = random_pairwise(6, rng)
        assert p.score_all([0, 2], [4])[0] == p.score(4, [0, 2])

    def test_dem_batch_equals_individual_scores(self):
        rng = np.random.default_rng(8)
        p = random_dem(8, (5, 3), rng)
        context = np.array([1, 4])
        candidates = np.array([0, 3, 6])
        batch = p.score_all(context, candidates)
        single = [p.score(int(t), context) for t in candidates]
        assert batch.tolist() == single

    def test_overlap_rejected(self):
        p = BiasParams(bias=np.zeros(4))
        with pytest.raises(ValueError):
            p.score_all([0, 1], [1, 2])

    def test_score_all_matches_map_for_all_models(self):
        rng = np.random.default_rng(9)
        models = [
            BiasParams(bias=rng.normal(0, 1, 7)),
            random_pairwise(7, rng),
            LblParams(embed=rng.normal(0, 1, (7, 3)), bias=rng.normal(0, 1, 7)),
            random_dem(7, (4,), rng),
        ]
        context = np.array([0, 5])
        candidates = np.array([1, 2, 4, 6])
        for p in models:
            batch = p.score_all(context, candidates)
            assert batch.tolist() == [p.score(int(t), context) for t in candidates]


class TestExplicitEnergy:
    def test_empty_configuration(self):
        rng = np.random.default_rng(10)
        assert explicit_energy(random_pairwise(5, rng), []) == 0.0
        assert explicit_energy(BiasParams(bias=np.ones(5)), []) == 0.0

    def test_bias_singleton(self):
        p = BiasParams(bias=np.array([0.5, -1.5]))
        assert explicit_energy(p, [1]) == 1.5

    def test_pairwise_energy_difference_is_score(self):
        pair = np.zeros((3, 3))
        pair[1, 2] = pair[2, 1] = 1.0
        p = PairParams(bias=np.zeros(3), pair=pair)
        diff = explicit_energy(p, [1]) - explicit_energy(p, [1, 2])
        assert diff == p.score(2, [1]) == 1.0


class TestOracleConditional:
    def test_bias_model_agreement(self):
        rng = np.random.default_rng(11)
        p = BiasParams(bias=rng.normal(0, 2, 10))
        for _ in range(200):
            t, context = random_query(10, rng)
            delta = abs(
                conditional_probability(p, t, context) - oracle_conditional(p, t, context)
            )
            assert delta <= 1e-12

    def test_pairwise_agreement_many_queries(self):
        rng = np.random.default_rng(12)
        p = random_pairwise(12, rng)
        worst = 0.0
        for _ in range(1000):
            t, context = random_query(12, rng)
            worst = max(
                worst,
                abs(
                    conditional_probability(p, t, context)
                    - oracle_conditional(p, t, context)
                ),
            )
        assert worst <= 1e-12

    def test_zero_parameters_give_half(self):
        p = PairParams(bias=np.zeros(5), pair=np.zeros((5, 5)))
        assert oracle_conditional(p, 3, [0, 1]) == 0.5


class TestParamValidation:
    def test_pair_symmetry_enforced(self):
        w = np.zeros((3, 3))
        w[0, 1] = 1.0
        with pytest.raises(ValueError):
            PairParams(bias=np.zeros(3), pair=w)

    def test_pair_zero_diagonal_enforced(self):
        w = np.eye(3)
        with pytest.raises(ValueError):
            PairParams(bias=np.zeros(3), pair=w)

    def test_dem_shape_chain_enforced(self):
        with pytest.raises(ValueError):
            DemParams(
                bias=np.zeros(4),
                pair_readout=np.zeros((4, 4)),
                layer_weights=[np.zeros((3, 5))],
                layer_biases=[np.zeros(3)],
                readouts=[np.zeros((4, 3))],
            )

    def test_dem_diagonal_enforced(self):
        with pytest.raises(ValueError):
            DemParams(bias=np.zeros(3), pair_readout=np.eye(3))
