import math

import numpy as np
import pytest

from cooclearn.baselines import (
    build_covisit,
    cvg_score,
    cvg_score_all,
    lrw_score,
    lrw_score_all,
    normcvg_score,
    normcvg_score_all,
)
from cooclearn.corpus import Corpus, as_corpus


@pytest.fixture
def abc_graph():
    # records {A,B}, {A,B}, {A,C} with A=0, B=1, C=2
    corpus = as_corpus([[0, 1], [0, 1], [0, 2]])
    return build_covisit(corpus)


class TestBuildCovisit:
    def test_hand_counts(self, abc_graph):
        counts = abc_graph.counts.toarray()
        assert counts[0, 1] == counts[1, 0] == 2
        assert counts[0, 2] == counts[2, 0] == 1
        assert counts[1, 2] == counts[2, 1] == 0
        assert np.all(np.diag(counts) == 0)
        assert abc_graph.item_freq.tolist() == [3, 2, 1]

    def test_single_item_records_contribute_nothing(self):
        graph = build_covisit(as_corpus([[0], [1], [2]]))
        assert graph.counts.nnz == 0
        assert graph.item_freq.tolist() == [1, 1, 1]

    def test_empty_corpus(self):
        graph = build_covisit(Corpus(4, []))
        assert graph.counts.shape == (4, 4)
        assert graph.counts.nnz == 0

    def test_counts_bounded_by_frequencies(self):
        corpus = as_corpus([[0, 1, 2], [0, 1], [1, 2, 3], [0, 3]])
        graph = build_covisit(corpus)
        counts = graph.counts.toarray()
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert counts[i, j] <= min(
                        graph.item_freq[i], graph.item_freq[j]
                    )


class TestCvg:
    def test_hand_scores(self, abc_graph):
        assert cvg_score(abc_graph, [0], 1) == 2.0
        assert cvg_score(abc_graph, [0], 2) == 1.0

    def test_disjoint_context_scores_zero(self, abc_graph):
        assert cvg_score(abc_graph, [1], 2) == 0.0

    def test_multi_item_context(self, abc_graph):
        assert cvg_score(abc_graph, [0, 1], 2) == 1.0

    def test_rejects_candidate_in_context(self, abc_graph):
        with pytest.raises(ValueError):
            cvg_score(abc_graph, [0, 1], 1)

    def test_score_all_matches_single(self, abc_graph):
        batch = cvg_score_all(abc_graph, [0], [1, 2])
        assert batch.tolist() == [2.0, 1.0]


class TestNormCvg:
    def test_cosine_hand_value(self, abc_graph):
        got = normcvg_score(abc_graph, [0], 1)
        assert got == pytest.approx(2 / math.sqrt(3 * 2), abs=1e-12)

    def test_uniform_frequencies_preserve_cvg_ranking(self):
        # 4-cycle of pair records: every item appears twice
        corpus = as_corpus([[0, 1], [1, 2], [2, 3], [0, 3]])
        graph = build_covisit(corpus)
        assert graph.item_freq.tolist() == [2, 2, 2, 2]
        context = np.array([0])
        cands = np.array([1, 2, 3])
        plain = cvg_score_all(graph, context, cands)
        normed = normcvg_score_all(graph, context, cands)
        assert np.array_equal(np.argsort(-plain), np.argsort(-normed))

    def test_zero_cooccurrence_scores_zero(self, abc_graph):
        assert normcvg_score(abc_graph, [1], 2) == 0.0

    def test_zero_frequency_candidate_scores_zero(self):
        corpus = Corpus(3, [np.array([0, 1])])
        graph = build_covisit(corpus)
        assert normcvg_score(graph, [0], 2) == 0.0

    def test_source_and_target_norms(self, abc_graph):
        # counts(A,B)=2, freq A=3, B=2
        assert normcvg_score(abc_graph, [0], 1, norm="source") == pytest.approx(2 / 3)
        assert normcvg_score(abc_graph, [0], 1, norm="target") == pytest.approx(2 / 2)
        with pytest.raises(ValueError):
            normcvg_score(abc_graph, [0], 1, norm="bogus")


class TestLrw:
    @pytest.fixture
    def walk_graph(self):
        # counts(1,2)=2, counts(1,3)=1 over four items; item 0 isolated
        corpus = as_corpus([[1, 2], [1, 2], [1, 3]])
        records = [np.array(r) for r in ([1, 2], [1, 2], [1, 3])]
        return build_covisit(Corpus(4, records))

    def test_single_step_row_normalization(self, walk_graph):
        assert lrw_score(walk_graph, [1], 2, steps=1) == pytest.approx(2 / 3)
        assert lrw_score(walk_graph, [1], 3, steps=1) == pytest.approx(1 / 3)

    def test_single_step_equals_count_over_degree(self, walk_graph):
        counts = walk_graph.counts.toarray().astype(float)
        degree = counts.sum(axis=1)
        context = np.array([2, 3])
        for t in (0, 1):
            want = sum(
                counts[i, t] / degree[i] for i in context if degree[i] > 0
            )
            assert lrw_score(walk_graph, context, t, steps=1) == pytest.approx(want)

    def test_isolated_target_scores_zero(self, walk_graph):
        for steps in (1, 2, 3, 4):
            assert lrw_score(walk_graph, [1], 0, steps=steps) == 0.0

    def test_transition_rows_sum_to_one_or_zero(self, walk_graph):
        P = walk_graph.transition_matrix()
        sums = np.asarray(P.sum(axis=1)).ravel()
        for s in sums:
            assert abs(s - 1.0) <= 1e-12 or s == 0.0

    def test_aggregate_accumulates_over_steps(self, walk_graph):
        s1 = lrw_score(walk_graph, [2], 3, steps=1)
        s2_only = lrw_score(walk_graph, [2], 3, steps=2, aggregate=False)
        s2_agg = lrw_score(walk_graph, [2], 3, steps=2)
        assert s2_agg == pytest.approx(s1 + s2_only)

    def test_steps_validated(self, walk_graph):
        with pytest.raises(ValueError):
            lrw_score(walk_graph, [1], 0, steps=0)

    def test_score_all_matches_single(self, walk_graph):
        cands = np.array([0, 2, 3])
        batch = lrw_score_all(walk_graph, [1], cands, steps=2)
        single = [lrw_score(walk_graph, [1], int(t), steps=2) for t in cands]
        assert batch.tolist() == pytest.approx(single)
