"""Entropy pooling, the uncertainty gap, and external score ingestion."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raggain import (
    GenerationLogError,
    GenerationRecord,
    PredictorError,
    ScoreTableError,
    adapt_external_scores,
    pool_entropy,
    uncertainty_gap,
)


def record(qid="q1", mode="norag", entropies=(1.0,), answer="an answer"):
    return GenerationRecord(qid=qid, mode=mode, answer=answer, token_entropies=tuple(entropies))


class TestGenerationRecord:
    def test_empty_answer_rejected(self):
        with pytest.raises(GenerationLogError, match="empty answer"):
            record(answer="   ")

    def test_missing_entropies_rejected(self):
        with pytest.raises(GenerationLogError, match="entropies"):
            GenerationRecord(qid="q", mode="rag", answer="text", token_entropies=())

    def test_negative_entropy_rejected(self):
        with pytest.raises(GenerationLogError, match="entropy"):
            record(entropies=(0.5, -0.1))

    def test_unknown_mode_rejected(self):
        with pytest.raises(GenerationLogError, match="mode"):
            record(mode="hybrid")


class TestPoolEntropy:
    def test_mean(self):
        assert pool_entropy([1, 2, 3], "mean") == pytest.approx(2.0)

    def test_singleton_all_strategies(self):
        for strategy in ("mean", "geometric_mean", "harmonic_mean", "min", "max"):
            assert pool_entropy([5.0], strategy) == pytest.approx(5.0)

    def test_geometric(self):
        assert pool_entropy([1, 4], "geometric_mean") == pytest.approx(2.0)

    def test_harmonic(self):
        assert pool_entropy([1, 4], "harmonic_mean") == pytest.approx(1.6)

    def test_empty_rejected(self):
        with pytest.raises(PredictorError, match="empty"):
            pool_entropy([], "mean")

    def test_zero_rejected_for_log_based(self):
        for strategy in ("geometric_mean", "harmonic_mean"):
            with pytest.raises(PredictorError, match=strategy):
                pool_entropy([1.0, 0.0], strategy)

    def test_unknown_strategy(self):
        with pytest.raises(PredictorError):
            pool_entropy([1.0], "median")

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(min_value=1e-3, max_value=50.0), min_size=1, max_size=40))
    def test_pool_ordering(self, entropies):
        mn = pool_entropy(entropies, "min")
        hm = pool_entropy(entropies, "harmonic_mean")
        gm = pool_entropy(entropies, "geometric_mean")
        am = pool_entropy(entropies, "mean")
        mx = pool_entropy(entropies, "max")
        assert mn <= hm + 1e-9
        assert hm <= gm + 1e-9
        assert gm <= am + 1e-9
        assert am <= mx + 1e-9


class TestUncertaintyGap:
    def test_identical_sequences_zero(self):
        norag = record(mode="norag", entropies=(0.4, 1.1))
        rag = record(mode="rag", entropies=(0.4, 1.1))
        for strategy in ("mean", "geometric_mean", "harmonic_mean", "min", "max"):
            assert uncertainty_gap(norag, rag, strategy) == pytest.approx(0.0, abs=1e-15)

    def test_max_pooling_default(self):
        norag = record(mode="norag", entropies=(1.0, 2.0))
        rag = record(mode="rag", entropies=(0.5, 0.3))
        assert uncertainty_gap(norag, rag) == pytest.approx(1.5)

    def test_sign_when_rag_more_uncertain(self):
        norag = record(mode="norag", entropies=(1.0,))
        rag = record(mode="rag", entropies=(3.0,))
        assert uncertainty_gap(norag, rag, "max") == pytest.approx(-2.0)

    def test_antisymmetry(self):
        a = record(mode="norag", entropies=(0.2, 0.9, 1.7))
        b = record(mode="rag", entropies=(0.5, 0.1))
        flipped_a = record(mode="rag", entropies=a.token_entropies)
        flipped_b = record(mode="norag", entropies=b.token_entropies)
        for strategy in ("mean", "min", "max"):
            assert uncertainty_gap(a, b, strategy) == pytest.approx(
                -uncertainty_gap(flipped_b, flipped_a, strategy), abs=1e-12
            )

    def test_qid_mismatch(self):
        with pytest.raises(PredictorError, match="mismatch"):
            uncertainty_gap(record(qid="q1", mode="norag"), record(qid="q2", mode="rag"))

    def test_mode_order_enforced(self):
        with pytest.raises(PredictorError, match="mode"):
            uncertainty_gap(record(mode="rag"), record(mode="rag"))


class TestAdaptExternalScores:
    def test_full_coverage_passes(self):
        column = {"q1": 0.5, "q2": -1.25}
        assert adapt_external_scores(column, {"q1", "q2"}) == column

    def test_missing_qid_named(self):
        with pytest.raises(ScoreTableError, match="q2"):
            adapt_external_scores({"q1": 0.5}, {"q1", "q2"})

    def test_extra_qid_named(self):
        with pytest.raises(ScoreTableError, match="q9"):
            adapt_external_scores({"q1": 0.5, "q9": 0.1}, {"q1"})

    def test_non_finite_rejected(self):
        with pytest.raises(ScoreTableError, match="non-finite"):
            adapt_external_scores({"q1": math.nan}, {"q1"})
