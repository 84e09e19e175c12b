import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from record_collector import exact
from record_collector.distribution import ProbabilityVector, mandelbrot, uniform_pmf
from record_collector.exact import (
    ExpectationRow,
    ExpectationTable,
    Method,
    expected_completion_maxmin,
    expected_distinct_records,
    expected_draws,
    expected_draws_dp,
    expected_draws_naive,
    expected_draws_uniform,
    expected_increment_naive,
)
from record_collector.exceptions import InfeasibleTargetError, ResourceLimitError

from oracles import distinct_records_by_enumeration, draws_by_tail_series, random_pmf

pmfs = st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6).map(ProbabilityVector.from_weights)


class TestDistinctRecords:
    def test_zero_draws(self):
        assert expected_distinct_records(mandelbrot(10), 0) == 0

    def test_one_draw(self):
        assert expected_distinct_records(mandelbrot(10), 1) == pytest.approx(1.0, abs=1e-14)

    def test_two_fair_coins(self):
        assert expected_distinct_records(ProbabilityVector([0.5, 0.5]), 2) == 1.5

    def test_table_first_parenthetical(self):
        # 2.80 draws from Mandelbrot(5, 1.75, 0.3) -> 1.97 distinct words
        assert round(expected_distinct_records(mandelbrot(5), 2.80), 2) == 1.97

    @pytest.mark.parametrize("probs", [[0.5, 0.5], [0.7, 0.2, 0.1], [0.4, 0.3, 0.2, 0.1]])
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_matches_sequence_enumeration(self, probs, n):
        p = ProbabilityVector(probs)
        assert expected_distinct_records(p, n) == pytest.approx(
            distinct_records_by_enumeration(list(p.probs), n), rel=1e-13
        )

    def test_negative_n(self):
        with pytest.raises(ValueError):
            expected_distinct_records(uniform_pmf(3), -1)

    def test_array_input(self):
        p = mandelbrot(8)
        out = expected_distinct_records(p, [0, 1, 2.5])
        assert out.shape == (3,)
        assert out[2] == expected_distinct_records(p, 2.5)

    @given(pmfs)
    @settings(max_examples=40, deadline=None)
    def test_monotone_bounded_concave(self, p):
        n = np.arange(0, 200)
        r = expected_distinct_records(p, n)
        assert np.all(np.diff(r) >= -1e-12)
        assert np.all(r <= p.m + 1e-12)
        assert np.all(np.diff(r, 2) <= 1e-12)


class TestUniformClosedForm:
    def test_first_draw(self):
        assert expected_draws_uniform(10, 1) == 1

    def test_two(self):
        assert expected_draws_uniform(2, 2) == 3

    def test_three(self):
        assert expected_draws_uniform(3, 3) == pytest.approx(5.5, rel=1e-15)

    def test_infeasible(self):
        with pytest.raises(InfeasibleTargetError):
            expected_draws_uniform(3, 4)


class TestMaxMin:
    def test_single(self):
        assert expected_completion_maxmin(ProbabilityVector([1.0])) == 1

    def test_fair_coin(self):
        assert expected_completion_maxmin(ProbabilityVector([0.5, 0.5])) == pytest.approx(3.0)

    def test_biased_coin(self):
        # 3/2 + 3 - 1
        assert expected_completion_maxmin(ProbabilityVector([2 / 3, 1 / 3])) == pytest.approx(3.5)

    def test_cap(self):
        with pytest.raises(ResourceLimitError, match="cap") as info:
            expected_completion_maxmin(uniform_pmf(26))
        assert info.value.cap == 25

    def test_more_than_low_bits(self):
        # m = 22 exercises the high-bit loop; compare with the closed form
        assert expected_completion_maxmin(uniform_pmf(22)) == pytest.approx(
            expected_draws_uniform(22, 22), rel=1e-10
        )

    def test_against_tail_series(self):
        rng = np.random.default_rng(11)
        for m in (2, 3, 4, 5):
            p = ProbabilityVector(random_pmf(rng, m, floor=0.02))
            assert expected_completion_maxmin(p) == pytest.approx(
                draws_by_tail_series(list(p.probs), m), rel=1e-9
            )


class TestNaive:
    def test_increment_uniform(self):
        for m in (2, 5, 9):
            assert expected_increment_naive(uniform_pmf(m), 2) == pytest.approx(m / (m - 1), rel=1e-14)

    def test_increment_biased_coin(self):
        assert expected_increment_naive(ProbabilityVector([2 / 3, 1 / 3]), 2) == pytest.approx(2.5)

    def test_increment_table_m5(self):
        # 1 + E[X_2] = 2.80539
        assert expected_increment_naive(mandelbrot(5), 2) == pytest.approx(1.80, abs=0.006)

    def test_increment_needs_k_at_least_two(self):
        with pytest.raises(ValueError):
            expected_increment_naive(uniform_pmf(3), 1)

    def test_k_one(self):
        t = expected_draws_naive(mandelbrot(7), 1)
        assert [(r.k, r.value) for r in t] == [(1, 1.0)]

    def test_table_column_m5(self):
        t = expected_draws_naive(mandelbrot(5), 5)
        np.testing.assert_allclose(t.values[2:], [6.08, 12.42, 28.46], atol=0.005)

    def test_table_m10_k8(self):
        assert expected_draws_naive(mandelbrot(10), 8).value(8) == pytest.approx(43.66, abs=0.005)

    def test_infeasible(self):
        with pytest.raises(InfeasibleTargetError):
            expected_draws_naive(uniform_pmf(3), 4)

    def test_work_cap(self):
        assert exact.naive_work(10, 8) == sum(math.perm(10, d) for d in range(1, 8))
        with pytest.raises(ResourceLimitError, match="cap is 1000") as info:
            expected_draws_naive(uniform_pmf(10), 5, max_work=1000)
        assert info.value.estimated == exact.naive_work(10, 5)

    def test_block_boundaries_do_not_matter(self, monkeypatch):
        p = ProbabilityVector(random_pmf(np.random.default_rng(5), 8))
        ref = expected_draws_naive(p, 8).values
        monkeypatch.setattr(exact, "_BLOCK", 7)
        np.testing.assert_allclose(expected_draws_naive(p, 8).values, ref, rtol=1e-13)

    def test_against_literal_tuple_sum(self):
        # the formula written out with itertools, for a tiny case
        p = ProbabilityVector([0.1, 0.2, 0.3, 0.4])
        pr = list(p.probs)
        total = 1.0
        for depth in range(1, 4):
            for tup in itertools.permutations(range(4), depth):
                num = math.prod(pr[i] for i in tup)
                den = math.prod(1 - sum(pr[i] for i in tup[: s + 1]) for s in range(depth))
                total += num / den
        assert expected_draws_naive(p, 4).value(4) == pytest.approx(total, rel=1e-13)


class TestDP:
    def test_biased_coin(self):
        assert expected_draws_dp(ProbabilityVector([2 / 3, 1 / 3]), 2).value(2) == pytest.approx(3.5)

    def test_uniform_three(self):
        assert expected_draws_dp(uniform_pmf(3), 3).value(3) == pytest.approx(5.5, rel=1e-14)

    def test_table_m10_k8(self):
        assert expected_draws_dp(mandelbrot(10), 8).value(8) == pytest.approx(43.66, abs=0.005)

    def test_state_cap(self):
        assert exact.dp_state_count(10, 3) == 1 + 10 + 45
        with pytest.raises(ResourceLimitError, match="56 subset states"):
            expected_draws_dp(uniform_pmf(10), 3, max_states=50)

    def test_large_support_small_k(self):
        # m > 64 must work: index arrays, not bitmasks
        p = mandelbrot(200)
        t = expected_draws_dp(p, 3)
        ref = expected_draws_naive(p, 3)
        np.testing.assert_allclose(t.values, ref.values, rtol=1e-12)

    def test_against_tail_series(self):
        rng = np.random.default_rng(3)
        for m in (2, 3, 4, 5):
            p = ProbabilityVector(random_pmf(rng, m, spread=0.5, floor=0.02))
            vals = expected_draws_dp(p, m).values
            for k in range(1, m + 1):
                assert vals[k - 1] == pytest.approx(
                    draws_by_tail_series(list(p.probs), k), rel=1e-9
                )


class TestProperties:
    @given(pmfs)
    @settings(max_examples=60, deadline=None)
    def test_dp_equals_naive(self, p):
        a = expected_draws_naive(p, p.m).values
        b = expected_draws_dp(p, p.m).values
        np.testing.assert_allclose(a, b, rtol=1e-10)

    @given(pmfs)
    @settings(max_examples=60, deadline=None)
    def test_full_collection_equals_maxmin(self, p):
        assert expected_draws_naive(p, p.m).value(p.m) == pytest.approx(
            expected_completion_maxmin(p), rel=1e-10
        )

    @given(pmfs)
    @settings(max_examples=40, deadline=None)
    def test_monotone_and_lower_bound(self, p):
        t = expected_draws_dp(p, p.m)
        vals = np.array(t.values)
        assert vals[0] == pytest.approx(1.0, abs=1e-14)
        assert np.all(np.diff(vals) > 0)
        assert np.all(vals[1:] > np.arange(2, p.m + 1))

    @given(pmfs, st.randoms(use_true_random=False))
    @settings(max_examples=40, deadline=None)
    def test_permutation_invariance(self, p, rnd):
        perm = list(range(p.m))
        rnd.shuffle(perm)
        q = ProbabilityVector(p.probs[perm])
        np.testing.assert_allclose(
            expected_draws_dp(q, q.m).values, expected_draws_dp(p, p.m).values, rtol=1e-12
        )
        np.testing.assert_allclose(
            expected_draws_naive(q, q.m).values, expected_draws_naive(p, p.m).values, rtol=1e-12
        )

    @pytest.mark.parametrize("m", range(1, 11))
    def test_uniform_reduction(self, m):
        naive = expected_draws_naive(uniform_pmf(m), m).values
        closed = [expected_draws_uniform(m, k) for k in range(1, m + 1)]
        np.testing.assert_allclose(naive, closed, rtol=1e-12)


class TestExpectationTable:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            ExpectationTable([ExpectationRow(2, 3.0, Method.DP), ExpectationRow(1, 1.0, Method.DP)], m=2)

    def test_rejects_below_k(self):
        with pytest.raises(ValueError):
            ExpectationTable([ExpectationRow(3, 2.0, Method.MONTECARLO)], m=3)

    def test_rejects_non_increasing_exact(self):
        with pytest.raises(ValueError):
            ExpectationTable([ExpectationRow(1, 1.0, Method.DP), ExpectationRow(2, 1.0, Method.DP)], m=2)

    def test_approx_rows_may_undershoot(self):
        t = ExpectationTable([ExpectationRow(1, 0.41, Method.APPROX)], m=500)
        assert t.value(1) == 0.41

    def test_to_dict(self):
        d = expected_draws(uniform_pmf(2), 2, method="uniform").to_dict()
        assert d["rows"][1] == {"k": 2, "value": 3.0, "method": "uniform-closed-form", "stderr": None}


class TestDispatch:
    def test_methods_agree(self):
        p = mandelbrot(6)
        dp = expected_draws(p, 6, "dp").value(6)
        assert expected_draws(p, 6, "naive").value(6) == pytest.approx(dp, rel=1e-12)
        assert expected_draws(p, 6, "maxmin").value(6) == pytest.approx(dp, rel=1e-12)

    def test_maxmin_needs_full_collection(self):
        with pytest.raises(ValueError):
            expected_draws(mandelbrot(6), 3, "maxmin")

    def test_uniform_needs_equal_probs(self):
        with pytest.raises(ValueError):
            expected_draws(mandelbrot(6), 3, "uniform")

    def test_unknown(self):
        with pytest.raises(ValueError):
            expected_draws(mandelbrot(6), 3, "magic")
