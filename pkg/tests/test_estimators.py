import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tankproblem.distributions import order_stat_sums
from tankproblem.errors import IterationError
from tankproblem.estimators import (
    est_ball_continuous,
    est_ball_discrete,
    est_d1_cont,
    est_d1_cont_second,
    est_d1_lth,
    est_d1_max,
    est_d1_spread,
    est_square_continuous,
    est_square_discrete,
    est_square_recursive,
    optimal_alpha,
    var_formulas,
    weighted_estimate,
    weighted_variance,
)


class TestOneDimensionalDiscrete:
    def test_single_observation_doubles(self):
        assert est_d1_max(50, 1).estimate == 99

    @pytest.mark.parametrize("n", [1, 4, 17])
    def test_full_observation_returns_max(self, n):
        assert est_d1_max(n, n).estimate == n

    def test_direct_substitution(self):
        assert est_d1_max(9, 5).estimate == 9.8

    def test_impossible_observation(self):
        with pytest.raises(ValueError):
            est_d1_max(4, 5)

    def test_result_metadata(self):
        result = est_d1_max(9, 5)
        assert result.estimator == "d1_max"
        assert not result.approximate
        assert result.inputs == {"m": 9, "k": 5}
        assert "m*(k+1)/k" in result.formula

    def test_unbiased_exactly(self):
        # oracle: E over every 4-subset of {1..12}
        for N in range(1, 15):
            for k in range(1, N + 1):
                sums = order_stat_sums(N, k)
                e_max = Fraction(sums.sum_val[k - 1], sums.count)
                assert e_max * Fraction(k + 1, k) - 1 == N


class TestSpread:
    def test_full_sample_recovers_population(self):
        assert est_d1_spread(9, 10).estimate == 10

    def test_direct_substitution(self):
        assert est_d1_spread(50, 3).estimate == 99

    def test_needs_two_observations(self):
        with pytest.raises(ValueError):
            est_d1_spread(5, 1)
        with pytest.raises(ValueError):
            est_d1_spread(2, 4)  # spread below k-1

    def test_unbiased_exactly_at_spec_point(self):
        sums = order_stat_sums(12, 4)
        e_spread = Fraction(sums.sum_val[3] - sums.sum_val[0], sums.count)
        assert e_spread * Fraction(5, 3) - 1 == 12


class TestLthLargest:
    def test_order_one_is_the_classic_rule(self):
        for m in range(5, 30):
            for k in range(1, m + 1):
                assert est_d1_lth(m, k, 1).estimate == est_d1_max(m, k).estimate

    def test_direct_substitution(self):
        assert est_d1_lth(8, 5, 2).estimate == 11

    def test_order_beyond_sample(self):
        with pytest.raises(ValueError):
            est_d1_lth(8, 5, 6)

    def test_unbiased_exactly(self):
        for N in range(1, 15):
            for k in range(1, N + 1):
                sums = order_stat_sums(N, k)
                for order in range(1, k + 1):
                    e_stat = Fraction(sums.sum_val[k - order], sums.count)
                    assert e_stat * Fraction(k + 1, k - order + 1) - 1 == N


class TestContinuous:
    def test_direct_substitution(self):
        assert est_d1_cont(0.9, 9).estimate == pytest.approx(1.0)
        assert est_d1_cont(0.5, 1).estimate == 1.0

    def test_second_largest_scaling(self):
        assert est_d1_cont_second(0.5, 3).estimate == 1.0

    def test_positive_observation_required(self):
        with pytest.raises(ValueError):
            est_d1_cont(0.0, 3)
        with pytest.raises(ValueError):
            est_d1_cont_second(-1.0, 3)


class TestVarianceFormulas:
    def test_zero_at_full_sample(self):
        v = var_formulas(6, 6)
        assert v.var_xk == 0 and v.var_xk1 == 0 and v.cov == 0

    def test_spec_values(self):
        v = var_formulas(10, 5)
        assert v.var_xk == Fraction(11, 7)
        assert v.var_xk1 == Fraction(55, 14)
        assert v.var_xk1 / v.var_xk == Fraction(5, 2)

    def test_discrete_against_oracle(self):
        for N in range(2, 15):
            for k in range(2, N + 1):
                sums = order_stat_sums(N, k)
                v = var_formulas(N, k)
                for j, scale, expected in (
                    (k - 1, Fraction(k + 1, k), v.var_xk),
                    (k - 2, Fraction(k + 1, k - 1), v.var_xk1),
                ):
                    mean = Fraction(sums.sum_val[j], sums.count)
                    second = Fraction(sums.sum_sq[j], sums.count)
                    assert (second - mean * mean) * scale**2 == expected

    def test_second_largest_has_strictly_more_variance(self):
        for N in range(3, 51):
            for k in range(2, N):
                v = var_formulas(N, k)
                assert v.var_xk1 > v.var_xk
                assert v.var_xk1_cont > v.var_xk_cont


class TestOptimalAlpha:
    def test_equal_independent_variances(self):
        assert optimal_alpha(Fraction(4), Fraction(4)) == Fraction(1, 2)

    def test_independent_asset_weights(self):
        assert optimal_alpha(Fraction(1), Fraction(4)) == Fraction(4, 5)

    def test_serial_statistics_prefer_the_maximum(self):
        v = var_formulas(10, 3)
        assert optimal_alpha(v.var_xk, v.var_xk1, v.cov) == 1
        assert optimal_alpha(v.var_xk_cont, v.var_xk1_cont, v.cov_cont) == 1

    def test_degenerate_flat_quadratic(self):
        assert optimal_alpha(Fraction(2), Fraction(2), Fraction(2)) is None

    def test_degenerate_linear(self):
        # var_a + var_b = 2 cov but different variances: linear, endpoint wins
        assert optimal_alpha(Fraction(1), Fraction(3), Fraction(2)) == 1
        assert optimal_alpha(Fraction(3), Fraction(1), Fraction(2)) == 0

    def test_alpha_one_beats_interior_grid(self):
        v = var_formulas(20, 4)
        best = weighted_variance(Fraction(1), v.var_xk, v.var_xk1, v.cov)
        for tenth in range(10):
            alpha = Fraction(tenth, 10)
            assert best <= weighted_variance(alpha, v.var_xk, v.var_xk1, v.cov)


class TestWeightedEstimate:
    def test_endpoints(self):
        assert weighted_estimate(1, 10.0, 12.0) == 10.0
        assert weighted_estimate(0, 10.0, 12.0) == 12.0

    def test_midpoint(self):
        assert weighted_estimate(0.5, 10, 12) == 11

    def test_alpha_range_enforced(self):
        with pytest.raises(ValueError):
            weighted_estimate(1.5, 1.0, 2.0)


class TestSquare:
    def test_discrete_substitution(self):
        assert est_square_discrete(101, 10, 2).estimate == 105
        assert est_square_discrete(101, 10, 2).approximate

    def test_minimum_information(self):
        result = est_square_discrete(1, 7, 3)
        assert result.estimate == 0
        assert result.flags == ("minimum_information",)

    def test_below_observation_flagged(self):
        result = est_square_discrete(2, 5, 2)
        assert result.estimate < 2
        assert result.flags == ("estimate_below_observation",)

    def test_continuous_collapses_to_line(self):
        assert est_square_continuous(1.0, 1, 1).estimate == 2.0
        assert est_square_continuous(1.0, 1, 1).estimate == est_d1_cont(1.0, 1).estimate

    def test_continuous_substitution(self):
        assert est_square_continuous(0.99, 10, 2).estimate == pytest.approx(1.0395)
        assert not est_square_continuous(0.99, 10, 2).approximate

    def test_discrete_line_collapse_differs_by_inverse_k(self):
        # (m-1)(k+1)/k vs the exact rule m(k+1)/k - 1: gap is exactly 1/k
        for k in range(1, 12):
            for m in range(k, 40):
                exact_rule = Fraction(m * (k + 1), k) - 1
                asymptotic = Fraction((m - 1) * (k + 1), k)
                assert exact_rule - asymptotic == Fraction(1, k)
                assert abs(est_d1_max(m, k).estimate
                           - est_square_discrete(m, k, 1).estimate
                           ) <= 1 / k + 1e-12


class TestBall:
    def test_discrete_minimum_information(self):
        result = est_ball_discrete(1, 9)
        assert result.estimate == 0
        assert result.flags == ("minimum_information",)

    def test_discrete_substitution(self):
        assert est_ball_discrete(10001, 10).estimate == pytest.approx(
            math.sqrt(10000 * 11 / 10))

    def test_discrete_rejects_zero(self):
        with pytest.raises(ValueError):
            est_ball_discrete(0, 3)

    def test_continuous_substitution(self):
        assert est_ball_continuous(1.0, 10, 2).estimate == pytest.approx(1.05)

    def test_continuous_scaling_decreases_with_k(self):
        estimates = [est_ball_continuous(1.0, k, 2).estimate for k in range(1, 30)]
        assert all(a > b for a, b in zip(estimates, estimates[1:]))
        assert all(e > 1.0 for e in estimates)


class TestRecursive:
    def test_constant_map_when_max_y_is_one(self):
        result = est_square_recursive(80, 1, 5, n0=100)
        assert result.converged
        assert result.estimate == pytest.approx(math.sqrt(80 * 6 / 5 - 1))

    def test_fixed_point_matches_quadratic_root(self):
        # the fixed point solves 50 x^2 - 5049 x - 5050 = 0 at maxima 100, k=50
        root = (5049 + math.sqrt(5049**2 + 4 * 50 * 5050)) / 100
        result = est_square_recursive(100, 100, 50, n0=100)
        assert result.converged
        assert result.estimate == pytest.approx(root, abs=1e-6)
        assert abs(result.estimate - 100) / 100 < 0.03

    def test_initial_guess_validated(self):
        with pytest.raises(ValueError):
            est_square_recursive(10, 12, 3, n0=5)

    def test_radicand_stays_positive_on_legal_inputs(self):
        # max_x >= 1 keeps the radicand >= (k+1)/k - 1 = 1/k > 0, so the
        # error branch is unreachable from valid inputs; the whole small
        # grid must converge cleanly.
        for max_x in (1, 2, 7):
            for max_y in (1, 2, 7):
                for k in (1, 2, 9):
                    result = est_square_recursive(max_x, max_y, k,
                                                  n0=max(max_x, max_y))
                    assert result.converged
                    assert result.estimate >= 0

    def test_iteration_budget_exhaustion_reported(self):
        result = est_square_recursive(100, 100, 50, n0=1000, max_iter=1)
        assert not result.converged
        assert result.iterations == 1

    @given(
        max_x=st.integers(2, 60),
        max_y=st.integers(2, 60),
        k=st.integers(2, 30),
    )
    @settings(max_examples=60, deadline=None)
    def test_two_starting_points_agree(self, max_x, max_y, k):
        n0 = max(max_x, max_y)
        try:
            first = est_square_recursive(max_x, max_y, k, n0=n0)
            second = est_square_recursive(max_x, max_y, k, n0=10 * n0)
        except IterationError:
            return
        if first.converged and second.converged:
            assert first.estimate == pytest.approx(second.estimate, abs=1e-7)


class TestMonotonicity:
    @given(m=st.integers(5, 500), k=st.integers(1, 5))
    @settings(max_examples=50, deadline=None)
    def test_increasing_in_statistic(self, m, k):
        assert est_d1_max(m + 1, k).estimate > est_d1_max(m, k).estimate
        assert (est_square_discrete(m + 1, k, 2).estimate
                > est_square_discrete(m, k, 2).estimate)
        assert (est_ball_discrete(m + 1, k).estimate
                > est_ball_discrete(m, k).estimate)

    @given(m=st.integers(30, 500), k=st.integers(1, 20))
    @settings(max_examples=50, deadline=None)
    def test_weakly_decreasing_in_sample_size(self, m, k):
        assert est_d1_max(m, k).estimate >= est_d1_max(m, k + 1).estimate
        assert (est_square_continuous(float(m), k, 2).estimate
                >= est_square_continuous(float(m), k + 1, 2).estimate)

    @given(m=st.integers(25, 400), k=st.integers(1, 12))
    @settings(max_examples=50, deadline=None)
    def test_exact_estimators_never_undershoot_the_maximum(self, m, k):
        assert est_d1_max(m, k).estimate >= m
        assert est_d1_cont(float(m), k).estimate >= m
        assert est_square_continuous(float(m), k, 3).estimate >= m
        assert est_ball_continuous(float(m), k, 2).estimate >= m
