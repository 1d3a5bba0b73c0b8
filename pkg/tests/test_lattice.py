import math
from itertools import product

import numpy as np
import pytest

from tankproblem.errors import BudgetExceeded
from tankproblem.lattice import (
    attainable_m1,
    ball_lattice_points,
    ball_volume,
    count_ball,
    count_square,
    gauss_circle_error,
)


def brute_count(r_sq, dim):
    """Scan the bounding cube coordinate by coordinate."""
    bound = math.isqrt(r_sq)
    return sum(
        1
        for point in product(range(-bound, bound + 1), repeat=dim)
        if sum(c * c for c in point) <= r_sq
    )


class TestCountBall:
    def test_origin_only(self):
        assert count_ball(0, 2) == 1

    def test_small_disks(self):
        assert count_ball(1, 2) == brute_count(1, 2) == 5
        assert count_ball(4, 2) == brute_count(4, 2) == 13

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_against_brute_force_scan(self, dim):
        for r_sq in range(0, 65, 7):
            assert count_ball(r_sq, dim) == brute_count(r_sq, dim)

    def test_monotone_in_radius(self):
        counts = [count_ball(r_sq, 2) for r_sq in range(50)]
        assert all(a <= b for a, b in zip(counts, counts[1:]))

    def test_monotone_in_dimension(self):
        # dim-L solutions embed into dim-(L+1) with a zero coordinate
        for r_sq in (0, 3, 10, 30):
            for dim in (1, 2, 3):
                assert count_ball(r_sq, dim + 1) >= count_ball(r_sq, dim)

    def test_octant_reconstruction(self):
        # 2D counts decompose by sign symmetry: origin + 4 * axis arm
        # + 4 * open quadrant
        for r_sq in (1, 2, 4, 25, 100):
            bound = math.isqrt(r_sq)
            axis = bound  # points (x, 0), x > 0
            quadrant = sum(
                1
                for x in range(1, bound + 1)
                for y in range(1, bound + 1)
                if x * x + y * y <= r_sq
            )
            assert count_ball(r_sq, 2) == 1 + 4 * axis + 4 * quadrant

    def test_budget_enforced(self):
        with pytest.raises(BudgetExceeded):
            count_ball(10**6, 3, budget=100)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            count_ball(-1, 2)
        with pytest.raises(ValueError):
            count_ball(4, 0)


class TestCountSquare:
    def test_power(self):
        assert count_square(5, 2) == 25
        assert count_square(3, 4) == 81


class TestGaussCircle:
    def test_degenerate_radius(self):
        err = gauss_circle_error(0)
        assert err.count == 1
        assert err.abs_error == 1.0

    def test_unit_radius(self):
        err = gauss_circle_error(1)
        assert err.count == 5
        assert err.abs_error == pytest.approx(abs(5 - math.pi))

    def test_annulus_bound_sample(self):
        # full 1..2000 sweep runs in the acceptance suite
        for r in range(1, 301):
            err = gauss_circle_error(r)
            assert err.abs_error <= math.pi * (math.sqrt(2) * r + 0.5)

    def test_large_radius_within_annulus(self):
        err = gauss_circle_error(100)
        assert err.abs_error <= math.pi * (math.sqrt(2) * 100 + 0.5)


class TestAttainable:
    def test_three_mod_four_excluded(self):
        assert not attainable_m1(3, 2)

    def test_twelve_not_a_sum_of_two_squares(self):
        # 12 = 0 mod 4, so the residue test alone would wrongly admit it
        assert 12 % 4 == 0
        assert not attainable_m1(12, 2)

    def test_origin(self):
        assert attainable_m1(0, 1)
        assert attainable_m1(0, 5)

    def test_against_brute_force(self):
        reachable = {
            x * x + y * y for x in range(0, 9) for y in range(0, 9)
        }
        for m1 in range(0, 65):
            assert attainable_m1(m1, 2) == (m1 in reachable)

    def test_matches_count_difference(self):
        for m1 in range(1, 40):
            for dim in (1, 2, 3):
                gained = count_ball(m1, dim) - count_ball(m1 - 1, dim) > 0
                assert attainable_m1(m1, dim) == gained


class TestBallVolume:
    def test_unit_disk(self):
        assert ball_volume(1, 2) == pytest.approx(math.pi)

    def test_unit_ball(self):
        assert ball_volume(1, 3) == pytest.approx(4 * math.pi / 3)

    def test_four_dimensional(self):
        assert ball_volume(2, 4) == pytest.approx(8 * math.pi**2)

    def test_count_approaches_volume(self):
        for dim in (2, 3):
            count = count_ball(50 * 50, dim)
            volume = ball_volume(50, dim)
            assert abs(count / volume - 1) < 0.05


class TestBallLatticePoints:
    def test_exact_point_set_r1(self):
        pts = ball_lattice_points(1, 2)
        assert {tuple(p) for p in pts.tolist()} == {
            (0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)
        }

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_matches_count_and_is_inside(self, dim):
        for r_sq in (0, 2, 9, 26):
            pts = ball_lattice_points(r_sq, dim)
            assert len(pts) == count_ball(r_sq, dim)
            assert ((pts * pts).sum(axis=1) <= r_sq).all()
            assert len({tuple(p) for p in pts.tolist()}) == len(pts)

    def test_deterministic_lexicographic_order(self):
        a = ball_lattice_points(10, 2)
        b = ball_lattice_points(10, 2)
        assert np.array_equal(a, b)
        assert sorted(map(tuple, a.tolist())) == list(map(tuple, a.tolist()))

    def test_materialization_cap(self):
        with pytest.raises(BudgetExceeded):
            ball_lattice_points(400, 2, cap=10)
