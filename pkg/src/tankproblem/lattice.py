"""Exact lattice-point counting in balls and cubes, squared-norm
attainability, and the Gauss-circle error measured against the area.

Membership tests use integer comparisons on sums of squares only; no
floating-point radius ever decides whether a point is inside.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded

DEFAULT_BALL_BUDGET = 1_000_000_000
_BUDGET_ENV = "TANKPROBLEM_BALL_BUDGET"


def ball_budget() -> int:
    """Active candidate-point budget (env TANKPROBLEM_BALL_BUDGET overrides)."""
    raw = os.environ.get(_BUDGET_ENV)
    if raw is not None:
        return int(raw)
    return DEFAULT_BALL_BUDGET


def count_ball(r_sq: int, dim: int, budget: int | None = None) -> int:
    """Number of integer points x in Z^dim with x1^2 + ... + xdim^2 <= r_sq.

    Counts exactly by nested ranges x_i in [-isqrt(remaining), +isqrt(remaining)],
    collapsing the innermost coordinate to 2*isqrt(remaining) + 1.  The
    budget caps how many candidate loop steps may be taken.
    """
    if r_sq < 0:
        raise ValueError(f"r_sq must be >= 0, got {r_sq}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    limit = ball_budget() if budget is None else budget
    steps = [0]

    def count(remaining: int, d: int) -> int:
        if d == 1:
            return 2 * math.isqrt(remaining) + 1
        bound = math.isqrt(remaining)
        steps[0] += 2 * bound + 1
        if steps[0] > limit:
            raise BudgetExceeded(
                f"lattice scan exceeded budget {limit}", needed=steps[0], cap=limit
            )
        total = count(remaining, d - 1)  # x_d = 0 slice
        for x in range(1, bound + 1):
            total += 2 * count(remaining - x * x, d - 1)
        return total

    return count(r_sq, dim)


def count_square(N: int, dim: int) -> int:
    """Number of points in the grid {1..N}^dim, i.e. N**dim."""
    if N < 0 or dim < 1:
        raise ValueError(f"requires N >= 0 and dim >= 1, got N={N}, dim={dim}")
    return N**dim


def ball_lattice_points(r_sq: int, dim: int, cap: int | None = None) -> np.ndarray:
    """Materialize all lattice points of the ball as an (count, dim) int64
    array in lexicographic order.

    Refuses (BudgetExceeded) when the count is larger than ``cap``
    (default: the ball budget), since the array itself would be the cost.
    """
    total = count_ball(r_sq, dim)
    limit = ball_budget() if cap is None else cap
    if total > limit:
        raise BudgetExceeded(
            f"{total} lattice points exceed materialization cap {limit}",
            needed=total, cap=limit,
        )
    out = np.empty((total, dim), dtype=np.int64)
    pos = 0
    prefix = np.empty(dim, dtype=np.int64)

    def fill(remaining: int, d: int):
        nonlocal pos
        bound = math.isqrt(remaining)
        if d == dim - 1:
            n = 2 * bound + 1
            out[pos:pos + n, :d] = prefix[:d]
            out[pos:pos + n, d] = np.arange(-bound, bound + 1)
            pos += n
            return
        for x in range(-bound, bound + 1):
            prefix[d] = x
            fill(remaining - x * x, d + 1)

    if dim == 1:
        bound = math.isqrt(r_sq)
        out[:, 0] = np.arange(-bound, bound + 1)
    else:
        fill(r_sq, 0)
    return out


@dataclass(frozen=True)
class GaussCircleError:
    count: int
    area: float
    abs_error: float


def gauss_circle_error(r: int) -> GaussCircleError:
    """Exact lattice count of the radius-r disk versus its area pi*r^2."""
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    count = count_ball(r * r, 2)
    area = math.pi * r * r
    return GaussCircleError(count, area, abs(count - area))


def attainable_m1(m1: int, dim: int) -> bool:
    """Whether m1 is a sum of dim integer squares.

    Decided exactly by counting: attainable iff the lattice ball gains a
    point going from m1-1 to m1.  (For dim=2 the residues 0, 1, 2 mod 4
    are necessary but not sufficient; 12 = 3*4 is a counterexample.)
    """
    if m1 < 0:
        raise ValueError(f"m1 must be >= 0, got {m1}")
    if m1 == 0:
        return True
    return count_ball(m1, dim) - count_ball(m1 - 1, dim) > 0


def ball_volume(r: float, dim: int) -> float:
    """Volume of the solid dim-ball: pi^(dim/2) / Gamma(dim/2 + 1) * r^dim."""
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * r**dim
