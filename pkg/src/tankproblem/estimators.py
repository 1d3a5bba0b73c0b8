"""The estimator family: serial-number population estimators for the
one-dimensional problem (discrete and continuous), their higher-dimensional
square/cube and ball generalizations, and the variance-minimizing weighted
combination machinery.

Scaling factors are formed in exact rational arithmetic and converted to
float only when an :class:`EstimateResult` is built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import IterationError

# Human-readable formula per estimator tag; echoed into CLI provenance.
FORMULAS = {
    "d1_max": "m*(k+1)/k - 1",
    "d1_spread": "s*(k+1)/(k-1) - 1",
    "d1_lth": "m*(k+1)/(k-L+1) - 1",
    "d1_cont_max": "m*(k+1)/k",
    "d1_cont_second": "m*(k+1)/(k-1)",
    "weighted": "alpha*X_max + (1-alpha)*X_second",
    "square_discrete": "(m-1)*(L*k+1)/(L*k)",
    "square_continuous": "m*(L*k+1)/(L*k)",
    "ball_discrete": "sqrt((m1-1)*(k+1)/k)",
    "ball_continuous": "m2*(L*k+1)/(L*k)",
    "square_recursive": "fixed point of sqrt((maxX + N*(maxY-1))*(k+1)/k - 1)",
}

# Estimators whose derivation keeps only the leading large-N term.
APPROXIMATE_TAGS = frozenset({"square_discrete", "ball_discrete", "square_recursive"})


@dataclass(frozen=True)
class EstimateResult:
    """A point estimate with its inputs echoed back.

    ``approximate`` marks large-population asymptotic formulas (the
    discrete square/ball family, which drops O(1/N) terms).  ``flags``
    carries validity warnings, e.g. ``"minimum_information"`` when every
    observation sat at the lowest possible value, or
    ``"estimate_below_observation"`` when an asymptotic formula returned
    less than the observed statistic.
    """

    estimate: float
    estimator: str
    inputs: dict
    approximate: bool = False
    flags: tuple[str, ...] = ()

    @property
    def formula(self) -> str:
        return FORMULAS[self.estimator]


def _result(tag, estimate, inputs, flags=()):
    return EstimateResult(
        float(estimate), tag, inputs, tag in APPROXIMATE_TAGS, tuple(flags)
    )


def est_d1_max(m: int, k: int) -> EstimateResult:
    """Estimate N from the largest of k serials drawn from {1..N}.

    The classic rule: m*(k+1)/k - 1.  Observing one serial gives 2m - 1;
    observing all N gives m back unchanged.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if m < k:
        raise ValueError(f"impossible observation: max {m} < sample size {k}")
    return _result("d1_max", m * Fraction(k + 1, k) - 1, {"m": m, "k": k})


def est_d1_spread(s: int, k: int) -> EstimateResult:
    """Estimate N from the max-min spread when serials need not start at 1."""
    if k < 2:
        raise ValueError(f"spread estimator needs k >= 2, got {k}")
    if s < k - 1:
        raise ValueError(f"impossible observation: spread {s} < k-1 = {k - 1}")
    return _result("d1_spread", s * Fraction(k + 1, k - 1) - 1, {"s": s, "k": k})


def est_d1_lth(m: int, k: int, order: int) -> EstimateResult:
    """Estimate N from the order-th largest serial (order=1 is the max)."""
    if not 1 <= order <= k:
        raise ValueError(f"requires 1 <= order <= k, got order={order}, k={k}")
    if m < k - order + 1:
        raise ValueError(
            f"impossible observation: {order}-th largest {m} < {k - order + 1}"
        )
    return _result(
        "d1_lth",
        m * Fraction(k + 1, k - order + 1) - 1,
        {"m": m, "k": k, "order": order},
    )


def est_d1_cont(m: float, k: int) -> EstimateResult:
    """Continuous analogue of est_d1_max for samples from [0, N]: m*(k+1)/k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if m <= 0:
        raise ValueError(f"largest observation must be positive, got {m}")
    return _result("d1_cont_max", m * (k + 1) / k, {"m": m, "k": k})


def est_d1_cont_second(m: float, k: int) -> EstimateResult:
    """Continuous estimate from the second largest observation: m*(k+1)/(k-1)."""
    if k < 2:
        raise ValueError(f"needs k >= 2, got {k}")
    if m <= 0:
        raise ValueError(f"observation must be positive, got {m}")
    return _result("d1_cont_second", m * (k + 1) / (k - 1), {"m": m, "k": k})


# ---------------------------------------------------------------------------
# Weighted combination (portfolio-style variance minimization)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaledVariances:
    """Exact variances/covariance of the mean-N-scaled top-two statistics,
    discrete and continuous."""

    var_xk: Fraction
    var_xk1: Fraction
    cov: Fraction
    var_xk_cont: Fraction
    var_xk1_cont: Fraction
    cov_cont: Fraction


def var_formulas(N: int, k: int) -> ScaledVariances:
    """Closed-form variances of the scaled estimators X_max and X_second.

    Discrete:   Var(X_max) = (N-k)(N+1)/(k(k+2)),
                Var(X_second) = 2(N-k)(N+1)/((k+2)(k-1)),
                Cov = (N+1)(N-k)/(k(k+2)).
    Continuous: Var(X_max) = N^2/(k(k+2)),
                Var(X_second) = 2N^2/((k+2)(k-1)),
                Cov = N^2/(k(k+2)).
    """
    if not 2 <= k <= N:
        raise ValueError(f"requires 2 <= k <= N, got N={N}, k={k}")
    return ScaledVariances(
        var_xk=Fraction((N - k) * (N + 1), k * (k + 2)),
        var_xk1=Fraction(2 * (N - k) * (N + 1), (k + 2) * (k - 1)),
        cov=Fraction((N + 1) * (N - k), k * (k + 2)),
        var_xk_cont=Fraction(N * N, k * (k + 2)),
        var_xk1_cont=Fraction(2 * N * N, (k + 2) * (k - 1)),
        cov_cont=Fraction(N * N, k * (k + 2)),
    )


def weighted_variance(alpha: Fraction, var_a: Fraction, var_b: Fraction,
                      cov: Fraction) -> Fraction:
    """Variance of alpha*A + (1-alpha)*B for jointly distributed A, B."""
    return (
        alpha**2 * var_a
        + (1 - alpha) ** 2 * var_b
        + 2 * alpha * (1 - alpha) * cov
    )


def optimal_alpha(var_a: Fraction, var_b: Fraction,
                  cov: Fraction = Fraction(0)) -> Fraction | None:
    """Weight minimizing Var(alpha*A + (1-alpha)*B) over alpha in [0, 1].

    The interior critical point is (var_b - cov)/(var_a + var_b - 2 cov);
    it is checked against the endpoints 0 and 1 and the minimizer is
    returned.  For independent assets this is var_b/(var_a + var_b); for
    the scaled top-two serial statistics it is exactly 1.  Returns None
    when the quadratic is flat (any alpha does equally well).
    """
    var_a, var_b, cov = Fraction(var_a), Fraction(var_b), Fraction(cov)
    denom = var_a + var_b - 2 * cov
    if denom == 0:
        if var_a == var_b:  # variance linear with zero slope: flat
            return None
        return Fraction(1) if var_a < var_b else Fraction(0)
    candidates = []
    critical = (var_b - cov) / denom
    if 0 <= critical <= 1:
        candidates.append(critical)
    candidates.extend((Fraction(1), Fraction(0)))
    return min(candidates, key=lambda a: weighted_variance(a, var_a, var_b, cov))


def weighted_estimate(alpha: float, x_a: float, x_b: float) -> float:
    """Convex combination alpha*x_a + (1-alpha)*x_b, alpha in [0, 1]."""
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * x_a + (1 - alpha) * x_b


# ---------------------------------------------------------------------------
# Higher-dimensional generalizations
# ---------------------------------------------------------------------------

def est_square_discrete(m: int, k: int, dim: int) -> EstimateResult:
    """Estimate the side N of a {1..N}^dim grid from the largest observed
    coordinate over k distinct sampled points.

    Large-N asymptotic rule (m-1)*(dim*k+1)/(dim*k); flagged approximate.
    m=1 (every coordinate at the minimum) legally yields 0 and is flagged
    minimum_information.
    """
    if m < 1 or k < 1 or dim < 1:
        raise ValueError(f"requires m, k, dim >= 1, got m={m}, k={k}, dim={dim}")
    est = (m - 1) * Fraction(dim * k + 1, dim * k)
    flags = _square_ball_flags(est, m, minimum=(m == 1))
    return _result("square_discrete", est, {"m": m, "k": k, "dim": dim}, flags)


def est_square_continuous(m: float, k: int, dim: int) -> EstimateResult:
    """Estimate the side N of [0, N]^dim from the largest observed
    coordinate: m*(dim*k+1)/(dim*k), exact (not asymptotic)."""
    if k < 1 or dim < 1:
        raise ValueError(f"requires k, dim >= 1, got k={k}, dim={dim}")
    if m <= 0:
        raise ValueError(f"largest coordinate must be positive, got {m}")
    scale = Fraction(dim * k + 1, dim * k)
    return _result(
        "square_continuous",
        m * scale.numerator / scale.denominator,
        {"m": m, "k": k, "dim": dim},
    )


def est_ball_discrete(m1: int, k: int) -> EstimateResult:
    """Estimate the radius of a lattice ball from the largest observed
    squared norm m1 = max(x1^2 + ... + xL^2).

    sqrt((m1-1)*(k+1)/k); the formula carries no dimension dependence.
    Asymptotic in r; m1=1 yields 0 with a minimum_information flag.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if m1 < 1:
        raise ValueError(f"largest squared norm must be >= 1, got {m1}")
    est = math.sqrt((m1 - 1) * (k + 1) / k)
    flags = _square_ball_flags(est, math.sqrt(m1), minimum=(m1 == 1))
    return _result("ball_discrete", est, {"m1": m1, "k": k}, flags)


def est_ball_continuous(m2: float, k: int, dim: int) -> EstimateResult:
    """Estimate the radius of a solid dim-ball from the largest observed
    norm m2 = max sqrt(x1^2 + ... + xL^2): m2*(dim*k+1)/(dim*k), exact."""
    if k < 1 or dim < 1:
        raise ValueError(f"requires k, dim >= 1, got k={k}, dim={dim}")
    if m2 <= 0:
        raise ValueError(f"largest norm must be positive, got {m2}")
    scale = Fraction(dim * k + 1, dim * k)
    return _result(
        "ball_continuous",
        m2 * scale.numerator / scale.denominator,
        {"m2": m2, "k": k, "dim": dim},
    )


def _square_ball_flags(estimate, observed, minimum: bool) -> tuple[str, ...]:
    if minimum:
        return ("minimum_information",)
    if estimate < observed:
        return ("estimate_below_observation",)
    return ()


# ---------------------------------------------------------------------------
# Recursive square estimator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecursiveEstimate:
    estimate: float
    iterations: int
    converged: bool
    inputs: dict = field(default_factory=dict, compare=False)


def est_square_recursive(max_x: int, max_y: int, k: int, n0: float,
                         tol: float = 1e-9, max_iter: int = 200) -> RecursiveEstimate:
    """Iterate N -> sqrt((max_x + N*(max_y - 1))*(k+1)/k - 1) to a fixed point.

    Grid points (x, y) in {1..N}^2 linearize to (x-1) + N*(y-1) + 1, so the
    largest linearized serial is estimated from the observed component
    maxima with the current N plugged in, then re-estimated until two
    successive values differ by less than ``tol``.  A negative radicand
    raises :class:`IterationError` rather than being clamped.

    With max_y = 1 the map is constant and the fixed point
    sqrt(max_x*(k+1)/k - 1) is reached after one application.
    """
    if max_x < 1 or max_y < 1:
        raise ValueError(f"component maxima must be >= 1, got {max_x}, {max_y}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n0 < max(max_x, max_y):
        raise ValueError(
            f"initial guess {n0} below largest observed component "
            f"{max(max_x, max_y)}"
        )
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    inputs = {"max_x": max_x, "max_y": max_y, "k": k, "n0": n0, "tol": tol}
    scale = (k + 1) / k
    current = float(n0)
    for iteration in range(1, max_iter + 1):
        radicand = (max_x + current * (max_y - 1)) * scale - 1
        if radicand < 0:
            raise IterationError(
                f"negative radicand {radicand} at iteration {iteration} "
                f"(max_x={max_x}, max_y={max_y}, k={k}, N={current})"
            )
        nxt = math.sqrt(radicand)
        if abs(nxt - current) < tol:
            return RecursiveEstimate(nxt, iteration, True, inputs)
        current = nxt
    return RecursiveEstimate(current, max_iter, False, inputs)
