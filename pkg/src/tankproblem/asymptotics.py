"""Euler-Maclaurin summation for power sums with a certified remainder
bound, falling-factorial sandwich bounds, and the leading-term
approximation used by the large-N estimator derivations.

Only polynomial integrands appear here (every use case is a power sum of
the shape sum (m^w - c*m^y)), so differentiation is exponent bookkeeping
and all quantities stay exact rationals.  At order p=2 the remainder
coefficient 2*zeta(2)/(2*pi)^2 collapses to exactly 1/12, so even the
remainder bound is rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

# Bernoulli number B_2, the only one needed at order p=2.
B2 = Fraction(1, 6)


@dataclass(frozen=True)
class PowerSumSpec:
    """The sum over m = a..b of m**w - c * m**y (c >= 0, y < w when c > 0)."""

    w: int
    a: int
    b: int
    c: int | Fraction = 0
    y: int = 0

    def __post_init__(self):
        if self.w < 0:
            raise ValueError(f"exponent w must be >= 0, got {self.w}")
        if not 0 <= self.a <= self.b:
            raise ValueError(f"requires 0 <= a <= b, got a={self.a}, b={self.b}")
        if self.c < 0:
            raise ValueError(f"correction coefficient must be >= 0, got {self.c}")
        if self.c > 0 and not 0 <= self.y < self.w:
            raise ValueError(
                f"correction exponent needs 0 <= y < w, got y={self.y}, w={self.w}"
            )

    def term(self, m: int) -> Fraction:
        return Fraction(m**self.w) - self.c * m**self.y


@dataclass(frozen=True)
class EMResult:
    """Euler-Maclaurin approximation with a remainder bound that certifies
    |exact - approximation| <= remainder_bound whenever exact was computed."""

    approximation: Fraction
    remainder_bound: Fraction
    exact: int | Fraction | None = None


def euler_maclaurin(spec: PowerSumSpec, p: int = 2,
                    exact_limit: int = 10**6) -> EMResult:
    """Approximate the power sum by integral + boundary + B2 correction.

    Only p=2 is supported.  The remainder satisfies
    |R| <= (1/12) * integral of |f''| over [a, b]; since both pieces of
    f'' = w(w-1)x^(w-2) - c*y(y-1)x^(y-2) are nonnegative on x >= 0, the
    integral is bounded by the sum of the two pieces' integrals, keeping
    the bound exact and certified.  The true sum is filled in by direct
    summation when b - a <= exact_limit.
    """
    if p != 2:
        raise ValueError(f"only order p=2 is supported, got p={p}")
    w, a, b, c, y = spec.w, spec.a, spec.b, Fraction(spec.c), spec.y

    integral = Fraction(b ** (w + 1) - a ** (w + 1), w + 1)
    if c:
        integral -= c * Fraction(b ** (y + 1) - a ** (y + 1), y + 1)
    boundary = (spec.term(a) + spec.term(b)) / 2
    # f'(x) = w x^(w-1) - c y x^(y-1); exponents stay >= 0 in every branch.
    deriv_b = w * Fraction(b ** (w - 1)) if w else Fraction(0)
    deriv_a = w * Fraction(a ** (w - 1)) if w else Fraction(0)
    if c and y:
        deriv_b -= c * y * b ** (y - 1)
        deriv_a -= c * y * a ** (y - 1)
    approximation = integral + boundary + B2 / 2 * (deriv_b - deriv_a)

    bound = Fraction(0)
    if w >= 2:
        bound += w * Fraction(b ** (w - 1) - a ** (w - 1))
    if c and y >= 2:
        bound += c * y * Fraction(b ** (y - 1) - a ** (y - 1))
    remainder_bound = bound / 12

    exact = None
    if b - a <= exact_limit:
        total = sum(spec.term(m) for m in range(a, b + 1))
        exact = int(total) if total.denominator == 1 else total
    return EMResult(approximation, remainder_bound, exact)


@dataclass(frozen=True)
class FallingFactorialBounds:
    lower: int
    upper: int
    exact: int


def falling_factorial_bounds(m: int, L: int, k: int) -> FallingFactorialBounds:
    """Sandwich m^L (m^L - 1) ... (m^L - (k-1)) between power-sum bounds.

    lower = m^(Lk) - m^(Lk-L) * k(k-1)/2, upper = m^(Lk).  Requires
    m^L >= k - 1 so that no factor goes negative.
    """
    if m < 1 or L < 0 or k < 1:
        raise ValueError(f"requires m >= 1, L >= 0, k >= 1, got {m}, {L}, {k}")
    base = m**L
    if base < k - 1:
        raise ValueError(
            f"precondition m^L >= k-1 violated: {m}^{L} = {base} < {k - 1}"
        )
    exact = 1
    for i in range(k):
        exact *= base - i
    upper = base**k
    lower = upper - base ** (k - 1) * (k * (k - 1) // 2)
    return FallingFactorialBounds(lower, upper, exact)


def ceil_root(n: int, degree: int) -> int:
    """Smallest integer s with s**degree >= n (n >= 0, degree >= 1)."""
    if n < 0 or degree < 1:
        raise ValueError(f"requires n >= 0 and degree >= 1, got {n}, {degree}")
    if n <= 1:
        return n
    s = round(n ** (1 / degree))
    while s**degree >= n:
        s -= 1
    while s**degree < n:
        s += 1
    return s


def exact_sum_power(N: int, k: int, L: int) -> int:
    """sum of m^(Lk) for m from ceil(k^(1/L)) to N-1, exactly."""
    if N < 2 or k < 1 or L < 1:
        raise ValueError(f"requires N >= 2, k >= 1, L >= 1, got {N}, {k}, {L}")
    start = ceil_root(k, L)
    return sum(m ** (L * k) for m in range(start, N))


def main_term_sum_power(N: int, k: int, L: int) -> Fraction:
    """Leading-term approximation (N-1)^(Lk+1) / (Lk+1) of exact_sum_power.

    Its relative error is O(1/N) for fixed k and L.
    """
    if N < 2 or k < 1 or L < 1:
        raise ValueError(f"requires N >= 2, k >= 1, L >= 1, got {N}, {k}, {L}")
    return Fraction((N - 1) ** (L * k + 1), L * k + 1)
