"""Exact integer/rational combinatorics: binomial coefficients and the
summation identities the estimator derivations rest on.

Everything here is arbitrary-precision and exact; no floating point.
Probabilities and moments elsewhere in the package are carried as
``fractions.Fraction`` built on these integers.
"""

from __future__ import annotations

import math
from fractions import Fraction


def binomial(n: int, r: int) -> int:
    """C(n, r) with the zero-outside-support convention.

    Returns 0 when r < 0 or r > n.  n must be nonnegative.
    """
    if n < 0:
        raise ValueError(f"binomial requires n >= 0, got n={n}")
    if r < 0 or r > n:
        return 0
    return math.comb(n, r)


class BinomialTable:
    """Read-through cache of binomial coefficients.

    Results are identical with or without the cache; it only trades memory
    for repeated-lookup speed.  Concurrent fills are harmless (idempotent).
    """

    def __init__(self):
        self._cache: dict[tuple[int, int], int] = {}

    def __call__(self, n: int, r: int) -> int:
        if r < 0 or r > n:
            if n < 0:
                raise ValueError(f"binomial requires n >= 0, got n={n}")
            return 0
        key = (n, r)
        value = self._cache.get(key)
        if value is None:
            value = math.comb(n, r)
            self._cache[key] = value
        return value

    def __len__(self) -> int:
        return len(self._cache)


def check_hockey_stick(n: int, r: int) -> bool:
    """Verify sum_{i=r}^{n} C(i, r) == C(n+1, r+1) by exact summation."""
    if not 0 <= r <= n:
        raise ValueError(f"hockey stick requires 0 <= r <= n, got n={n}, r={r}")
    lhs = sum(binomial(i, r) for i in range(r, n + 1))
    return lhs == binomial(n + 1, r + 1)


# Parameter tuples expected per identity (see check_identity).
IDENTITY_PARAMS = {
    "I": ("N", "k", "b", "c"),
    "II": ("N", "k", "a"),
    "III": ("N", "k", "a"),
    "IV": ("a", "b", "k"),
}


def check_identity(ident: str, params: tuple[int, ...]) -> bool:
    """Evaluate one of the four summation identities exactly.

    The left side is always computed by literal summation, the right side
    from its closed form; returns whether they agree.

    Identity and parameter tuple:

    * ``"I"``   (N, k, b, c):  sum_{m=k}^{N} C(m-b, k-c)
                               == C(N-b+1, k-c+1) - C(k-b, k-c+1),
                               legal for N >= k >= 1 and 0 <= b, c <= k.
    * ``"II"``  (N, k, a):     sum m * C(m-1, k-a) C(N-m, a-1) / C(N, k)
                               over m = k-a+1 .. N-a+1
                               == (N+1)(k-a+1)/(k+1), legal for 1 <= a <= k <= N.
    * ``"III"`` (N, k, a):     same sum with m^2
                               == (k-a+1)(k-a+2)(N+2)(N+1)/((k+2)(k+1))
                                  - (N+1)(k-a+1)/(k+1).
    * ``"IV"``  (a, b, k):     sum_{i=0}^{k} C(a+i, a) C(b+k-i, b)
                               == C(a+b+k+1, a+b+1), legal for a, b, k >= 0.
    """
    if ident == "I":
        N, k, b, c = params
        if not (1 <= k <= N and 0 <= b <= k and 0 <= c <= k):
            raise ValueError(f"identity I out of range: N={N} k={k} b={b} c={c}")
        lhs = sum(binomial(m - b, k - c) for m in range(k, N + 1))
        rhs = binomial(N - b + 1, k - c + 1) - binomial(k - b, k - c + 1)
        return lhs == rhs
    if ident == "II":
        N, k, a = params
        _require_lth_range(N, k, a)
        num = sum(
            m * binomial(m - 1, k - a) * binomial(N - m, a - 1)
            for m in range(k - a + 1, N - a + 2)
        )
        lhs = Fraction(num, math.comb(N, k))
        rhs = Fraction((N + 1) * (k - a + 1), k + 1)
        return lhs == rhs
    if ident == "III":
        N, k, a = params
        _require_lth_range(N, k, a)
        num = sum(
            m * m * binomial(m - 1, k - a) * binomial(N - m, a - 1)
            for m in range(k - a + 1, N - a + 2)
        )
        lhs = Fraction(num, math.comb(N, k))
        rhs = Fraction(
            (k - a + 1) * (k - a + 2) * (N + 2) * (N + 1), (k + 2) * (k + 1)
        ) - Fraction((N + 1) * (k - a + 1), k + 1)
        return lhs == rhs
    if ident == "IV":
        a, b, k = params
        if a < 0 or b < 0 or k < 0:
            raise ValueError(f"identity IV requires a, b, k >= 0, got {params}")
        lhs = sum(binomial(a + i, a) * binomial(b + k - i, b) for i in range(k + 1))
        return lhs == binomial(a + b + k + 1, a + b + 1)
    raise ValueError(f"unknown identity {ident!r}; expected one of I, II, III, IV")


def _require_lth_range(N: int, k: int, a: int) -> None:
    if not (1 <= a <= k <= N):
        raise ValueError(f"requires 1 <= a <= k <= N, got N={N} k={k} a={a}")
