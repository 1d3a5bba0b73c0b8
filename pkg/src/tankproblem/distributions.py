"""Exact order-statistic distributions for samples drawn without
replacement from {1, ..., N}, their closed-form moments, and a brute-force
enumeration oracle.

All probabilities and moments are exact ``Fraction`` values.  The oracle
walks every k-subset of {1..N} (lexicographically, numpy-chunked) and is
deliberately independent of the closed forms it is used to audit.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EnumerationCapExceeded
from .exactmath import binomial

DEFAULT_ENUM_CAP = 10_000_000
_ENUM_CAP_ENV = "TANKPROBLEM_ENUM_CAP"


def enumeration_cap() -> int:
    """Active subset-enumeration cap (env TANKPROBLEM_ENUM_CAP overrides)."""
    raw = os.environ.get(_ENUM_CAP_ENV)
    if raw is not None:
        return int(raw)
    return DEFAULT_ENUM_CAP


@dataclass(frozen=True)
class MomentReport:
    """Mean, second moment and variance of one statistic, all exact.

    ``source`` records whether the numbers come from a closed form or from
    the enumeration oracle.
    """

    mean: Fraction
    second_moment: Fraction
    variance: Fraction
    source: str = field(default="closed", compare=False)

    def __post_init__(self):
        if self.variance != self.second_moment - self.mean**2:
            raise ValueError("variance must equal second_moment - mean**2")

    @classmethod
    def from_mean_and_second(cls, mean: Fraction, second: Fraction,
                             source: str = "closed") -> "MomentReport":
        return cls(mean, second, second - mean * mean, source)


def _require_sample(N: int, k: int) -> None:
    if not 1 <= k <= N:
        raise ValueError(f"requires 1 <= k <= N, got N={N}, k={k}")


def pmf_largest(N: int, k: int, m: int) -> Fraction:
    """Probability that the sample maximum equals m.

    Support is k <= m <= N; zero outside (no error), so summation loops
    need no special-casing.
    """
    _require_sample(N, k)
    if m < k or m > N:
        return Fraction(0)
    return Fraction(binomial(m - 1, k - 1), math.comb(N, k))


def pmf_lth_largest(N: int, k: int, order: int, m: int) -> Fraction:
    """Probability that the order-th largest sample value equals m.

    order=1 is the maximum and reduces exactly to :func:`pmf_largest`;
    support is k-order+1 <= m <= N-order+1.
    """
    _require_sample(N, k)
    if not 1 <= order <= k:
        raise ValueError(f"requires 1 <= order <= k, got order={order}, k={k}")
    if m < k - order + 1 or m > N - order + 1:
        return Fraction(0)
    return Fraction(
        binomial(m - 1, k - order) * binomial(N - m, order - 1), math.comb(N, k)
    )


def joint_pmf_top_two(N: int, k: int, m_top: int, m_second: int) -> Fraction:
    """Joint probability that the two largest sample values are (m_top, m_second)."""
    _require_sample(N, k)
    if k < 2:
        raise ValueError(f"joint top-two needs k >= 2, got k={k}")
    if not (k - 1 <= m_second < m_top <= N):
        return Fraction(0)
    return Fraction(binomial(m_second - 1, k - 2), math.comb(N, k))


def closed_moments_largest(N: int, k: int) -> MomentReport:
    """Closed-form moments of the sample maximum.

    mean = k(N+1)/(k+1), variance = k(N-k)(N+1)/((k+1)^2 (k+2)).
    """
    _require_sample(N, k)
    mean = Fraction(k * (N + 1), k + 1)
    variance = Fraction(k * (N - k) * (N + 1), (k + 1) ** 2 * (k + 2))
    return MomentReport(mean, variance + mean * mean, variance)


def closed_moments_lth(N: int, k: int, order: int, cap: int | None = None) -> MomentReport:
    """Moments of the order-th largest sample value.

    The mean (N+1)(k-order+1)/(k+1) is closed-form for every order.  A
    closed-form variance exists only for order 1 and 2; for larger order
    the variance is filled in by the enumeration oracle and the report is
    tagged ``source="oracle"``.
    """
    _require_sample(N, k)
    if not 1 <= order <= k:
        raise ValueError(f"requires 1 <= order <= k, got order={order}, k={k}")
    mean = Fraction((N + 1) * (k - order + 1), k + 1)
    if order == 1:
        return closed_moments_largest(N, k)
    if order == 2:
        variance = Fraction(2 * (k - 1) * (N - k) * (N + 1), (k + 1) ** 2 * (k + 2))
        return MomentReport(mean, variance + mean * mean, variance)
    oracle = oracle_moments(N, k, "lth_largest", order=order, cap=cap)
    return MomentReport(mean, oracle.second_moment, oracle.variance, source="oracle")


def closed_covariance_top_two(N: int, k: int) -> Fraction:
    """Covariance of the mean-N-scaled statistics built from the two largest
    sample values: (N+1)(N-k)/(k(k+2))."""
    _require_sample(N, k)
    if k < 2:
        raise ValueError(f"covariance of top two needs k >= 2, got k={k}")
    return Fraction((N + 1) * (N - k), k * (k + 2))


# ---------------------------------------------------------------------------
# Enumeration oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderStatSums:
    """Exact integer sums over every k-subset of {1..N}.

    ``sum_val[j]`` / ``sum_sq[j]`` accumulate the (j+1)-th smallest element
    and its square; ``sum_prod_top2`` the product of the two largest
    elements, ``sum_prod_max_min`` the product max*min.
    """

    N: int
    k: int
    count: int
    sum_val: tuple[int, ...]
    sum_sq: tuple[int, ...]
    sum_prod_top2: int
    sum_prod_max_min: int


_SUMS_CACHE: dict[tuple[int, int], OrderStatSums] = {}
_CHUNK_ROWS = 1 << 18


def order_stat_sums(N: int, k: int, cap: int | None = None) -> OrderStatSums:
    """Walk all C(N, k) subsets once and accumulate exact statistic sums.

    Raises :class:`EnumerationCapExceeded` when C(N, k) is larger than the
    cap (default 10^7, overridable per call or via TANKPROBLEM_ENUM_CAP).
    Results are memoized; the enumeration is chunked through numpy int64
    arrays, whose exact integer arithmetic cannot overflow at any N the
    cap admits.
    """
    _require_sample(N, k)
    cached = _SUMS_CACHE.get((N, k))
    if cached is not None:
        return cached
    total = math.comb(N, k)
    limit = enumeration_cap() if cap is None else cap
    if total > limit:
        raise EnumerationCapExceeded(
            f"C({N}, {k}) = {total} subsets exceeds enumeration cap {limit}",
            needed=total, cap=limit,
        )
    flat = itertools.chain.from_iterable(itertools.combinations(range(1, N + 1), k))
    sum_val = np.zeros(k, dtype=np.int64)
    sum_sq = np.zeros(k, dtype=np.int64)
    prod_top2 = 0
    prod_max_min = 0
    remaining = total
    while remaining:
        rows = min(_CHUNK_ROWS, remaining)
        arr = np.fromiter(flat, dtype=np.int64, count=rows * k).reshape(rows, k)
        sum_val += arr.sum(axis=0)
        sum_sq += (arr * arr).sum(axis=0)
        if k >= 2:
            prod_top2 += int(np.dot(arr[:, -1], arr[:, -2]))
            prod_max_min += int(np.dot(arr[:, -1], arr[:, 0]))
        remaining -= rows
    result = OrderStatSums(
        N, k, total,
        tuple(int(v) for v in sum_val),
        tuple(int(v) for v in sum_sq),
        prod_top2, prod_max_min,
    )
    _SUMS_CACHE[(N, k)] = result
    return result


_SCALAR_STATISTICS = ("largest", "second_largest", "lth_largest", "smallest", "spread")


def oracle_moments(N: int, k: int, statistic: str = "largest",
                   order: int | None = None, cap: int | None = None) -> MomentReport:
    """Exact moments of a sample statistic, by full subset enumeration.

    ``statistic`` is one of "largest", "second_largest", "lth_largest"
    (with ``order``), "smallest" or "spread".
    """
    if statistic not in _SCALAR_STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}")
    sums = order_stat_sums(N, k, cap=cap)
    if statistic == "largest":
        j = k - 1
    elif statistic == "second_largest":
        if k < 2:
            raise ValueError("second_largest needs k >= 2")
        j = k - 2
    elif statistic == "smallest":
        j = 0
    elif statistic == "lth_largest":
        if order is None or not 1 <= order <= k:
            raise ValueError(f"lth_largest needs 1 <= order <= k, got {order}")
        j = k - order
    else:  # spread = max - min
        mean = Fraction(sums.sum_val[k - 1] - sums.sum_val[0], sums.count)
        # E[(max-min)^2] = E[max^2] - 2 E[max*min] + E[min^2]
        second = Fraction(
            sums.sum_sq[k - 1] - 2 * sums.sum_prod_max_min + sums.sum_sq[0],
            sums.count,
        )
        return MomentReport.from_mean_and_second(mean, second, source="oracle")
    mean = Fraction(sums.sum_val[j], sums.count)
    second = Fraction(sums.sum_sq[j], sums.count)
    return MomentReport.from_mean_and_second(mean, second, source="oracle")


def oracle_covariance_top_two(N: int, k: int, cap: int | None = None) -> Fraction:
    """Covariance of the scaled top-two statistics, by enumeration.

    The scaled statistics are max*(k+1)/k - 1 and second*(k+1)/(k-1) - 1;
    this is the quantity :func:`closed_covariance_top_two` states in
    closed form.
    """
    if k < 2:
        raise ValueError(f"needs k >= 2, got k={k}")
    sums = order_stat_sums(N, k, cap=cap)
    e_prod = Fraction(sums.sum_prod_top2, sums.count)
    e_max = Fraction(sums.sum_val[k - 1], sums.count)
    e_second = Fraction(sums.sum_val[k - 2], sums.count)
    cov_raw = e_prod - e_max * e_second
    return cov_raw * Fraction(k + 1, k) * Fraction(k + 1, k - 1)


def support_lth(N: int, k: int, order: int) -> range:
    """Support of the order-th largest sample value."""
    return range(k - order + 1, N - order + 2)
