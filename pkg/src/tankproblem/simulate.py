"""Seeded, reproducible Monte Carlo harness: sampling over every geometry,
per-trial estimator evaluation, and aggregate reports.

Reproducibility contract: trial t draws from a Philox 4x64 stream keyed
with (master_seed, t) and a zero counter, so a report is a pure function
of its configuration.  Trials are independent; aggregation uses exact
compensated summation (math.fsum), whose correctly-rounded result is
order-independent, so any parallel partition of trials would reproduce
the sequential report bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import estimators as est
from .errors import IterationError
from .lattice import ball_lattice_points, count_ball, count_square

RNG_ALGORITHM_ID = "philox4x64:key=(master_seed,trial_index)"

# Above this many lattice points the discrete ball sampler switches from a
# materialized point list to rejection from the bounding cube.
DEFAULT_MATERIALIZE_CAP = 10_000_000


# ---------------------------------------------------------------------------
# Geometry and observations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometryDomain:
    """The space observations are drawn from.

    kind: "interval" (1D serials), "square" (grid/cube side N), or "ball"
    (radius r).  Discrete interval/square populations are {1..N} and
    {1..N}^dim; the discrete ball population is the integer points with
    squared norm <= r^2.  Continuous counterparts are [0, N], [0, N]^dim
    and the solid ball.
    """

    kind: str
    discrete: bool
    size: int | float
    dim: int = 1

    def __post_init__(self):
        if self.kind not in ("interval", "square", "ball"):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "interval" and self.dim != 1:
            raise ValueError("interval geometry is one-dimensional")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.size <= 0:
            raise ValueError(f"size must be positive, got {self.size}")
        if self.discrete:
            if self.size != int(self.size):
                raise ValueError(
                    f"discrete geometry needs an integer size, got {self.size}"
                )
            object.__setattr__(self, "size", int(self.size))

    def population_size(self) -> int:
        """Number of distinct samplable points (discrete geometries only)."""
        if not self.discrete:
            raise ValueError("population size is defined for discrete geometries")
        if self.kind == "interval":
            return self.size
        if self.kind == "square":
            return count_square(self.size, self.dim)
        return count_ball(self.size * self.size, self.dim)

    @property
    def true_parameter(self) -> float:
        """The quantity every matching estimator targets (N, or r for balls)."""
        return float(self.size)


@dataclass(frozen=True)
class ObservationSet:
    """k sampled points plus the derived statistics estimators consume."""

    geometry: GeometryDomain
    points: np.ndarray  # shape (k,) for intervals, (k, dim) otherwise

    @property
    def k(self) -> int:
        return self.points.shape[0]

    def sorted_values(self) -> np.ndarray:
        return np.sort(self.points)

    def largest(self):
        return self.points.max()

    def lth_largest(self, order: int):
        if not 1 <= order <= self.k:
            raise ValueError(f"order must be in 1..{self.k}, got {order}")
        return np.sort(self.points)[self.k - order]

    def spread(self):
        return self.points.max() - self.points.min()

    def max_component(self):
        """Largest coordinate over all points (square statistic)."""
        return self.points.max()

    def max_sum_sq(self):
        """Largest squared norm over all points (discrete ball statistic)."""
        pts = self.points if self.points.ndim == 2 else self.points[:, None]
        return (pts * pts).sum(axis=1).max()

    def max_norm(self) -> float:
        """Largest Euclidean norm over all points (continuous ball statistic)."""
        return float(math.sqrt(self.max_sum_sq()))

    def component_maxima(self) -> np.ndarray:
        pts = self.points if self.points.ndim == 2 else self.points[:, None]
        return pts.max(axis=0)


# ---------------------------------------------------------------------------
# Per-trial random streams
# ---------------------------------------------------------------------------

class TrialStreams:
    """Deterministic per-trial generators from a single master seed.

    ``trial(t)`` returns a generator positioned at the start of the Philox
    stream keyed (master_seed, t).  One bit-generator object is re-keyed
    in place for speed; this is bit-identical to constructing
    ``Philox(key=[master_seed, t])`` fresh (guarded by a test).
    """

    def __init__(self, master_seed: int):
        if not 0 <= master_seed < 2**64:
            raise ValueError(f"master seed must be a 64-bit integer, got {master_seed}")
        self.master_seed = master_seed
        self._bitgen = np.random.Philox(key=0)
        self._gen = np.random.Generator(self._bitgen)
        self._state = self._bitgen.state

    def trial(self, t: int) -> np.random.Generator:
        st = self._state
        st["state"]["key"][0] = self.master_seed
        st["state"]["key"][1] = t
        st["state"]["counter"][:] = 0
        st["buffer_pos"] = 4
        self._bitgen.state = st
        return self._gen


def trial_generator(master_seed: int, t: int) -> np.random.Generator:
    """Reference construction of the per-trial stream (fresh object)."""
    return np.random.Generator(np.random.Philox(key=[master_seed, t]))


def _distinct_uniform(rng: np.random.Generator, population: int, k: int) -> np.ndarray:
    """k distinct integers uniform over {1..population}.

    Hash-based rejection (expected O(k) draws when k <= population/2;
    the complement is drawn instead when k is more than half), so large
    populations never pay for a full shuffle.  Returned sorted; no
    consumer cares about arrival order and sorting keeps the result
    independent of set-iteration details.
    """
    if k > population:
        raise ValueError(f"cannot draw {k} distinct values from {population}")
    if k == population:
        return np.arange(1, population + 1, dtype=np.int64)
    invert = k > population // 2
    want = population - k if invert else k
    seen: set[int] = set()
    while len(seen) < want:
        draw = rng.integers(1, population + 1, size=want - len(seen) + 2)
        for v in draw.tolist():
            if v not in seen:
                seen.add(v)
                if len(seen) == want:
                    break
    drawn = np.sort(np.fromiter(seen, dtype=np.int64, count=want))
    if invert:
        return np.setdiff1d(np.arange(1, population + 1, dtype=np.int64), drawn)
    return drawn


_BALL_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _ball_points(r_sq: int, dim: int, cap: int) -> np.ndarray | None:
    """Materialized lattice ball, or None when above the cap."""
    if count_ball(r_sq, dim) > cap:
        return None
    key = (r_sq, dim)
    pts = _BALL_CACHE.get(key)
    if pts is None:
        pts = ball_lattice_points(r_sq, dim)
        _BALL_CACHE[key] = pts
    return pts


def _sample_ball_discrete_rejection(rng, r_sq: int, dim: int, k: int) -> np.ndarray:
    """k distinct lattice points of the ball via rejection from the cube."""
    bound = math.isqrt(r_sq)
    seen: set[tuple] = set()
    rows: list[tuple] = []
    while len(rows) < k:
        batch = rng.integers(-bound, bound + 1, size=(max(2 * (k - len(rows)), 8), dim))
        inside = (batch * batch).sum(axis=1) <= r_sq
        for row in batch[inside].tolist():
            key = tuple(row)
            if key not in seen:
                seen.add(key)
                rows.append(key)
                if len(rows) == k:
                    break
    return np.array(rows, dtype=np.int64)


def sample_observation(geometry: GeometryDomain, k: int, rng: np.random.Generator,
                       materialize_cap: int = DEFAULT_MATERIALIZE_CAP) -> ObservationSet:
    """Draw k points from the geometry: without replacement when discrete,
    i.i.d. uniform when continuous (balls via rejection from the bounding cube)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    g = geometry
    if g.discrete:
        if g.kind == "interval":
            pts = _distinct_uniform(rng, g.size, k)
        elif g.kind == "square":
            idx = _distinct_uniform(rng, g.size**g.dim, k) - 1
            pts = np.empty((k, g.dim), dtype=np.int64)
            for d in range(g.dim):
                idx, digit = np.divmod(idx, g.size)
                pts[:, d] = digit + 1
        else:  # ball
            r_sq = g.size * g.size
            table = _ball_points(r_sq, g.dim, materialize_cap)
            if table is None:
                pts = _sample_ball_discrete_rejection(rng, r_sq, g.dim, k)
            else:
                if k > len(table):
                    raise ValueError(
                        f"cannot draw {k} distinct points from {len(table)}"
                    )
                rows = _distinct_uniform(rng, len(table), k) - 1
                pts = table[rows]
        return ObservationSet(g, pts)
    if g.kind == "interval":
        return ObservationSet(g, rng.random(k) * g.size)
    if g.kind == "square":
        return ObservationSet(g, rng.random((k, g.dim)) * g.size)
    # continuous ball: rejection from [-r, r]^dim
    r = float(g.size)
    rows = np.empty((k, g.dim))
    have = 0
    while have < k:
        batch = rng.random((max(2 * (k - have), 8), g.dim)) * (2 * r) - r
        inside = (batch * batch).sum(axis=1) <= r * r
        accepted = batch[inside]
        take = min(len(accepted), k - have)
        rows[have:have + take] = accepted[:take]
        have += take
    return ObservationSet(g, rows)


def ball_rejection_acceptance(r: float, dim: int, proposals: int,
                              master_seed: int) -> float:
    """Fraction of uniform bounding-cube proposals landing inside the ball.

    Converges to ball_volume(r, dim) / (2r)^dim; exposed so the rejection
    sampler's geometry can be audited directly.
    """
    rng = trial_generator(master_seed, 0)
    accepted = 0
    done = 0
    chunk = 1 << 16
    while done < proposals:
        n = min(chunk, proposals - done)
        batch = rng.random((n, dim)) * (2 * r) - r
        accepted += int(((batch * batch).sum(axis=1) <= r * r).sum())
        done += n
    return accepted / proposals


# ---------------------------------------------------------------------------
# Estimator dispatch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimatorSpec:
    """An estimator selection, e.g. d1_lth:3 or weighted:0.5."""

    tag: str
    order: int | None = None
    alpha: float | None = None

    @classmethod
    def parse(cls, text: str) -> "EstimatorSpec":
        tag, _, arg = text.partition(":")
        if tag == "d1_lth":
            return cls(tag, order=int(arg) if arg else 2)
        if tag == "weighted":
            alpha = float(arg) if arg else 0.5
            if not 0 <= alpha <= 1:
                raise ValueError(f"weighted alpha must be in [0, 1], got {alpha}")
            return cls(tag, alpha=alpha)
        if arg:
            raise ValueError(f"estimator {tag!r} takes no parameter")
        if tag not in _EVALUATORS:
            raise ValueError(f"unknown estimator {text!r}")
        return cls(tag)

    def label(self) -> str:
        if self.tag == "d1_lth":
            return f"d1_lth:{self.order}"
        if self.tag == "weighted":
            return f"weighted:{self.alpha:g}"
        return self.tag


def _eval_weighted(spec, obs):
    k = obs.k
    if obs.geometry.discrete:
        xa = est.est_d1_max(int(obs.largest()), k).estimate
        xb = est.est_d1_lth(int(obs.lth_largest(2)), k, 2).estimate
    else:
        xa = est.est_d1_cont(float(obs.largest()), k).estimate
        xb = est.est_d1_cont_second(float(obs.lth_largest(2)), k).estimate
    return est.weighted_estimate(spec.alpha, xa, xb)


def _eval_recursive(spec, obs):
    maxima = obs.component_maxima()
    max_x, max_y = int(maxima[0]), int(maxima[1])
    n0 = max(max_x, max_y)
    return est.est_square_recursive(max_x, max_y, obs.k, n0).estimate


# tag -> (evaluator, set of (kind, discrete) pairs it applies to)
_EVALUATORS = {
    "d1_max": (lambda s, o: est.est_d1_max(int(o.largest()), o.k).estimate,
               {("interval", True)}),
    "d1_spread": (lambda s, o: est.est_d1_spread(int(o.spread()), o.k).estimate,
                  {("interval", True)}),
    "d1_lth": (lambda s, o: est.est_d1_lth(int(o.lth_largest(s.order)), o.k,
                                           s.order).estimate,
               {("interval", True)}),
    "d1_cont_max": (lambda s, o: est.est_d1_cont(float(o.largest()), o.k).estimate,
                    {("interval", False)}),
    "d1_cont_second": (lambda s, o: est.est_d1_cont_second(
        float(o.lth_largest(2)), o.k).estimate, {("interval", False)}),
    "weighted": (_eval_weighted, {("interval", True), ("interval", False)}),
    "square_discrete": (lambda s, o: est.est_square_discrete(
        int(o.max_component()), o.k, o.geometry.dim).estimate, {("square", True)}),
    "square_continuous": (lambda s, o: est.est_square_continuous(
        float(o.max_component()), o.k, o.geometry.dim).estimate, {("square", False)}),
    "ball_discrete": (lambda s, o: est.est_ball_discrete(
        int(o.max_sum_sq()), o.k).estimate, {("ball", True)}),
    "ball_continuous": (lambda s, o: est.est_ball_continuous(
        o.max_norm(), o.k, o.geometry.dim).estimate, {("ball", False)}),
    "square_recursive": (_eval_recursive, {("square", True)}),
}

CANONICAL_ESTIMATORS = {
    ("interval", True): "d1_max",
    ("interval", False): "d1_cont_max",
    ("square", True): "square_discrete",
    ("square", False): "square_continuous",
    ("ball", True): "ball_discrete",
    ("ball", False): "ball_continuous",
}


def canonical_estimator(geometry: GeometryDomain) -> EstimatorSpec:
    return EstimatorSpec(CANONICAL_ESTIMATORS[(geometry.kind, geometry.discrete)])


# ---------------------------------------------------------------------------
# Simulation runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    geometry: GeometryDomain
    k: int
    trials: int
    master_seed: int
    estimators: tuple[EstimatorSpec, ...] = ()
    rng_algorithm_id: str = RNG_ALGORITHM_ID

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.geometry.discrete and self.k > self.geometry.population_size():
            raise ValueError(
                f"k={self.k} exceeds population "
                f"{self.geometry.population_size()}"
            )
        if self.rng_algorithm_id != RNG_ALGORITHM_ID:
            raise ValueError(
                f"unsupported rng algorithm {self.rng_algorithm_id!r}; "
                f"this build implements {RNG_ALGORITHM_ID!r}"
            )
        if not self.estimators:
            object.__setattr__(self, "estimators", (canonical_estimator(self.geometry),))
        else:
            object.__setattr__(self, "estimators", tuple(self.estimators))
        key = (self.geometry.kind, self.geometry.discrete)
        for spec in self.estimators:
            evaluator = _EVALUATORS.get(spec.tag)
            if evaluator is None:
                raise ValueError(f"unknown estimator {spec.tag!r}")
            if key not in evaluator[1]:
                raise ValueError(
                    f"estimator {spec.label()} does not apply to "
                    f"{'discrete' if self.geometry.discrete else 'continuous'} "
                    f"{self.geometry.kind} geometry"
                )
            if spec.tag == "d1_lth":
                if spec.order is None or not 1 <= spec.order <= self.k:
                    raise ValueError(
                        f"d1_lth needs an order in 1..k={self.k}, got {spec.order}"
                    )
            elif spec.tag == "weighted":
                if spec.alpha is None or not 0 <= spec.alpha <= 1:
                    raise ValueError(f"weighted needs alpha in [0, 1], got {spec.alpha}")
                if self.k < 2:
                    raise ValueError(f"weighted needs k >= 2, got {self.k}")
            elif spec.tag in ("d1_cont_second", "d1_spread") and self.k < 2:
                raise ValueError(
                    f"estimator {spec.label()} needs k >= 2, got {self.k}"
                )


@dataclass(frozen=True)
class EstimatorStats:
    """Aggregates for one estimator across all trials that produced a value."""

    mean: float
    variance: float
    bias: float
    standard_error: float
    trials: int
    failures: int = 0


@dataclass(frozen=True)
class SimulationReport:
    """Pure function of its SimConfig; wall_clock is diagnostic only and is
    excluded from serialized/compared content."""

    config: SimConfig
    stats: dict[str, EstimatorStats]
    wall_clock: float = field(compare=False, default=0.0)


def _aggregate(values: list[float], true_param: float, failures: int) -> EstimatorStats:
    n = len(values)
    if n == 0:
        return EstimatorStats(math.nan, math.nan, math.nan, math.nan, 0, failures)
    mean = math.fsum(values) / n
    if n == 1:
        variance = 0.0
    else:
        variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    se = math.sqrt(variance / n) if n else math.nan
    return EstimatorStats(mean, variance, mean - true_param, se, n, failures)


def run_trials(config: SimConfig) -> SimulationReport:
    """Run the Monte Carlo experiment described by ``config``.

    Every listed estimator is evaluated on the same per-trial sample.
    Per-trial estimator domain errors (possible only in degenerate
    configurations) are counted as failures and excluded from aggregates.
    """
    started = time.perf_counter()
    streams = TrialStreams(config.master_seed)
    specs = config.estimators
    values: list[list[float]] = [[] for _ in specs]
    failures = [0] * len(specs)
    evaluators = [_EVALUATORS[s.tag][0] for s in specs]
    for t in range(config.trials):
        rng = streams.trial(t)
        obs = sample_observation(config.geometry, config.k, rng)
        for i, spec in enumerate(specs):
            try:
                values[i].append(evaluators[i](spec, obs))
            except (ValueError, IterationError):
                failures[i] += 1
    true_param = config.geometry.true_parameter
    stats = {
        spec.label(): _aggregate(values[i], true_param, failures[i])
        for i, spec in enumerate(specs)
    }
    return SimulationReport(config, stats, time.perf_counter() - started)


# ---------------------------------------------------------------------------
# Paired comparison and recursive experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    """Paired 1D-vs-2D experiment at matched information (2k components).

    pairs_*: k pairs from the N x N grid, square estimator.
    flat_*: 2k draws from {1..N^2}, 1D max estimator, square-rooted.
    """

    N: int
    k: int
    trials: int
    master_seed: int
    mean_pairs_2d: float
    var_pairs_2d: float
    mean_flat_1d: float
    var_flat_1d: float
    winner: str
    rng_algorithm_id: str = RNG_ALGORITHM_ID


def compare_1d_2d(N: int, k: int, trials: int, master_seed: int) -> ComparisonReport:
    """Estimate N both ways from equally much data and compare variances."""
    if 2 * k > N * N:
        raise ValueError(f"needs 2k <= N^2, got k={k}, N={N}")
    grid = GeometryDomain("square", True, N, dim=2)
    flat = GeometryDomain("interval", True, N * N)
    streams = TrialStreams(master_seed)
    est_2d: list[float] = []
    est_1d: list[float] = []
    for t in range(trials):
        rng = streams.trial(t)
        obs2 = sample_observation(grid, k, rng)
        est_2d.append(
            est.est_square_discrete(int(obs2.max_component()), k, 2).estimate
        )
        obs1 = sample_observation(flat, 2 * k, rng)
        n_sq_hat = est.est_d1_max(int(obs1.largest()), 2 * k).estimate
        est_1d.append(math.sqrt(n_sq_hat))
    agg2 = _aggregate(est_2d, float(N), 0)
    agg1 = _aggregate(est_1d, float(N), 0)
    if agg1.variance < agg2.variance:
        winner = "1d"
    elif agg2.variance < agg1.variance:
        winner = "2d"
    else:
        winner = "tie"
    return ComparisonReport(
        N, k, trials, master_seed,
        agg2.mean, agg2.variance, agg1.mean, agg1.variance, winner,
    )


@dataclass(frozen=True)
class RecursiveExperimentReport:
    """Convergence behaviour of the recursive square estimator.

    Two starting guesses per trial (the observed component max, and ten
    times it); agreement means both converged to the same fixed point
    within tol.  Bias is reported side by side with the direct square
    estimator, not asserted.
    """

    N: int
    k: int
    trials: int
    tol: float
    master_seed: int
    converged_fraction: float
    agreement_fraction: float
    mean_recursive: float
    bias_recursive: float
    mean_direct: float
    bias_direct: float
    iteration_errors: int
    rng_algorithm_id: str = RNG_ALGORITHM_ID


def recursive_convergence_experiment(N: int, k: int, trials: int, tol: float,
                                     master_seed: int) -> RecursiveExperimentReport:
    grid = GeometryDomain("square", True, N, dim=2)
    streams = TrialStreams(master_seed)
    fixed_points: list[float] = []
    direct: list[float] = []
    converged = 0
    agreed = 0
    errors = 0
    for t in range(trials):
        rng = streams.trial(t)
        obs = sample_observation(grid, k, rng)
        maxima = obs.component_maxima()
        max_x, max_y = int(maxima[0]), int(maxima[1])
        n0 = max(max_x, max_y)
        direct.append(est.est_square_discrete(int(obs.max_component()), k, 2).estimate)
        try:
            first = est.est_square_recursive(max_x, max_y, k, n0, tol=tol)
            second = est.est_square_recursive(max_x, max_y, k, 10 * n0, tol=tol)
        except IterationError:
            errors += 1
            continue
        if first.converged and second.converged:
            converged += 1
            if abs(first.estimate - second.estimate) <= 10 * tol:
                agreed += 1
            fixed_points.append(first.estimate)
    agg_rec = _aggregate(fixed_points, float(N), errors)
    agg_dir = _aggregate(direct, float(N), 0)
    return RecursiveExperimentReport(
        N, k, trials, tol, master_seed,
        converged / trials,
        agreed / converged if converged else 0.0,
        agg_rec.mean, agg_rec.bias, agg_dir.mean, agg_dir.bias, errors,
    )
