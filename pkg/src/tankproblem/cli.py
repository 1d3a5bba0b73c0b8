"""Command-line surface: estimation from observed data, simulation sweeps,
enumeration-oracle verification, and identity/bound checking, with
machine-readable JSON or CSV output.

Exit codes: 0 success, 2 usage error, 3 check failure, 4 resource cap.
Output records are deterministic for identical argv (wall-clock timings go
to stderr only), and JSON output validates against
schemas/output_record.schema.json.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

from . import asymptotics, distributions, estimators, exactmath, lattice
from . import simulate as sim
from .errors import ResourceLimitError

SCHEMA_VERSION = "1.0"
_TRIAL_CAP_ENV = "TANKPROBLEM_TRIAL_CAP"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CHECK_FAILED = 3
EXIT_RESOURCE = 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, Fraction):
        return {"num": str(value.numerator), "den": str(value.denominator)}
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return value.item()  # numpy scalars
    return value


def _csv_cell(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, tuple)):
        return ";".join(_csv_cell(v) for v in value)
    return str(value)


def emit(record: dict, rows: list[dict], fmt: str, out: str | None) -> None:
    """Write the output record (json) or its row view (csv, header always)."""
    if fmt == "json":
        text = json.dumps(_jsonable(record), indent=2) + "\n"
    else:
        buf = io.StringIO()
        fieldnames = list(rows[0].keys()) if rows else ["empty"]
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(v) for k, v in row.items()})
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _record(command: str, inputs: dict, results, provenance: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "provenance": provenance,
    }


# ---------------------------------------------------------------------------
# Observation files
# ---------------------------------------------------------------------------

def parse_observations(path: str, discrete: bool, dim: int) -> list[tuple]:
    """Read one point per line, whitespace-separated coordinates.

    '#' starts a comment; blank lines are skipped.  Discrete mode demands
    decimal integers; a real literal there is a hard error.
    """
    points = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if len(tokens) != dim:
                raise UsageError(
                    f"{path}:{lineno}: expected {dim} coordinate(s), "
                    f"got {len(tokens)}"
                )
            try:
                if discrete:
                    point = tuple(int(tok) for tok in tokens)
                else:
                    point = tuple(float(tok) for tok in tokens)
            except ValueError:
                kind = "integer" if discrete else "real"
                raise UsageError(
                    f"{path}:{lineno}: {line!r} is not a valid {kind} point"
                ) from None
            points.append(point)
    if not points:
        raise UsageError(f"{path}: no observations found")
    return points


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------

def _statistic_from_points(points, geometry: str, discrete: bool,
                           estimator: str, order: int):
    flat = [c for p in points for c in p]
    if geometry == "line":
        values = sorted(flat)
        if estimator == "spread":
            return values[-1] - values[0]
        if estimator == "lth":
            if order > len(values):
                raise UsageError(f"order {order} exceeds sample size {len(values)}")
            return values[-order]
        if estimator == "second":
            if len(values) < 2:
                raise UsageError("second-largest needs at least two observations")
            return values[-2]
        return values[-1]
    if geometry == "square":
        return max(flat)
    # ball: largest squared norm (discrete) or largest norm (continuous)
    norms_sq = [sum(c * c for c in p) for p in points]
    biggest = max(norms_sq)
    return biggest if discrete else math.sqrt(biggest)


def cmd_estimate(args) -> int:
    discrete = args.mode == "discrete"
    dim = args.dim if args.dim is not None else (1 if args.geometry == "line" else 2)
    if args.geometry == "line" and dim != 1:
        raise UsageError("line geometry is one-dimensional")
    estimator = args.estimator or ("max" if args.geometry == "line" else "auto")
    if args.geometry != "line" and args.estimator:
        raise UsageError("--estimator applies to line geometry only")
    if estimator == "second" and discrete:
        raise UsageError("use --estimator lth --order 2 in discrete mode")
    if estimator in ("spread", "lth") and not discrete:
        raise UsageError(f"--estimator {estimator} applies to discrete mode only")

    if args.observations:
        points = parse_observations(args.observations, discrete, dim)
        k = len(points)
        if args.k is not None and args.k != k:
            raise UsageError(f"--k {args.k} contradicts {k} observed points")
        stat = _statistic_from_points(points, args.geometry, discrete,
                                      estimator, args.order)
    else:
        if args.k is None:
            raise UsageError("--k is required with --stat")
        k = args.k
        stat = args.stat
        if discrete:
            if stat != int(stat):
                raise UsageError(f"discrete statistic must be an integer, got {stat}")
            stat = int(stat)

    try:
        if args.geometry == "line":
            if discrete:
                if estimator == "max":
                    result = estimators.est_d1_max(stat, k)
                elif estimator == "spread":
                    result = estimators.est_d1_spread(stat, k)
                else:
                    result = estimators.est_d1_lth(stat, k, args.order)
            else:
                if estimator == "second":
                    result = estimators.est_d1_cont_second(stat, k)
                else:
                    result = estimators.est_d1_cont(stat, k)
        elif args.geometry == "square":
            result = (estimators.est_square_discrete(stat, k, dim) if discrete
                      else estimators.est_square_continuous(stat, k, dim))
        else:
            result = (estimators.est_ball_discrete(stat, k) if discrete
                      else estimators.est_ball_continuous(stat, k, dim))
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    inputs = {
        "geometry": args.geometry, "mode": args.mode, "dim": dim, "k": k,
        "statistic": stat,
        "observations": args.observations,
    }
    results = {
        "estimate": result.estimate,
        "estimator": result.estimator,
        "approximate": result.approximate,
        "flags": list(result.flags),
    }
    provenance = {"formula": result.formula, "approximate": result.approximate}
    rows = [{"estimator": result.estimator, "estimate": result.estimate,
             "statistic": stat, "k": k, "approximate": result.approximate,
             "flags": list(result.flags)}]
    emit(_record("estimate", inputs, results, provenance), rows, args.format, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _geometry_from_args(args) -> sim.GeometryDomain:
    kind = {"line": "interval", "square": "square", "ball": "ball"}[args.geometry]
    discrete = args.mode == "discrete"
    dim = args.dim if args.dim is not None else (1 if kind == "interval" else 2)
    if kind == "ball":
        if args.r is None:
            raise UsageError("ball geometry needs --r")
        size = args.r
    else:
        if args.N is None:
            raise UsageError(f"{args.geometry} geometry needs --N")
        size = args.N
    return sim.GeometryDomain(kind, discrete, size, dim)


def cmd_simulate(args) -> int:
    cap_raw = os.environ.get(_TRIAL_CAP_ENV)
    if cap_raw is not None and args.trials > int(cap_raw):
        raise ResourceLimitError(
            f"trials {args.trials} exceeds cap {cap_raw} ({_TRIAL_CAP_ENV})",
            needed=args.trials, cap=int(cap_raw),
        )
    geometry = _geometry_from_args(args)
    try:
        specs = tuple(
            sim.EstimatorSpec.parse(text)
            for text in (args.estimators.split(",") if args.estimators else [])
        )
        config = sim.SimConfig(geometry, args.k, args.trials, args.seed, specs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = sim.run_trials(config)
    print(f"# wall clock: {report.wall_clock:.3f}s", file=sys.stderr)

    inputs = {
        "geometry": args.geometry, "mode": args.mode, "dim": geometry.dim,
        "size": geometry.size, "k": args.k, "trials": args.trials,
        "seed": args.seed,
        "estimators": [s.label() for s in config.estimators],
    }
    stats = {
        label: {
            "mean": s.mean, "variance": s.variance, "bias": s.bias,
            "standard_error": s.standard_error, "trials": s.trials,
            "failures": s.failures,
        }
        for label, s in report.stats.items()
    }
    results = {"rng_algorithm": config.rng_algorithm_id, "estimators": stats}
    provenance = {
        "rng_algorithm": config.rng_algorithm_id,
        "formulas": {
            s.label(): estimators.FORMULAS[s.tag] for s in config.estimators
        },
    }
    rows = [
        {"estimator": label, **stat, "seed": args.seed}
        for label, stat in stats.items()
    ]
    emit(_record("simulate", inputs, results, provenance), rows, args.format, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def cmd_oracle(args) -> int:
    cap = args.enum_cap
    checks = 0
    failures: list[dict] = []
    skipped: list[dict] = []
    for N in range(1, args.max_N + 1):
        for k in range(1, N + 1):
            try:
                sums = distributions.order_stat_sums(N, k, cap=cap)
            except ResourceLimitError as exc:
                skipped.append({"N": N, "k": k, "reason": str(exc)})
                continue
            for order in range(1, k + 1):
                checks += 1
                mean = Fraction(sums.sum_val[k - order], sums.count)
                closed_mean = Fraction((N + 1) * (k - order + 1), k + 1)
                if mean != closed_mean:
                    failures.append({"check": "mean_lth", "N": N, "k": k,
                                     "order": order})
                if order <= 2:
                    closed = distributions.closed_moments_lth(N, k, order)
                    second = Fraction(sums.sum_sq[k - order], sums.count)
                    checks += 1
                    if second - mean * mean != closed.variance:
                        failures.append({"check": "variance_lth", "N": N,
                                         "k": k, "order": order})
            if k >= 2:
                checks += 1
                cov = distributions.oracle_covariance_top_two(N, k, cap=cap)
                if cov != distributions.closed_covariance_top_two(N, k):
                    failures.append({"check": "covariance_top_two", "N": N, "k": k})
    status = "pass" if not failures and not skipped else (
        "fail" if failures else "partial")
    inputs = {"max_N": args.max_N, "enum_cap": cap}
    results = {"checks": checks, "status": status,
               "failures": failures, "skipped": skipped}
    provenance = {"method": "exhaustive k-subset enumeration vs closed forms"}
    rows = [{"status": status, "checks": checks,
             "failures": len(failures), "skipped": len(skipped)}]
    emit(_record("oracle", inputs, results, provenance), rows, args.format, args.out)
    if failures:
        return EXIT_CHECK_FAILED
    if skipped:
        return EXIT_RESOURCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _verify_identities(max_N: int) -> tuple[int, list[dict]]:
    checks, failures = 0, []
    for n in range(0, min(max_N * 2, 60) + 1):
        for r in range(0, n + 1):
            checks += 1
            if not exactmath.check_hockey_stick(n, r):
                failures.append({"check": "hockey_stick", "n": n, "r": r})
    for N in range(1, max_N + 1):
        for k in range(1, N + 1):
            for b in range(0, k + 1):
                for c in range(0, k + 1):
                    checks += 1
                    if not exactmath.check_identity("I", (N, k, b, c)):
                        failures.append({"check": "I", "N": N, "k": k,
                                         "b": b, "c": c})
            for a in range(1, k + 1):
                for ident in ("II", "III"):
                    checks += 1
                    if not exactmath.check_identity(ident, (N, k, a)):
                        failures.append({"check": ident, "N": N, "k": k, "a": a})
    for a in range(0, 16):
        for b in range(0, 16):
            for k in range(0, max_N + 1):
                checks += 1
                if not exactmath.check_identity("IV", (a, b, k)):
                    failures.append({"check": "IV", "a": a, "b": b, "k": k})
    return checks, failures


def _verify_euler_maclaurin() -> tuple[int, list[dict]]:
    checks, failures = 0, []
    specs = [
        asymptotics.PowerSumSpec(w, a, b)
        for w in range(0, 13)
        for a, b in ((0, 10), (1, 100), (5, 1000), (1, 10000))
    ]
    for k in (2, 3, 4, 5):
        start = asymptotics.ceil_root(k, 2)
        for b in (100, 10000):
            specs.append(asymptotics.PowerSumSpec(
                2 * k, start, b, c=k * (k - 1) // 2, y=2 * k - 2))
    for spec in specs:
        checks += 1
        result = asymptotics.euler_maclaurin(spec)
        if abs(result.exact - result.approximation) > result.remainder_bound:
            failures.append({"check": "em_bracket", "w": spec.w, "a": spec.a,
                             "b": spec.b, "c": str(spec.c), "y": spec.y})
    for m in range(1, 13):
        for L in range(0, 4):
            top = min(m**L + 1, 40)
            for k in range(1, top + 1):
                checks += 1
                bounds = asymptotics.falling_factorial_bounds(m, L, k)
                if not bounds.lower <= bounds.exact <= bounds.upper:
                    failures.append({"check": "falling_factorial",
                                     "m": m, "L": L, "k": k})
    return checks, failures


def _verify_gauss_circle(max_r: int) -> tuple[int, list[dict]]:
    checks, failures = 0, []
    for r in range(1, max_r + 1):
        checks += 1
        err = lattice.gauss_circle_error(r)
        if err.abs_error > math.pi * (math.sqrt(2) * r + 0.5):
            failures.append({"check": "gauss_annulus", "r": r,
                             "abs_error": err.abs_error})
    return checks, failures


def cmd_verify(args) -> int:
    if not (args.identities or args.euler_maclaurin or args.gauss_circle):
        raise UsageError(
            "nothing to verify: pass --identities, --euler-maclaurin "
            "and/or --gauss-circle"
        )
    groups = {}
    failures: list[dict] = []
    total = 0
    if args.identities:
        n, f = _verify_identities(args.max_N)
        groups["identities"] = {"checks": n, "failures": len(f)}
        failures += f
        total += n
    if args.euler_maclaurin:
        n, f = _verify_euler_maclaurin()
        groups["euler_maclaurin"] = {"checks": n, "failures": len(f)}
        failures += f
        total += n
    if args.gauss_circle:
        n, f = _verify_gauss_circle(args.max_r)
        groups["gauss_circle"] = {"checks": n, "failures": len(f)}
        failures += f
        total += n
    status = "pass" if not failures else "fail"
    inputs = {"identities": args.identities,
              "euler_maclaurin": args.euler_maclaurin,
              "gauss_circle": args.gauss_circle,
              "max_N": args.max_N, "max_r": args.max_r}
    results = {"status": status, "checks": total, "groups": groups,
               "failures": failures}
    provenance = {"method": "exact summation / exact lattice counting"}
    rows = [{"group": name, **info} for name, info in groups.items()]
    emit(_record("verify", inputs, results, provenance), rows, args.format, args.out)
    return EXIT_CHECK_FAILED if failures else EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def cmd_compare(args) -> int:
    try:
        report = sim.compare_1d_2d(args.N, args.k, args.trials, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    inputs = {"N": args.N, "k": args.k, "trials": args.trials, "seed": args.seed}
    results = {
        "mean_pairs_2d": report.mean_pairs_2d,
        "var_pairs_2d": report.var_pairs_2d,
        "mean_flat_1d": report.mean_flat_1d,
        "var_flat_1d": report.var_flat_1d,
        "winner": report.winner,
        "rng_algorithm": report.rng_algorithm_id,
    }
    provenance = {"rng_algorithm": report.rng_algorithm_id,
                  "pairing": "k pairs from NxN grid vs 2k draws from {1..N^2}"}
    rows = [dict(results)]
    emit(_record("compare", inputs, results, provenance), rows, args.format, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tankproblem",
        description="Serial-number population estimators with exact oracles "
                    "and a reproducible Monte Carlo harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write output to this file instead of stdout")

    p = sub.add_parser("estimate", help="apply an estimator to observed data")
    p.add_argument("--geometry", choices=("line", "square", "ball"), required=True)
    p.add_argument("--mode", choices=("discrete", "continuous"), required=True)
    p.add_argument("--dim", type=int, help="dimension (default 1 for line, else 2)")
    p.add_argument("--k", type=int, help="sample size (inferred from a file)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--stat", type=float, help="the observed statistic itself")
    group.add_argument("--observations", help="file of points, one per line")
    p.add_argument("--estimator", choices=("max", "spread", "lth", "second"),
                   help="line-geometry estimator (default: max)")
    p.add_argument("--order", type=int, default=2,
                   help="which largest value --estimator lth uses")
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="Monte Carlo sweep of estimators")
    p.add_argument("--geometry", choices=("line", "square", "ball"), required=True)
    p.add_argument("--mode", choices=("discrete", "continuous"), default="discrete")
    p.add_argument("--dim", type=int)
    p.add_argument("--N", type=float, help="population bound (line/square)")
    p.add_argument("--r", type=float, help="radius (ball)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimators",
                   help="comma-separated tags, e.g. d1_max,d1_lth:2,weighted:0.5")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle",
                       help="closed-form moments vs full subset enumeration")
    p.add_argument("--max-N", type=int, required=True, dest="max_N")
    p.add_argument("--enum-cap", type=int, default=None, dest="enum_cap",
                   help="max subsets per (N, k); skipped cells are reported")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="identity / bound / lattice checks")
    p.add_argument("--identities", action="store_true")
    p.add_argument("--euler-maclaurin", action="store_true", dest="euler_maclaurin")
    p.add_argument("--gauss-circle", action="store_true", dest="gauss_circle")
    p.add_argument("--max-N", type=int, default=30, dest="max_N")
    p.add_argument("--max-r", type=int, default=2000, dest="max_r")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="1D vs 2D estimator at matched data volume")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
