"""Command-line interface: ``carpetdim <subcommand> [flags]``.

Exit codes: 0 ok, 1 property violation, 2 bad input, 3 convergence failure,
4 resource limit.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys

import numpy as np

from . import carpet as cc
from .errors import CertificationFailure, ConvergenceFailure, ResourceLimit
from .frontier import frontier_samples, psi, reference_row_entropies
from .optimizer import brute_force, maximize, sweep
from .symdyn import (
    count_entropy_bounded,
    count_rowentropy_above,
    heuristic_schedule,
    mean_local_dimensions,
    table_scales,
    target_word,
    types_bound,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_RESOURCE = 0, 1, 2, 3, 4

FIGURE5_CARPET = {
    "N": 3,
    "M": 8,
    "rows": [
        {"column": 1, "fibers": [1, 2, 3, 4, 5]},
        {"column": 2, "fibers": [1, 2]},
        {"column": 3, "fibers": [1, 2, 3, 4, 5, 6, 7, 8]},
    ],
}
FIGURE5_H = 0.8
FIGURE5_ALPHAS = (0.0, 6.0, 600)


class InputError(Exception):
    pass


def fmt(x) -> str:
    """Nine significant digits."""
    return f"{float(x):.9g}"


def fmt_active(active) -> str:
    return ";".join(str(i) for i in sorted(active))


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _load_spec(args) -> cc.CarpetSpec:
    if getattr(args, "figure5", False):
        return cc.validate_carpet(FIGURE5_CARPET)
    if not args.carpet:
        raise InputError("--carpet is required")
    try:
        return cc.load_carpet(args.carpet)
    except OSError as exc:
        raise InputError(f"cannot read carpet file: {exc}") from None


def _load_bernoulli(spec: cc.CarpetSpec, path: str) -> cc.ProbVector:
    """Probability vector file: a list of D weights or a mapping ``{"a:b": w}``."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read probability vector {path}: {exc}") from None
    if isinstance(raw, dict) and "weights" in raw:
        raw = raw["weights"]
    if isinstance(raw, list):
        return cc.ProbVector(spec, raw)
    if isinstance(raw, dict):
        parsed = {}
        for key, v in raw.items():
            a, _, b = str(key).partition(":")
            parsed[(int(a), int(b))] = float(v)
        return cc.ProbVector.from_mapping(spec, parsed)
    raise InputError("probability vector must be a list or an a:b mapping")


def _params(args, spec: cc.CarpetSpec, alpha: float) -> cc.DimParams:
    if getattr(args, "figure5", False):
        return cc.DimParams.ball(alpha, FIGURE5_H)
    H = args.H
    if args.H_from_bernoulli is not None:
        if H is not None:
            raise InputError("give only one of --H and --H-from-bernoulli")
        H = cc.h_from_bernoulli(spec, _load_bernoulli(spec, args.H_from_bernoulli))
    if args.target == "ball":
        if H is None:
            raise InputError("ball targets need --H or --H-from-bernoulli")
        params = cc.DimParams.ball(alpha, H)
    else:
        if H is not None:
            raise InputError("cylinder targets take no H")
        params = cc.DimParams.cylinder(alpha)
    params.check(spec)
    return params


def _require_alpha(args) -> float:
    if args.alpha is None:
        raise InputError("--alpha is required")
    return float(args.alpha)


# --------------------------------------------------------------------------

def cmd_dim(args) -> int:
    spec = _load_spec(args)
    params = _params(args, spec, _require_alpha(args))
    res = maximize(spec, params, grid_starts=args.starts)
    print(f"DIM {fmt(res.value)}")
    print("theta " + " ".join(fmt(z) for z in res.argmax.as_tuple()))
    for i, d in enumerate(res.breakdown.d, 1):
        print(f"d{i} {fmt(d)}")
    print(f"active {fmt_active(res.breakdown.active)}")
    return EXIT_OK


def _alpha_grid(args) -> np.ndarray:
    if args.figure5:
        lo, hi, steps = FIGURE5_ALPHAS
    else:
        if args.alpha_min is None or args.alpha_max is None:
            raise InputError("sweep needs --alpha-min and --alpha-max (or --figure5)")
        lo, hi, steps = args.alpha_min, args.alpha_max, args.steps
    if steps < 2 or not hi > lo:
        raise InputError(f"degenerate alpha range [{lo}, {hi}] with {steps} points")
    return np.linspace(lo, hi, steps)


def cmd_sweep(args) -> int:
    spec = _load_spec(args)
    alphas = _alpha_grid(args)
    params = _params(args, spec, float(alphas[0]))
    results = sweep(spec, params, alphas, grid_starts=args.starts)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "dim"] + [f"d{i}" for i in range(1, 7)] + ["active_set"])
        for a, r in zip(alphas, results):
            w.writerow([fmt(a), fmt(r.value)] + [fmt(d) for d in r.breakdown.d] + [fmt_active(r.breakdown.active)])
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = _load_spec(args)
    params = _params(args, spec, _require_alpha(args))
    K = args.resolution
    tol = args.tolerance if args.tolerance is not None else 0.9 / K
    brute = brute_force(spec, params, resolution=K, max_lattice=args.max_lattice)
    best = maximize(spec, params, grid_starts=args.starts).value
    gap = best - brute
    ok = abs(gap) <= tol and brute <= best + 1e-9
    print(f"brute_force {fmt(brute)}")
    print(f"maximize {fmt(best)}")
    print(f"gap {fmt(gap)}")
    print(f"tolerance {fmt(tol)}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_simulate(args) -> int:
    spec = _load_spec(args)
    params = _params(args, spec, _require_alpha(args))
    if args.n is None or args.n < 1:
        raise InputError("--n must be a positive integer")
    quad = maximize(spec, params, grid_starts=args.starts).vectors
    n = args.n
    f_n = int(round(params.alpha * n))
    target = target_word(spec, f_n, params.H if params.target_kind == "ball" else None)
    schedule = heuristic_schedule(spec, n, f_n, target, quad, params.target_kind)
    scales = table_scales(spec, n, f_n, args.tail_factor)
    if len(set(scales)) != 6 or scales[0] < 1:
        raise InputError(f"n={n} too small: scales {scales} are not six distinct positive integers")
    predicted = cc.dim_functions(spec, params, [p.profile() for p in quad]).d
    curve = np.unique(np.concatenate([
        np.unique(np.geomspace(1, scales[-1], args.curve_points).astype(np.int64)), scales]))
    mean, err = mean_local_dimensions(schedule, curve, args.words, args.seed)
    at = {int(m): i for i, m in enumerate(curve)}
    pred_at = dict(zip(scales, predicted))

    print("index m predicted simulated stderr")
    for i, m in enumerate(scales, 1):
        j = at[m]
        print(f"{i} {m} {fmt(predicted[i - 1])} {fmt(mean[j])} {fmt(err[j])}")
    if args.table:
        with _output(args.table) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "m", "predicted", "simulated", "stderr"])
            for i, m in enumerate(scales, 1):
                w.writerow([i, m, fmt(predicted[i - 1]), fmt(mean[at[m]]), fmt(err[at[m]])])
    if args.out:
        with _output(args.out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["m", "d_m", "predicted"])
            for m, d in zip(curve, mean):
                w.writerow([int(m), fmt(d), fmt(pred_at[int(m)]) if int(m) in pred_at else ""])
    return EXIT_OK


def cmd_count(args) -> int:
    spec = _load_spec(args)
    if args.n is None or args.n < 1:
        raise InputError("--n must be a positive integer")
    if args.h is None and args.z is None:
        raise InputError("count needs --h and/or --z")
    ok = True
    if args.h is not None:
        c = count_entropy_bounded(spec, args.n, args.h, max_types=args.max_types)
        bound = types_bound(spec, args.n, args.h)
        good = c <= bound
        ok &= good
        print(f"entropy_at_most {fmt(args.h)} count {c} bound {fmt(bound)} {'PASS' if good else 'FAIL'}")
    if args.z is not None:
        c = count_rowentropy_above(spec, args.n, args.z, max_types=args.max_types)
        hr_D, _, log_R = reference_row_entropies(spec)
        line = f"row_entropy_at_least {fmt(args.z)} count {c}"
        if hr_D <= args.z <= log_R:
            bound = types_bound(spec, args.n, psi(spec, args.z))
            good = c <= bound
            ok &= good
            line += f" bound {fmt(bound)} {'PASS' if good else 'FAIL'}"
        print(line)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_frontier(args) -> int:
    spec = _load_spec(args)
    if args.points < 2:
        raise InputError("--points must be at least 2")
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z", "psi", "beta"])
        for fp in frontier_samples(spec, args.points):
            w.writerow([fmt(fp.z), fmt(fp.psi), fmt(fp.beta)])
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--carpet", help="carpet JSON file")
    common.add_argument("--target", choices=("cylinder", "ball"), default="cylinder")
    common.add_argument("--H", type=float, default=None, help="row average of log T for ball targets")
    common.add_argument("--H-from-bernoulli", dest="H_from_bernoulli", metavar="FILE",
                        help="derive H from a probability vector file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("--starts", type=int, default=2, help="multistart points per tilt coordinate")

    p = argparse.ArgumentParser(prog="carpetdim", description="Shrinking-target dimensions on self-affine carpets.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dim", parents=[common], help="dimension at one alpha")
    s.add_argument("--alpha", type=float)
    s.set_defaults(func=cmd_dim)

    s = sub.add_parser("sweep", parents=[common], help="dimension over a range of alpha (CSV)")
    s.add_argument("--alpha-min", type=float)
    s.add_argument("--alpha-max", type=float)
    s.add_argument("--steps", type=int, default=50)
    s.add_argument("--figure5", action="store_true", help="N=3, M=8, T=(5,2,8), ball, H=0.8, 600 alphas in [0,6]")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("oracle", parents=[common], help="compare the optimizer with lattice brute force")
    s.add_argument("--alpha", type=float)
    s.add_argument("--resolution", type=int, default=30)
    s.add_argument("--tolerance", type=float, default=None, help="default 0.9 / resolution")
    s.add_argument("--max-lattice", type=int, default=2_000_000)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo scale table and local-dimension curve")
    s.add_argument("--alpha", type=float)
    s.add_argument("--n", type=int)
    s.add_argument("--words", type=int, default=200)
    s.add_argument("--tail-factor", type=int, default=32)
    s.add_argument("--curve-points", type=int, default=60)
    s.add_argument("--table", help="scale table CSV path")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("count", parents=[common], help="exact type-class counts against their bounds")
    s.add_argument("--n", type=int)
    s.add_argument("--h", type=float, help="count words with entropy at most h")
    s.add_argument("--z", type=float, help="count words with row entropy at least z")
    s.add_argument("--max-types", type=int, default=10 ** 7)
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("frontier", parents=[common], help="samples of the entropy frontier (CSV)")
    s.add_argument("--points", type=int, default=101)
    s.set_defaults(func=cmd_frontier)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ResourceLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConvergenceFailure, CertificationFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
