"""Command-line front end.

Exit codes: 0 success, 2 usage or parameter error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import asymptotics, closed_m1, closed_m2, ctmc, io, simulate, spectral, tables, wasted
from .model import (
    ModelError,
    ModelParams,
    ParameterError,
    SolverConfig,
    TruncationError,
    structural_report,
    validate_params,
)

EXIT_USAGE = 2
EXIT_NUMERIC = 3

SOLVE_METHODS = ("ctmc", "closed", "spectral", "asymptotic-ht", "asymptotic-tail")


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s}")
    return v


def cmd_solve(args) -> int:
    p = validate_params(ModelParams(args.m, args.rho))
    cfg = SolverConfig(R=args.rmax, tol_rel=args.tol)
    R = cfg.truncation(p)
    if args.method == "ctmc":
        d = ctmc.solve_stationary(p, cfg, closure=args.closure)
    elif args.method == "spectral":
        d = spectral.solve_spectral(p, cfg)
    elif args.method == "closed":
        if p.m == 1:
            d = closed_m1.full_distribution_m1(p.rho, R, cfg)
        elif p.m == 2:
            d = closed_m2.full_distribution_m2(p.rho, R, cfg)
        else:
            raise ParameterError(f"closed forms exist only for m = 1, 2 (got m={p.m})")
    elif args.method == "asymptotic-ht":
        d = asymptotics.heavy_traffic_table(p, R, args.terms)
    else:
        d = asymptotics.tail_table(p, R)
    if d.method != "asymptotic":
        rep = structural_report(d)
        d.meta.update({f"check_{k}": v for k, v in rep.items()})
    _emit(io.dumps(d, args.format), args.out)
    return 0


def cmd_table1(args) -> int:
    rows = tables.table1()
    if args.format == "json":
        _emit(json.dumps([r.__dict__ for r in rows], indent=1), "-")
        return 0
    print(f"{'eps':>5} {'k':>2} {'exact':>10} {'one-term':>10} {'two-term':>10}")
    for r in rows:
        # the reference table cuts (does not round) to three figures
        cells = [tables.fmt3(v, "truncate") for v in (r.exact, r.one_term, r.two_term)]
        print(f"{r.eps:>5} {r.k:>2} " + " ".join(f"{c:>10}" for c in cells))
    return 0


def cmd_table2(args) -> int:
    rows = tables.table2()
    if args.format == "json":
        _emit(json.dumps([r.__dict__ for r in rows], indent=1), "-")
        return 0
    print(f"{'r':>3} {'k':>2} {'exact':>10} {'spectral':>10} {'asymptotic':>10}")
    for r in rows:
        cells = [tables.fmt3(v) for v in (r.exact, r.spectral, r.asymptotic)]
        print(f"{r.r:>3} {r.k:>2} " + " ".join(f"{c:>10}" for c in cells))
    return 0


def cmd_wasted(args) -> int:
    cfg = SolverConfig(tol_rel=args.tol)
    w = wasted.w_pmf(args.rho, args.lmax, cfg, threads=args.threads, method=args.method)
    cm = wasted.coffman_mitrani_check(w.mean, args.rho)
    report = {
        "rho": w.rho,
        "lmax": w.Lmax,
        "pmf": w.pmf.tolist(),
        "total": w.total,
        "mean": w.mean,
        "mean_tail_lower_bound": wasted.w_mean_tail_estimate(w),
        "jmax": w.jmax,
        "n_max": w.n_max,
        "diagnostics": w.diagnostics,
        "coffman_mitrani": cm,
    }
    if args.format == "json":
        _emit(json.dumps(report, indent=1), args.out)
        return 0
    lines = [f"{'L':>4} {'P[W=L]':>24}"]
    lines += [f"{L:>4} {p:>24.16e}" for L, p in enumerate(w.pmf)]
    lines.append(f"sum P = {w.total:.16g}  (tail mass {w.diagnostics['tail_mass']:.3e})")
    lines.append(f"E[W]  = {w.mean:.16g}")
    lines.append(
        f"heavy-traffic band [{cm['lower']:.4g}, {cm['upper']:.4g}]: "
        + ("inside" if cm["inside"] else "outside")
        + " (diagnostic only)"
    )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_simulate(args) -> int:
    cfg = simulate.SimConfig(
        seed=args.seed, warmup_events=args.warmup, sample_events=args.events, replications=args.reps
    )
    if args.mode == "aggregate":
        s = simulate.simulate_aggregate(ModelParams(args.m, args.rho), cfg, threads=args.threads)
    else:
        s = simulate.simulate_detailed(args.rho, cfg, m=args.m, threads=args.threads)
    _emit(json.dumps(s.to_dict(), indent=1, sort_keys=True), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="psalloc", description="Stationary occupancy of the PS storage-allocation model.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute a pi(k, r) table")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--method", choices=SOLVE_METHODS, default="ctmc")
    s.add_argument("--rmax", type=_nonneg_int, default=None, help="truncation level R (default: automatic)")
    s.add_argument("--out", default="-")
    s.add_argument("--format", choices=io.FORMATS, default="csv")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--terms", type=int, choices=(1, 2), default=2, help="heavy-traffic terms")
    s.add_argument("--closure", choices=ctmc.CLOSURES, default="tail")
    s.set_defaults(func=cmd_solve)

    for name, fn, help_ in (("table1", cmd_table1, "heavy-traffic table, m=3"), ("table2", cmd_table2, "large-r table, m=3, rho=0.5")):
        t = sub.add_parser(name, help=help_)
        t.add_argument("--format", choices=("text", "json"), default="text")
        t.set_defaults(func=fn)

    w = sub.add_parser("wasted", help="wasted-space distribution")
    w.add_argument("--rho", type=float, required=True)
    w.add_argument("--lmax", type=_nonneg_int, default=30)
    w.add_argument("--method", choices=wasted.ROW_METHODS, default="ctmc")
    w.add_argument("--tol", type=float, default=1e-12)
    w.add_argument("--threads", type=_positive_int, default=1)
    w.add_argument("--format", choices=("text", "json"), default="text")
    w.add_argument("--out", default="-")
    w.set_defaults(func=cmd_wasted)

    m = sub.add_parser("simulate", help="seeded event simulation")
    m.add_argument("--mode", choices=("aggregate", "detailed"), default="aggregate")
    m.add_argument("--m", type=_positive_int, default=1)
    m.add_argument("--rho", type=float, required=True)
    m.add_argument("--seed", type=_nonneg_int, default=12345)
    m.add_argument("--events", type=_positive_int, default=1_000_000, help="sampled events per replication")
    m.add_argument("--warmup", type=_nonneg_int, default=10_000)
    m.add_argument("--reps", type=_positive_int, default=10)
    m.add_argument("--threads", type=_positive_int, default=1)
    m.add_argument("--out", default="-")
    m.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParameterError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

if __name__ == "__main__":
    sys.exit(main())
