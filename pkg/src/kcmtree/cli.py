"""Command-line front end.

Exit codes: 0 on success, 2 when a run finishes but its verdict fails
(for CI pipelines), 1 on any usage or runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import analysis
from .analysis import ExperimentConfig
from .bounds import product_mixing_threshold
from .model import ModelParams
from .montecarlo import OBSERVABLES, simulate
from .recursions import survival_bounds, survival_series
from .spectral import build_generator, mixing_time_exact, spectral_gap
from .tree import build_tree

VERDICT_FAILED = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write_json(data: dict, path: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True)
    if path is None:
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return ""
        return repr(value)
    return str(value)


def _write_csv(rows, fieldnames, path: str | None) -> None:
    fh = sys.stdout if path is None else open(path, "w", newline="")
    try:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row.get(name)) for name in fieldnames])
    finally:
        if path is not None:
            fh.close()


def _model_arguments(sub, depth_default=None):
    sub.add_argument("--k", type=int, default=2, help="children per vertex")
    sub.add_argument("--depth", "-L", type=int, required=depth_default is None,
                     default=depth_default, help="tree depth (root at level 0)")
    sub.add_argument("--p", type=float, required=True, help="occupation density")
    sub.add_argument("--j", type=int, default=None,
                     help="empty children required to unblock (default k)")


# ---------------------------------------------------------------------------
# exact solvers


def _cmd_exact_gap(args) -> int:
    tree = build_tree(args.k, args.depth)
    params = ModelParams(p=args.p, j=args.j if args.j is not None else args.k)
    gap = spectral_gap(build_generator(tree, params), tol=args.tol)
    _write_json({"k": args.k, "L": args.depth, "p": args.p, "j": params.j,
                 "gap": gap, "t_rel": 1.0 / gap, "t1": None, "t2": None,
                 "start_policy": None, "solver_tolerance": args.tol},
                args.output)
    return 0


def _cmd_exact_mix(args) -> int:
    tree = build_tree(args.k, args.depth)
    params = ModelParams(p=args.p, j=args.j if args.j is not None else args.k)
    m1 = mixing_time_exact(tree, params, a=1, start_policy=args.start_policy,
                           seed=args.seed, rel_tol=args.rel_tol)
    m2 = mixing_time_exact(tree, params, a=2, start_policy=args.start_policy,
                           seed=args.seed, rel_tol=args.rel_tol)
    _write_json({"k": args.k, "L": args.depth, "p": args.p, "j": params.j,
                 "gap": m1.gap, "t_rel": 1.0 / m1.gap, "t1": m1.value,
                 "t2": m2.value, "start_policy": m1.start_policy,
                 "solver_tolerance": args.rel_tol},
                args.output)
    return 0


# ---------------------------------------------------------------------------
# recursions


def _cmd_recursion(args) -> int:
    j = args.j if args.j is not None else args.k
    series = survival_series(args.k, args.p, args.n_max, j=j)
    n = np.arange(args.n_max + 1)
    bound_i = np.full(n.size, np.nan)
    bound_ii = np.full(n.size, np.nan)
    if j == args.k and args.p <= 1.0 / args.k + 1e-15:
        crit, sub = survival_bounds(args.k, args.p, n[1:])
        bound_i[1:] = crit
        bound_ii[1:] = sub
    rows = [{"n": int(i), "p_n": float(series.values[i]),
             "bound_i": float(bound_i[i]), "bound_ii": float(bound_ii[i])}
            for i in range(n.size)]
    _write_csv(rows, ["n", "p_n", "bound_i", "bound_ii"], args.output)
    return 0


# ---------------------------------------------------------------------------
# simulation


def _cmd_simulate(args) -> int:
    tree = build_tree(args.k, args.depth)
    params = ModelParams(p=args.p, j=args.j if args.j is not None else args.k)
    observables = tuple(s.strip() for s in args.observables.split(",") if s.strip())
    series = simulate(tree, params, horizon=args.horizon, seed=args.seed,
                      observables=observables, initial=args.initial,
                      sample_interval=args.sample_interval, burn_in=args.burn_in)
    rows = [dict({"t": float(t)},
                 **{name: float(series.samples[name][i]) for name in observables})
            for i, t in enumerate(series.times)]
    _write_csv(rows, ["t", *observables], args.output)
    meta = {"k": args.k, "L": args.depth, "p": args.p, "j": params.j,
            "seed": args.seed, "horizon": args.horizon, "burn_in": args.burn_in,
            "sample_interval": args.sample_interval, "initial": series.initial,
            "n_samples": series.n_samples, "observables": list(observables)}
    if args.output is not None:
        _write_json(meta, args.output + ".meta.json")
    return 0


# ---------------------------------------------------------------------------
# product-chain threshold


def _cmd_mix_bound(args) -> int:
    if args.gaps is not None:
        gaps = [float(s) for s in args.gaps.split(",") if s.strip()]
    elif args.gap is not None and args.copies is not None:
        gaps = [args.gap] * args.copies
    else:
        print("mix-bound needs either --gaps or both --gap and --copies",
              file=sys.stderr)
        return 1
    t_star = product_mixing_threshold(gaps, len(gaps))
    _write_json({"n": len(gaps), "gaps": gaps, "t_star": t_star}, args.output)
    return 0


# ---------------------------------------------------------------------------
# scaling experiments


def _load_config(path: str | None, factory) -> ExperimentConfig:
    if path is None:
        return factory()
    with open(path) as fh:
        return factory(**json.load(fh))


def _emit_report(report, prefix: str | None, tables: dict) -> int:
    if prefix is None:
        _write_json(report.to_dict(), None)
    else:
        _write_json(report.to_dict(), f"{prefix}.json")
        for suffix, (rows, fields) in tables.items():
            _write_csv(rows, fields, f"{prefix}{suffix}.csv")
        print(f"report written to {prefix}.json")
    return 0 if report.passed else VERDICT_FAILED


def _point_rows(points):
    return [{"depth": pt.depth, "x": pt.x, "value": pt.value,
             "stderr": pt.stderr, "method": pt.method} for pt in points]


def _cmd_scaling_critical(args) -> int:
    config = _load_config(args.config, analysis.default_critical_config)
    report = analysis.run_critical_scaling(config)
    tables = {"": (_point_rows(report.points),
                   ["depth", "x", "value", "stderr", "method"])}
    return _emit_report(report, args.output_prefix, tables)


def _cmd_scaling_quasicritical(args) -> int:
    config = _load_config(args.config, analysis.default_quasicritical_config)
    report = analysis.run_quasicritical_scaling(config)
    fields = ["eps", "p", "depth", "value", "stderr", "saturation_depth",
              "saturation_value", "saturation_stderr", "saturated",
              "bound_at_depth", "bound_at_reference", "reference_depth"]
    rows = [{name: getattr(pt, name) for name in fields} for pt in report.points]
    return _emit_report(report, args.output_prefix, {"": (rows, fields)})


def _cmd_scaling_mixing(args) -> int:
    config = _load_config(args.config, analysis.default_mixing_config)
    report = analysis.run_mixing_scaling(config)
    fields = ["depth", "t_rel", "t_rel_half", "t1", "t2", "lower_bracket",
              "upper_bracket", "upper_ratio", "start_policy"]
    rows = [{name: getattr(pt, name) for name in fields} for pt in report.points]
    return _emit_report(report, args.output_prefix, {"": (rows, fields)})


def _cmd_discontinuous_probe(args) -> int:
    config = _load_config(args.config, analysis.default_probe_config)
    report = analysis.run_discontinuous_probe(config,
                                              include_dynamics=not args.scan_only)
    tables = {
        "-survival": ([dict(row) for row in report.survival_scan],
                      ["p", "survival_at_n", "n"]),
        "-relaxation": (_point_rows(report.points),
                        ["depth", "x", "value", "stderr", "method"]),
    }
    return _emit_report(report, args.output_prefix, tables)


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> _Parser:
    parser = _Parser(prog="kcmtree",
                     description="Constrained spin dynamics on rooted k-ary trees")
    subs = parser.add_subparsers(dest="command", required=True,
                                 parser_class=_Parser)

    sub = subs.add_parser("exact-gap", help="spectral gap by exact eigensolve")
    _model_arguments(sub)
    sub.add_argument("--tol", type=float, default=1e-10)
    sub.add_argument("--output", default=None, help="JSON path (default stdout)")
    sub.set_defaults(func=_cmd_exact_gap)

    sub = subs.add_parser("exact-mix", help="exact L1/L2 mixing times")
    _model_arguments(sub)
    sub.add_argument("--rel-tol", type=float, default=1e-4)
    sub.add_argument("--start-policy", choices=("auto", "all", "heuristic"),
                     default="auto")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--output", default=None, help="JSON path (default stdout)")
    sub.set_defaults(func=_cmd_exact_mix)

    sub = subs.add_parser("recursion", help="survival recursion with decay bounds")
    sub.add_argument("--k", type=int, default=2)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--j", type=int, default=None)
    sub.add_argument("--n-max", type=int, default=1000)
    sub.add_argument("--output", default=None, help="CSV path (default stdout)")
    sub.set_defaults(func=_cmd_recursion)

    sub = subs.add_parser("simulate", help="event-driven equilibrium dynamics")
    _model_arguments(sub)
    sub.add_argument("--horizon", type=float, required=True)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--burn-in", type=float, default=0.0)
    sub.add_argument("--sample-interval", type=float, default=1.0)
    sub.add_argument("--initial", default="equilibrium",
                     choices=("equilibrium", "all-ones", "all-zeros"))
    sub.add_argument("--observables", default=",".join(OBSERVABLES))
    sub.add_argument("--output", default=None,
                     help="CSV path; metadata JSON lands beside it (default stdout)")
    sub.set_defaults(func=_cmd_simulate)

    sub = subs.add_parser("mix-bound", help="product-chain mixing threshold t*")
    sub.add_argument("--gaps", default=None, help="comma-separated factor gaps")
    sub.add_argument("--gap", type=float, default=None,
                     help="single gap, repeated --copies times")
    sub.add_argument("--copies", type=int, default=None)
    sub.add_argument("--output", default=None, help="JSON path (default stdout)")
    sub.set_defaults(func=_cmd_mix_bound)

    for name, func in (("scaling-critical", _cmd_scaling_critical),
                       ("scaling-quasicritical", _cmd_scaling_quasicritical),
                       ("scaling-mixing", _cmd_scaling_mixing)):
        sub = subs.add_parser(name, help=f"{name.replace('-', ' ')} experiment")
        sub.add_argument("--config", default=None,
                         help="JSON file of ExperimentConfig overrides")
        sub.add_argument("--output-prefix", default=None,
                         help="write <prefix>.json and <prefix>.csv instead of stdout")
        sub.set_defaults(func=func)

    sub = subs.add_parser("discontinuous-probe",
                          help="two-of-three facilitation: jump scan and depth scaling")
    sub.add_argument("--config", default=None)
    sub.add_argument("--output-prefix", default=None)
    sub.add_argument("--scan-only", action="store_true",
                     help="skip the relaxation-time measurements")
    sub.set_defaults(func=_cmd_discontinuous_probe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"kcmtree: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
