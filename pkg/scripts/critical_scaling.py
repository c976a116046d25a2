#!/usr/bin/env python3
"""Depth scaling of the relaxation time at the critical density.

Exact eigensolves cover the shallow depths, event-driven Monte Carlo the
rest; the report fits T_rel against depth and selects power law versus
exponential growth by AIC.  Exit code 2 flags a failed verdict for CI use.
"""
import argparse
import json
import pathlib

from kcmtree.analysis import default_critical_config, run_critical_scaling


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=pathlib.Path, default=None,
                    help="JSON file of ExperimentConfig overrides")
    ap.add_argument("--out", type=pathlib.Path,
                    default=pathlib.Path("results/critical_scaling.json"))
    args = ap.parse_args()

    overrides = json.loads(args.config.read_text()) if args.config else {}
    report = run_critical_scaling(default_critical_config(**overrides))

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(report.to_dict(), indent=2) + "\n")

    print(f"density p = {report.p}")
    for pt in report.points:
        print(f"  depth {pt.depth}: T_rel = {pt.value:10.4g} "
              f"+- {pt.stderr:8.2g}  [{pt.method}]")
    fit = report.fit
    print(f"fit: exponent {fit.exponent:.3f} +- {fit.stderr:.3f}, "
          f"log-log r^2 {fit.r_squared:.4f}, regime {report.regime} "
          f"(AIC margin {fit.model_comparison:+.1f})")
    for name, ok in report.checks.items():
        print(f"  {name}: {'ok' if ok else 'FAILED'}")
    print(f"verdict: {'PASS' if report.passed else 'FAIL'}  -> {args.out}")
    return 0 if report.passed else 2


if __name__ == "__main__":
    raise SystemExit(main())
