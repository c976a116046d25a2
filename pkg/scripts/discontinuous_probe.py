#!/usr/bin/env python3
"""Probe of the two-of-three-children variant (k=3, j=2).

The survival recursion for this variant has a tangent bifurcation at
p = 8/9: the iterated limit jumps from 0 straight to 3/4.  The scan
documents the jump; the optional relaxation-time measurements at the
critical point are exploratory and carry no verdict.
"""
import argparse
import json
import pathlib

from kcmtree.analysis import default_probe_config, run_discontinuous_probe


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=pathlib.Path, default=None,
                    help="JSON file of ExperimentConfig overrides")
    ap.add_argument("--scan-only", action="store_true",
                    help="skip the relaxation-time measurements")
    ap.add_argument("--out", type=pathlib.Path,
                    default=pathlib.Path("results/discontinuous_probe.json"))
    args = ap.parse_args()

    overrides = json.loads(args.config.read_text()) if args.config else {}
    report = run_discontinuous_probe(default_probe_config(**overrides),
                                     include_dynamics=not args.scan_only)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(report.to_dict(), indent=2) + "\n")

    print(f"critical density p_c = {report.p_critical:.9f}")
    for row in report.survival_scan:
        print(f"  p = {row['p']:.6f}: survival limit ~ {row['survival_at_n']:.6f}")
    jump = report.jump
    print(f"jump: below -> {jump['below']:.2e}, at -> {jump['at']:.6f}, "
          f"above -> {jump['above']:.6f}")
    if report.points:
        print("exploratory relaxation times at p_c:")
        for pt in report.points:
            print(f"  depth {pt.depth}: T_rel = {pt.value:9.4g} "
                  f"+- {pt.stderr:8.2g}  [{pt.method}]")
        if report.fit is not None:
            print(f"  fit exponent {report.fit.exponent:.3f} "
                  f"(regime {report.regime}; exploratory, no verdict)")
    print(f"verdict on the jump: {'PASS' if report.passed else 'FAIL'}  "
          f"-> {args.out}")
    return 0 if report.passed else 2


if __name__ == "__main__":
    raise SystemExit(main())
