#!/usr/bin/env python3
"""Exact mixing times against the depth-times-relaxation brackets.

On shallow trees the worst-start L1 and L2 mixing times are computed
exactly and compared with L * T_rel evaluated at half depth and full depth;
the product-chain threshold t* is checked against the measured T1.
"""
import argparse
import json
import pathlib

from kcmtree.analysis import default_mixing_config, run_mixing_scaling


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=pathlib.Path, default=None,
                    help="JSON file of ExperimentConfig overrides")
    ap.add_argument("--t2-depth-cap", type=int, default=3,
                    help="deepest level for the L2 mixing time")
    ap.add_argument("--out", type=pathlib.Path,
                    default=pathlib.Path("results/mixing_scaling.json"))
    args = ap.parse_args()

    overrides = json.loads(args.config.read_text()) if args.config else {}
    report = run_mixing_scaling(default_mixing_config(**overrides),
                                t2_depth_cap=args.t2_depth_cap)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(report.to_dict(), indent=2) + "\n")

    print(f"density p = {report.p}")
    for pt in report.points:
        print(f"  depth {pt.depth}: T1 = {pt.t1:9.4f}  T2 = {pt.t2:9.4f}  "
              f"bracket [{pt.lower_bracket:.3f}, {pt.upper_bracket:.3f}]  "
              f"T1/upper = {pt.upper_ratio:.3f}  [{pt.start_policy}]")
    print(f"upper-ratio spread = {report.ratio_spread:.3f}")
    print(f"product threshold t* = {report.t_star:.4f} "
          f"({report.t_star_copies} copies of the depth-"
          f"{report.t_star_reference_depth} chain)")
    for name, ok in report.checks.items():
        print(f"  {name}: {'ok' if ok else 'FAILED'}")
    print(f"verdict: {'PASS' if report.passed else 'FAIL'}  -> {args.out}")
    return 0 if report.passed else 2


if __name__ == "__main__":
    raise SystemExit(main())
