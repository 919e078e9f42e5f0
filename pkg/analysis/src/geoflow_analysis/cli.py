"""Batch entry point: load run directories, emit plots and a summary."""

from __future__ import annotations

import argparse
import math
import sys

from .bundle import BundleError, StudyBundle, plot_studies, study_summary
from .dispersion import oracle_value
from .octonion import main as octonion_main


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="geoflow-analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plot", help="plot one or more run directories")
    p.add_argument("directories", nargs="+")
    p.add_argument("--out", required=True)

    p = sub.add_parser("dispersion-oracle", help="closed-form wave frequency")
    p.add_argument("--theta", type=float, default=math.pi / 4)
    p.add_argument("--k-mode", type=int, default=2)

    p = sub.add_parser("octonion-table", help="regenerate the cross-product table")
    p.add_argument("--out", default=None)
    p.add_argument("--check-against", default=None)

    args = parser.parse_args(argv)
    if args.command == "plot":
        try:
            bundle = StudyBundle.load(*args.directories)
        except BundleError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        images = plot_studies(bundle, args.out)
        summary = study_summary(bundle, args.out)
        print(f"wrote {len(images)} plots and study_summary.json to {args.out}")
        for name, entry in summary.get("convergence", {}).items():
            print(f"  {name}: slope {entry['fitted_slope']:.2f} "
                  f"expected {entry['expected_order']:g}")
        return 0
    if args.command == "dispersion-oracle":
        print(f"{oracle_value(args.theta, args.k_mode):.12g}")
        return 0
    if args.command == "octonion-table":
        octonion_argv = []
        if args.out:
            octonion_argv += ["--out", args.out]
        if args.check_against:
            octonion_argv += ["--check-against", args.check_against]
        return octonion_main(octonion_argv)
    return 2


if __name__ == "__main__":
    sys.exit(main())
