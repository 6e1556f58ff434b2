"""Run every figure suite and write its CSV files under an output directory.

Usage: python3 scripts/reproduce_figures.py [--out-dir out] [figure ...]
"""

import argparse
import sys
import time

from vibroimpact.figures import FIGURES, run_figure_suite


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("figures", nargs="*", metavar="figure", help="figure ids (default: all)")
    parser.add_argument("--out-dir", default="out")
    args = parser.parse_args()
    unknown = set(args.figures) - set(FIGURES)
    if unknown:
        parser.error(f"unknown figure ids {sorted(unknown)}; choose from {', '.join(FIGURES)}")
    status = 0
    for fid in args.figures or list(FIGURES):
        t0 = time.perf_counter()
        result = run_figure_suite(fid, args.out_dir)
        print(f"{fid}: {'ok' if result.ok else 'partial failure'} in {time.perf_counter() - t0:.1f} s")
        status |= 0 if result.ok else 4
    return status


if __name__ == "__main__":
    sys.exit(main())
