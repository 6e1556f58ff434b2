"""``vibroimpact`` command line: run scenarios and figure suites, validate configs.

Exit codes: 0 success, 1 reproducibility check mismatch, 2 configuration
error, 3 numerical abort, 4 partial figure-suite failure.
"""

from __future__ import annotations

import argparse
import filecmp
import sys
import tempfile
from pathlib import Path

from .figures import FIGURES, run_figure_suite
from .integrators import IntegrationError
from .scenarios import (METHODS, ConfigError, canned_names, defaults_reference, parse_config,
                        run_scenario)

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 1, 2, 3, 4


def _compare_csvs(a: Path, b: Path) -> list[str]:
    """Relative paths of CSV files that differ (or are missing) between two output trees."""
    names = sorted({p.relative_to(a) for p in a.rglob("*.csv")} | {p.relative_to(b) for p in b.rglob("*.csv")})
    return [str(n) for n in names
            if not ((a / n).exists() and (b / n).exists() and filecmp.cmp(a / n, b / n, shallow=False))]


def _seed_check(produce, out_dir: Path) -> int:
    with tempfile.TemporaryDirectory() as tmp:
        produce(Path(tmp))
        diff = _compare_csvs(out_dir, Path(tmp))
    if diff:
        print("seed-check: outputs differ between identical runs: " + ", ".join(diff), file=sys.stderr)
        return EXIT_MISMATCH
    print("seed-check: rerun produced byte-identical CSV files")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    if args.dt is not None or args.method is not None:
        cfg = cfg.with_overrides(dt=args.dt, method=args.method)
    out = Path(args.out_dir)
    res = run_scenario(cfg, out)
    print(f"{cfg.name}: {len(res.trajectory)} samples, {len(res.impacts)} impacts, "
          f"min_gap={res.min_gap:.3e}, {res.wall_time:.2f} s -> {out / cfg.name}")
    if args.seed_check:
        return _seed_check(lambda d: run_scenario(cfg, d), out)
    return EXIT_OK


def cmd_figure(args) -> int:
    ids = list(FIGURES) if args.id == "all" else [args.id]
    out = Path(args.out_dir)
    status = EXIT_OK
    for fid in ids:
        result = run_figure_suite(fid, out)
        for label, msg in result.failures:
            print(f"{fid}: run {label} {msg}", file=sys.stderr)
        if not result.ok:
            status = EXIT_PARTIAL
    if args.seed_check and status == EXIT_OK:
        def produce(d):
            for fid in ids:
                run_figure_suite(fid, d, log=lambda msg: None)
        return _seed_check(produce, out)
    return status


def cmd_validate(args) -> int:
    cfg = parse_config(args.config)
    print(f"{cfg.source}: OK")
    print(cfg.echo())
    return EXIT_OK


def cmd_defaults(args) -> int:
    text = defaults_reference()
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_list(args) -> int:
    print("canned scenarios:")
    for name in canned_names():
        print(f"  {name}")
    print("figure suites: " + ", ".join(FIGURES) + ", all")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vibroimpact", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario (a config path or a canned scenario name)")
    r.add_argument("config")
    r.add_argument("--out-dir", default="out")
    r.add_argument("--dt", type=float, help="override integrator.dt")
    r.add_argument("--method", choices=METHODS, help="override scenario.method")
    r.add_argument("--seed-check", action="store_true", help="rerun and require byte-identical CSVs")
    r.set_defaults(func=cmd_run)

    f = sub.add_parser("figure", help="run every simulation behind one figure")
    f.add_argument("id", choices=[*FIGURES, "all"])
    f.add_argument("--out-dir", default="out")
    f.add_argument("--seed-check", action="store_true", help="rerun and require byte-identical CSVs")
    f.set_defaults(func=cmd_figure)

    v = sub.add_parser("validate", help="check a config and print every effective parameter")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("defaults", help="print the reference of all config keys and defaults")
    d.add_argument("-o", "--output", help="write to this file instead of stdout")
    d.set_defaults(func=cmd_defaults)

    ls = sub.add_parser("list", help="list canned scenarios and figure suites")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
