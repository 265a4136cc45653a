"""Command line entry point.

    uavsec sweep   --scenario s.toml --sweep w.toml --out results/
    uavsec compare --scenario s.toml --out results/

Exit status: 0 on success, 2 on an invalid scenario/sweep/flag, 1 when the
comparison report flags a disagreement.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_scenario, load_sweep, scenario_from_dict
from .experiments import compare_report, run_sweep
from .montecarlo import SimConfig
from .specfun import QuadratureError

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", type=Path, help="scenario TOML file (defaults if omitted)")
    p.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo trials")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--exact-product", action="store_true",
                   help="use the per-UAV product instead of the homogeneous power form")
    p.add_argument("--workers", type=int, default=1, help="threads for sweep points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavsec", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"uavsec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sw = sub.add_parser("sweep", help="run a parameter sweep and write a CSV")
    _common(sw)
    sw.add_argument("--sweep", type=Path, required=True, help="sweep TOML file")
    cmp_ = sub.add_parser("compare", help="closed forms vs Monte Carlo for one scenario")
    _common(cmp_)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scn = load_scenario(args.scenario) if args.scenario else scenario_from_dict({})
        sim = SimConfig(samples=args.samples, seed=args.seed)
        if args.command == "sweep":
            sweep = load_sweep(args.sweep)
            out = args.out / f"{args.sweep.stem}.csv"
            man = run_sweep(scn, sweep, sim, out, exact_product=args.exact_product,
                            workers=args.workers)
            print(f"wrote {out} (manifest {man.digest[:12]})")
            return EXIT_OK
        res = compare_report(scn, sim, args.out, exact_product=args.exact_product)
        sys.stdout.write(res.text)
        return EXIT_OK if res.ok else EXIT_MISMATCH
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: invalid setting: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QuadratureError as exc:
        print(f"error: quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
