"""Command line entry points ``spectra`` and ``lsd-density``.

Exit codes: 0 success, 2 configuration error, 3 numerical-consistency
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigError, NumericalConsistencyError
from ..theory import MarchenkoPasturLaw, SpectralLaw
from .config import ExperimentConfig, load_config
from .io import write_csv
from .runners import RUNNERS, density_grid

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("autocorr_spectra")

COMMANDS = {
    "esd": "esd",
    "lambda-max": "lambda_max",
    "compare-mp": "compare_mp",
    "factor-demo": "factor_demo",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 already; keep the code explicit
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_density_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--y", type=float, required=True, help="aspect ratio p/n")
    p.add_argument("--grid", type=int, default=400, help="number of grid points (default 400)")
    p.add_argument("--law", choices=("lsd", "mp"), default="lsd",
                   help="lag-tau limiting law (lsd) or Marchenko-Pastur (mp)")
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spectra", description="Spectra of lag-tau sample auto-correlation matrices.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--n", type=int, help="sample size")
        p.add_argument("--y", type=_float_list, help="comma-separated aspect ratios")
        p.add_argument("--p", dest="p_values", type=_int_list, help="comma-separated dimensions (lambda-max)")
        p.add_argument("--tau", type=int, help="lag")
        p.add_argument("--reps", type=int, help="replications")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--dist", help="normal | rademacher | uniform | student_t:<df>")
        p.add_argument("--out", help="output directory")
        p.add_argument("--bins", type=int, help="histogram bins")
        p.add_argument("--centered", action=argparse.BooleanOptionalAction, default=None,
                       help="mean-centered (circular) or non-centered matrices")
        p.add_argument("--workers", type=int, help="parallel replication workers")
        if name == "factor-demo":
            p.add_argument("--k", type=int, help="number of factors")
            p.add_argument("--strength", type=float, help="loading strength")
            p.add_argument("--margin", type=float, help="threshold margin above sqrt(b)")
    _add_density_args(sub.add_parser("density", help="tabulate a limiting density"))
    return parser


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    experiment = COMMANDS[args.command]
    if cfg.experiment not in (experiment, "custom") and args.config:
        raise ConfigError(f"{args.config} configures {cfg.experiment!r}, not {experiment!r}")
    overrides = {
        "n": args.n,
        "y_values": tuple(args.y) if args.y else None,
        "p_values": tuple(args.p_values) if args.p_values else None,
        "tau": args.tau,
        "replications": args.reps,
        "master_seed": args.seed,
        "distribution": args.dist,
        "output_dir": args.out,
        "bins": args.bins,
        "centered": args.centered,
        "workers": args.workers,
    }
    cfg = replace(cfg, experiment=experiment, **{k: v for k, v in overrides.items() if v is not None})
    if args.command == "factor-demo":
        fac = {"k": args.k, "loading_strength": args.strength, "margin": args.margin}
        cfg = replace(cfg, factor=replace(cfg.factor, **{k: v for k, v in fac.items() if v is not None}))
    return cfg.validate()


def write_density_table(y: float, grid: int, law: str, out: str) -> None:
    if grid < 2:
        raise ConfigError("grid must be >= 2")
    if not y > 0:
        raise ConfigError("y must be positive")
    obj = SpectralLaw.from_ratio(y) if law == "lsd" else MarchenkoPasturLaw.from_ratio(y)
    u, f = density_grid(obj, grid)
    rows = zip(u, f, np.asarray(obj.cdf(u)))
    if out == "-":
        sys.stdout.write("u,density,cdf\n")
        for a, b, c in rows:
            sys.stdout.write(f"{a:.17g},{b:.17g},{c:.17g}\n")
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        write_csv(Path(out), ["u", "density", "cdf"], rows)


def _report(command: str, result) -> None:
    print(f"{command}: wrote {result.output_dir}")
    for s in result.summaries:
        fields = [f"y={s['y']:g}", f"p={s['p']}", f"n={s['n']}"]
        for key in ("ks_pooled", "ks_r0_mp_pooled", "ks_rstar_mp_pooled", "median"):
            if key in s:
                fields.append(f"{key}={s[key]:.4f}")
        if "outlier_counts" in s:
            fields.append(f"outliers={s['outlier_counts']}")
        print("  " + " ".join(fields))


def _run(args: argparse.Namespace) -> int:
    if args.command == "density":
        write_density_table(args.y, args.grid, args.law, args.out)
        return EXIT_OK
    cfg = _resolve(args)
    result = RUNNERS[cfg.experiment](cfg)
    _report(args.command, result)
    return EXIT_OK


def _guarded(fn, args) -> int:
    try:
        return fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalConsistencyError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return _guarded(_run, args)


def density_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _Parser(prog="lsd-density", description="Tabulate the limiting density of R*_tau or the MP law.")
    _add_density_args(parser)
    args = parser.parse_args(argv)
    args.command = "density"
    return _guarded(_run, args)


if __name__ == "__main__":
    sys.exit(main())
