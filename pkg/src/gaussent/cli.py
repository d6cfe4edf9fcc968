"""Command-line front end.

Examples::

    gaussent kappa-scan -N 25,100,500 --kappa log:1e-4:1e2:25 --alpha 0,1
    gaussent size-scan  -N 16,32,64,128,256 --kappa 1e-4 --fit
    gaussent sigma-scan -N 100 --kappa 1e-4,1e-2,1,1e2 --fit --format json
    gaussent spectrum   -N 100 --kappa 1e-3 --alpha 1 --top-k 20
    gaussent evolve     -N 8 --kappa 1 --quench-kappa 0.5 --t-final 10 --region-len 4
    gaussent fit        --input sigma.csv --model log-sin
    gaussent kappa-scan --config configs/fig2.cfg --out fig2.csv

Exit codes: 0 success, 2 validation error, 3 numerical error, 4 bad request.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from .cft import FitError
from .errors import DomainError, NumericalError, ScanSpecError, ValidationError
from .scans import KINDS, ScanSpec, render, run_scan

log = logging.getLogger("gaussent")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_SPEC = 0, 2, 3, 4
BOOL_KEYS = {"fit", "trim", "strict_validation"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ScanSpecError(message)


def parse_float_grid(text: str) -> tuple[float, ...]:
    """``1e-3``, ``0.1,1,10``, ``log:1e-4:1e2:25`` (inclusive) or ``lin:0:1:11``."""
    text = str(text).strip()
    try:
        if text.startswith(("log:", "lin:")):
            kind, lo, hi, count = text.split(":")
            lo, hi, count = float(lo), float(hi), int(count)
            if count < 1 or (kind == "log" and (lo <= 0 or hi <= 0)):
                raise ValueError
            if kind == "log":
                grid = np.logspace(np.log10(lo), np.log10(hi), count)
                grid[0], grid[-1] = lo, hi
            else:
                grid = np.linspace(lo, hi, count)
            return tuple(float(v) for v in grid)
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ScanSpecError(f"cannot parse grid {text!r}") from exc


def parse_int_grid(text: str) -> tuple[int, ...]:
    """``100``, ``16,32,64``, ``range:1:99`` (inclusive, optional step) or ``log:16:256:5``."""
    text = str(text).strip()
    try:
        if text.startswith("range:"):
            parts = [int(p) for p in text.split(":")[1:]]
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            return tuple(range(lo, hi + 1, step))
        if text.startswith("log:"):
            values = (int(round(v)) for v in parse_float_grid(text))
            return tuple(dict.fromkeys(values))
        return tuple(int(v) for v in text.split(",") if v.strip())
    except (ValueError, IndexError) as exc:
        raise ScanSpecError(f"cannot parse integer grid {text!r}") from exc


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment.  Keys mirror the long flags."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScanSpecError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("-N", "--sites", type=parse_int_grid, default=())
    p.add_argument("--kappa", type=parse_float_grid, default=())
    p.add_argument("--alpha", type=parse_int_grid, default=(0,))
    p.add_argument("--region-start", type=int, default=0)
    p.add_argument("--region-len", type=parse_int_grid, default=())
    p.add_argument("--sigma", type=float, default=0.5, help="region fraction for half-size scans")
    p.add_argument("--measure", default="", help="comma list of entropy, e2, eM:<M>")
    p.add_argument("--length", type=float, default=1.0,
                   help="total chain length Lambda; kappa is in units of 1/Lambda")
    p.add_argument("--lattice-const", type=float, default=None,
                   help="fix the lattice constant instead of the total length")
    p.add_argument("--log-base", choices=("2", "e"), default="2")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--precision", type=int, default=12, help="significant digits")
    p.add_argument("--dps", type=int, default=None,
                   help="compute region spectra with this many decimal digits (slow, exact tails)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--max-evals", type=int, default=10**6)
    p.add_argument("--strict-validation", action="store_true")
    p.add_argument("--fit", action="store_true", help="append conformal fits")
    p.add_argument("--trim", action="store_true", help="drop the two edge points from log-sin fits")
    p.add_argument("--top-k", type=int, default=0, help="largest eigenvalues to list (spectrum)")
    p.add_argument("--term-floor", type=float, default=1e-10,
                   help="entropy terms at or below this count as zero (spectrum)")
    p.add_argument("--t-final", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--sample-every", type=int, default=1)
    p.add_argument("--quench-kappa", type=float, default=None)
    p.add_argument("--theta", default=None, help="initial state as a kernel-parameter JSON file")
    p.add_argument("--omega", default=None, help="JSON file with 'omega' matrix and optional 'force'")
    p.add_argument("--input", default=None, help="CSV to fit (fit command)")
    p.add_argument("--model", choices=("log-sin", "size"), default="log-sin")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gaussent", description="Gaussian-state entanglement of harmonic chains")
    parser.add_argument("--version", action="version", version=f"gaussent {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for kind in KINDS:
        _common(sub.add_parser(kind))
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    aliases = {"theta_file": "theta", "omega_file": "omega", "input_file": "input"}
    defaults = {}
    for key, value in cfg.items():
        key = aliases.get(key, key)
        if key not in known or key in ("config", "help"):
            raise ScanSpecError(f"unknown config key {key!r}")
        if key in BOOL_KEYS:
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = value
    subparser.set_defaults(**defaults)
    # string defaults go through each action's type converter on re-parse
    return parser.parse_args(argv)


def spec_from_args(args: argparse.Namespace) -> ScanSpec:
    measures = tuple(m for m in str(args.measure).split(",") if m.strip())
    return ScanSpec(
        kind=args.command,
        sites=tuple(args.sites),
        kappas=tuple(args.kappa),
        alphas=tuple(args.alpha),
        region_lengths=tuple(args.region_len),
        region_start=args.region_start,
        sigma=args.sigma,
        measures=measures,
        length=args.length,
        lattice_const=args.lattice_const,
        log_base=args.log_base,
        fit=bool(args.fit),
        trim=bool(args.trim),
        top_k=args.top_k,
        term_floor=args.term_floor,
        t_final=args.t_final,
        dt=args.dt,
        sample_every=args.sample_every,
        quench_kappa=args.quench_kappa,
        theta_file=args.theta,
        omega_file=args.omega,
        input_file=args.input,
        fit_model=args.model,
        threads=args.threads,
        strict=bool(args.strict_validation),
        precision=args.precision,
        dps=args.dps,
        max_evals=args.max_evals,
        output=args.out,
        fmt=args.format,
    )


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config(build_parser(), argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        spec = spec_from_args(args)
        result = run_scan(spec)
        text = render(result, spec.fmt, spec.precision)
        if spec.output:
            with open(spec.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        log.info("wall time %.3f s", result.wall_time)
        return EXIT_OK
    except ScanSpecError as exc:
        print(f"gaussent: error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (ValidationError, DomainError) as exc:
        print(f"gaussent: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FitError) as exc:
        print(f"gaussent: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"gaussent: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
