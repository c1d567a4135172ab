"""Command line entry point: ``critga run|sweep|compare|threshold``.

Exit codes: 0 success, 1 configuration error, 2 runtime or convergence
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from ..errors import ConfigurationError, CritGAError, UnsupportedQueryError
from ..quasispecies import (
    approximate_threshold,
    detect_error_threshold,
    exact_threshold,
    threshold_scan,
)
from .config import load_config
from .io import emit_run, emit_table, make_header
from .runner import aggregate, compare, run, sweep

log = logging.getLogger("critga")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default: config value or csv)")


def _experiment(p: argparse.ArgumentParser) -> None:
    _common(p)
    p.add_argument("--seed", type=_u64, help="master seed, overrides the config")
    p.add_argument("--replicas", type=int, help="replica count, overrides the config")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="critga", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run seeded replicas and write per-generation records")
    p.add_argument("--config", required=True)
    _experiment(p)

    p = sub.add_parser("sweep", help="aggregate replicas across values of one parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True, help="p_m, population_size (m), sigma or n")
    p.add_argument("--values", required=True, help="comma-separated axis values")
    _experiment(p)

    p = sub.add_parser("compare", help="aggregate several configs over identical seeds")
    p.add_argument("--config", required=True, action="append", help="repeat for each config")
    _experiment(p)

    p = sub.add_parser("threshold", help="locate the error threshold of the sharp-peak quasispecies")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-6, help="absolute tolerance on p (default 1e-6)")
    p.add_argument("--crossing", type=float, help="enrichment crossing value (default 2**(n/2))")
    p.add_argument("--points", type=int, default=50, help="scan grid size over (0, 0.5]")
    _common(p)
    return parser


def _load(args, path):
    cfg = load_config(path)
    return cfg.with_overrides(seed=args.seed, replicas=args.replicas, format=args.format)


def _parse_values(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(int(tok))
        except ValueError:
            try:
                out.append(float(tok))
            except ValueError:
                raise ConfigurationError(f"not a number: {tok!r}", "values") from None
    return out


def _finish(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_run(args) -> None:
    cfg = _load(args, args.config)
    results = run(cfg, workers=args.jobs)
    _finish(emit_run(cfg, results, cfg.format), args.out)
    row = aggregate(cfg.controller.label, [r.summary for r in results])
    log.info("hit rate %.3f, median first hit %g, mean evaluations %.1f",
             row.hit_rate, row.median_first_hit, row.mean_evaluations)


def cmd_sweep(args) -> None:
    cfg = _load(args, args.config)
    rows = sweep(cfg, args.axis, _parse_values(args.values), workers=args.jobs)
    _finish(emit_table(rows, cfg.format, header=make_header(cfg, axis=args.axis)), args.out)


def cmd_compare(args) -> None:
    cfgs = [_load(args, path) for path in args.config]
    rows = compare(cfgs, workers=args.jobs)
    header = make_header(configs=[c.to_dict() for c in cfgs])
    _finish(emit_table(rows, cfgs[0].format, header=header), args.out)


def cmd_threshold(args) -> None:
    if args.points < 1:
        raise ConfigurationError(f"must be >= 1, got {args.points}", "points")
    p_c = detect_error_threshold(args.n, args.sigma, args.tol, args.crossing)
    ps = np.linspace(0.5 / args.points, 0.5, args.points)
    header = make_header(
        n=args.n,
        sigma=args.sigma,
        tol=args.tol,
        crossing=args.crossing,
        detected_threshold=p_c,
        exact_threshold=exact_threshold(args.n, args.sigma),
        approximate_threshold=approximate_threshold(args.n, args.sigma),
    )
    _finish(emit_table(threshold_scan(args.n, args.sigma, ps), args.format or "csv", header=header), args.out)
    log.info("detected threshold p_c = %.6g", p_c)


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare, "threshold": cmd_threshold}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except (ConfigurationError, UnsupportedQueryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CritGAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK
