"""Command-line interface.

    nlcavity <subcommand> --config <path> [--out <dir>] [--svg]

Exit codes: 0 success, 1 invariant violation, 2 config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import MODEL_KINDS, parse_config
from .errors import ConfigError, InvariantViolation, NumericalError
from .runner import run, run_steady
from .selftest import run_selftest
from .version import VERSION

_EXPECTED_KIND = {
    "simulate": MODEL_KINDS,
    "steady": MODEL_KINDS,
    "compare": ("compare",),
    "sweep": ("sweep",),
    "wigner": ("wigner",),
    "nongauss": ("nongauss",),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlcavity",
        description="Simulate driven nonlinear cavities and their qubit limits.",
    )
    parser.add_argument("--version", action="version", version=f"nlcavity {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "integrate one model scenario and write its trajectory CSV",
        "compare": "overlay a pre-limit model with the driven two-level limit",
        "sweep": "run a nonlinearity sweep with per-value trajectories and summary",
        "steady": "solve the steady state of a model scenario",
        "wigner": "evolve to a snapshot time and write the Wigner function grid",
        "nongauss": "trace the non-Gaussianity measure over time",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="scenario JSON path (or literal JSON)")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--svg", action="store_true", help="also write SVG line plots")
    sub.add_parser("selftest", help="run the numerical invariant battery")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "selftest":
        return 0 if run_selftest() else 1
    try:
        cfg = parse_config(args.config)
        expected = _EXPECTED_KIND[args.command]
        if cfg.kind not in expected:
            raise ConfigError(
                f"kind: {args.command} expects kind in {expected}, got {cfg.kind!r}"
            )
        if args.command == "steady":
            manifest = run_steady(cfg, args.out)
            r = manifest["results"]
            print(f"pop0 = {r['pop0']:.6g}")
            print(f"pop1 = {r['pop1']:.6g}")
            print(f"n_expect = {r['n_expect']:.6g}")
        else:
            manifest = run(cfg, args.out, make_svg=args.svg)
            print(f"status: {manifest['status']}")
            for name in sorted(manifest["outputs"]):
                print(f"wrote {name}")
        return 0 if manifest["status"] == "ok" else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
