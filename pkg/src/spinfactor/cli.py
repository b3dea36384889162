"""Command-line surface.

Verbs: validate, factorize, lr, constants, report. Exit codes: 0 when every
checked inequality is satisfied, 1 when a violation was found, 2 for usage
or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import geometry
from .config import ConfigError, load_config
from .harness import emit, load_report, run_factorization_sweep, run_lr_sweep

DEFAULT_FORMATS = "csv,json,svg"


def _parse_formats(text: str) -> list[str]:
    return [f.strip() for f in text.split(",") if f.strip()]


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    shells = geometry.shell_profile(cfg.lattice, cfg.cut)
    summary = {
        "lattice_vertices": cfg.lattice.vertex_count,
        "lattice_edges": len(cfg.lattice.edges),
        "hilbert_dimension": cfg.family.dim_of(cfg.lattice.vertices),
        "terms": len(cfg.family.terms),
        "cut": sorted(cfg.cut),
        "shell_sizes": list(shells.sizes),
        "sweep_R": list(cfg.sweep_radii),
        "sweep_t_minus_s": list(cfg.sweep_dts),
        "sides": list(cfg.sides),
        "constants": cfg.constants.as_dict(),
        "coupling_norm": cfg.velocity.coupling_norm,
        "velocity": cfg.velocity.velocity,
    }
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_constants(args) -> int:
    cfg = load_config(args.config)
    block = cfg.constants.as_dict()
    block["coupling_norm"] = cfg.velocity.coupling_norm
    block["velocity"] = cfg.velocity.velocity
    json.dump(block, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_factorize(args) -> int:
    cfg = load_config(args.config)
    report = run_factorization_sweep(cfg)
    emit(report, _parse_formats(args.format), args.output or cfg.output_dir)
    return 0 if report.all_satisfied else 1


def _cmd_lr(args) -> int:
    cfg = load_config(args.config)
    report = run_lr_sweep(cfg)
    emit(report, _parse_formats(args.format), args.output or cfg.output_dir)
    return 0 if report.all_satisfied else 1


def _cmd_report(args) -> int:
    directory = Path(args.directory)
    stored = [p for p in (directory / "factorization.json",
                          directory / "lieb_robinson.json") if p.exists()]
    if not stored:
        raise ConfigError(f"{directory}: no stored report "
                          "(factorization.json or lieb_robinson.json) found")
    ok = True
    for path in stored:
        report = load_report(path)
        emit(report, _parse_formats(args.format), directory)
        ok = ok and report.all_satisfied
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinfactor",
        description="Dense verification of surface-corrected factorization and "
                    "propagation bounds for finite spin systems.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="parse and validate a config, print a summary")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("constants", help="print the decay constants and velocity block")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_constants)

    p = sub.add_parser("factorize", help="run the factorization sweep")
    p.add_argument("config")
    p.add_argument("--format", default=DEFAULT_FORMATS)
    p.add_argument("--output", default=None, help="override the config output_dir")
    p.set_defaults(fn=_cmd_factorize)

    p = sub.add_parser("lr", help="run the propagation-bound sweep")
    p.add_argument("config")
    p.add_argument("--format", default=DEFAULT_FORMATS)
    p.add_argument("--output", default=None)
    p.set_defaults(fn=_cmd_lr)

    p = sub.add_parser("report", help="re-emit a stored report in other formats")
    p.add_argument("directory")
    p.add_argument("--format", default=DEFAULT_FORMATS)
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
