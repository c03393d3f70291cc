"""``verify <suite>``: run a verification suite and write a JSON report."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from .errors import ConfigError
from .report import emit_report
from .suites import SUITES, SuiteConfig, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="verify", description="Run numerical verification suites.")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--n", type=int, help="sphere parameter, fibers S^{4n+3}")
    p.add_argument("--m", type=int, help="largest quaternionic dimension")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-theta", type=int, dest="gridTheta")
    p.add_argument("--grid-phi", type=int, dest="gridPhi")
    p.add_argument("--rk4-step", type=float, dest="rk4Step")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--report", metavar="PATH", help="write the JSON report here")
    p.add_argument("--config", metavar="PATH", help="JSON file with SuiteConfig fields")
    p.add_argument("--timings", action="store_true", help="include wall times in the report")
    p.add_argument("--quiet", action="store_true")
    return p


def _parse_tolerances(items) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"tolerance {name!r} is not a number: {value!r}") from None
    return out


def load_config(args) -> SuiteConfig:
    base: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(SuiteConfig)}
        unknown = set(base) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base["suite"] = args.suite
    for name in ("n", "m", "samples", "seed", "gridTheta", "gridPhi", "rk4Step"):
        val = getattr(args, name)
        if val is not None:
            base[name] = val
    tols = dict(base.get("tolerances", {}))
    tols.update(_parse_tolerances(args.tol))
    base["tolerances"] = tols
    return SuiteConfig(**base).validate()


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    def progress(c):
        if not args.quiet:
            res = "error" if c.max_residual is None else f"{c.max_residual:.3e}"
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<52} {res:>10}  tol {c.tolerance:.1e}"
                  + (f"  ({c.error})" if c.error else ""))

    report = run_suite(cfg, progress)
    if args.report:
        try:
            emit_report(report, args.report, timings=args.timings)
        except OSError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_CONFIG
    if not args.quiet:
        print(f"overall: {'PASS' if report.overall else 'FAIL'} ({len(report.checks)} checks)")
    return EXIT_PASS if report.overall else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
