"""Command-line entry point: gen, solve, compare, export-lp, version."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Optional, Sequence

from . import __version__
from .domain import TopologyError
from .experiment import (
    ARCHITECTURES,
    FORMATS,
    SCHEMA_VERSION,
    SOLVERS,
    ComparisonReport,
    Config,
    ConfigError,
    load_config,
    run_comparison,
    write_report,
)
from .fabric import TierPolicy
from .optimizer import InfeasibleInstanceError, export_lp

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_UNPROVEN = 4

# flag -> Config attribute
_OVERRIDES = {
    "seed": "seed",
    "workloads": "n_workloads",
    "arch": "architecture",
    "policy": "policy",
    "solver": "solver",
    "node_budget": "node_budget",
    "time_budget": "time_budget",
    "format": "format",
    "out": "out",
}


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration (defaults < --config < flags)")
    g.add_argument("--config", metavar="PATH", help="JSON config document with a schema_version field")
    g.add_argument("--seed", type=int, help="workload generator seed (default 1)")
    g.add_argument("--workloads", type=int, metavar="N", help="number of workloads (default 20)")
    g.add_argument("--arch", choices=[a.value for a in ARCHITECTURES] + ["all"], help="architecture (default all)")
    g.add_argument("--policy", choices=[p.value for p in TierPolicy], help="tier attribution policy (default top-tier)")
    g.add_argument("--solver", choices=SOLVERS, help="placement solver (default exact)")
    g.add_argument("--node-budget", type=int, metavar="N", help="branch-and-bound node limit")
    g.add_argument("--time-budget", type=float, metavar="SECONDS", help="branch-and-bound wall-clock limit")
    g.add_argument("--format", choices=FORMATS, help="report format (default json)")
    g.add_argument("--out", metavar="PATH", help="output file (json, lp) or directory (csv); default stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="composedc",
        description="Workload placement and power comparison for traditional, rack-scale and pod-scale datacentres.",
    )
    sub = parser.add_subparsers(dest="command", metavar="{gen,solve,compare,export-lp,version}")
    sub.required = True
    sub.add_parser("gen", parents=[common], help="emit the generated workload set as JSON")
    sub.add_parser("solve", parents=[common], help="solve one architecture and print its power report")
    sub.add_parser("compare", parents=[common], help="run the three-architecture comparison report")
    sub.add_parser("export-lp", parents=[common], help="write the placement model of one architecture as an LP file")
    sub.add_parser("version", help="print the tool version")
    return parser


def resolve_config(args: argparse.Namespace) -> Config:
    cfg = Config()
    if args.config:
        cfg = load_config(args.config, cfg)
    changes = {attr: getattr(args, flag) for flag, attr in _OVERRIDES.items() if getattr(args, flag) is not None}
    return replace(cfg, **changes)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise ConfigError(f"cannot write {out}: {e.strerror}") from None


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _single_arch(cfg: Config, command: str) -> Config:
    if cfg.architecture == "all":
        raise ConfigError(f"{command} needs one architecture; pass --arch")
    return cfg


def _status(report: ComparisonReport) -> int:
    results = report.results.values()
    if any(r.status == "infeasible" for r in results):
        return EXIT_INFEASIBLE
    if any(r.status == "unsolved" or (r.status == "feasible" and r.solve.solver == "exact") for r in results):
        return EXIT_UNPROVEN
    return EXIT_OK


def _write_report(report: ComparisonReport, cfg: Config) -> None:
    if cfg.format == "csv":
        if cfg.out is None:
            raise ConfigError("csv output needs --out DIRECTORY")
        try:
            write_report(report, "csv", cfg.out)
        except OSError as e:
            raise ConfigError(str(e)) from None
    elif cfg.out is None:
        write_report(report, "json", sys.stdout)
    else:
        try:
            write_report(report, "json", cfg.out)
        except OSError as e:
            raise ConfigError(str(e)) from None


def cmd_gen(cfg: Config) -> int:
    if cfg.format != "json":
        raise ConfigError("gen only writes json")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": cfg.seed,
        "n_workloads": cfg.n_workloads,
        "profile": cfg.profile.to_dict(),
        "workloads": [w.to_dict() for w in cfg.workloads()],
    }
    _emit(_dump(doc), cfg.out)
    return EXIT_OK


def cmd_solve(cfg: Config) -> int:
    report = run_comparison(_single_arch(cfg, "solve"))
    if cfg.format == "csv":
        _write_report(report, cfg)
    else:
        (arch, result), = report.results.items()
        doc = {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": "composedc", "version": report.version},
            "architecture": arch.value,
            **result.to_dict(),
        }
        _emit(_dump(doc), cfg.out)
    return _status(report)


def cmd_compare(cfg: Config) -> int:
    report = run_comparison(cfg)
    _write_report(report, cfg)
    return _status(report)


def cmd_export_lp(cfg: Config) -> int:
    cfg = _single_arch(cfg, "export-lp")
    _emit(export_lp(cfg.instance(cfg.architecture)), cfg.out)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "compare": cmd_compare, "export-lp": cmd_export_lp}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    if args.command == "version":
        print(f"composedc {__version__}")
        return EXIT_OK
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, TopologyError) as e:
        print(f"composedc: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleInstanceError as e:
        print(f"composedc: infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE


def main() -> None:
    sys.exit(run_cli())


__all__ = ["build_parser", "main", "resolve_config", "run_cli"]
