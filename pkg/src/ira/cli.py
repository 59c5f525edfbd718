"""Command-line front end: ``ira <command> <config.json> [options]``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ProblemConfig, parse_contract, parse_floats
from .foa import foa_vs_op
from .model import DomainError, EffortUtilityPair, SolverError, agent_expected_utility
from .oracle import agent_effort_cap, best_response, verify_implementation
from .relaxed import effort_cap, first_best
from .report import dumps_json, render_csv, render_table, to_jsonable
from .synthesis import synthesize_optimal_quota_bonus

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3

CURVE_SAMPLES = 201


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _threads() -> int:
    raw = os.environ.get("IRA_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"IRA_THREADS: expected a nonnegative integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"IRA_THREADS: expected a nonnegative integer, got {raw!r}")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="problem config (JSON)")
    common.add_argument("--format", choices=("table", "json", "csv"), default="table")
    common.add_argument("--out", help="also write the report to this file")
    common.add_argument("--seed", type=int, default=None,
                        help="recorded in the report; every command is deterministic")
    common.add_argument("--quiet", action="store_true", help="do not print the report")

    parser = _Parser(prog="ira", description="Optimal contracts by implementation relaxation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="relaxed optimum and an implementing quota-bonus contract")
    sub.add_parser("first-best", parents=[common], help="surplus-maximizing effort")
    p = sub.add_parser("best-response", parents=[common], help="agent's optimal effort under a contract")
    p.add_argument("--contract", required=True, help="e.g. quota-bonus:1,1.5")
    p = sub.add_parser("verify", parents=[common], help="check that a contract implements a pair")
    p.add_argument("--contract", required=True)
    p.add_argument("--pair", required=True, help="a,u")
    sub.add_parser("foa", parents=[common], help="compare with the first-order-relaxed problem")
    p = sub.add_parser("curve", parents=[common], help="agent utility sampled over effort")
    p.add_argument("--contract", required=True)
    p.add_argument("--range", required=True, help="lo,hi,n")
    return parser


def _curve(env, contract, lo, hi, n):
    a = np.linspace(lo, hi, n)
    return [[float(x), float(y)] for x, y in zip(a, agent_expected_utility(env, contract, a))]


def _tolerances(cfg) -> dict:
    return {"grid_n": cfg.grid_n, "tol_utility": cfg.tol_utility, "tol_root": cfg.tol_root,
            "tol_effort": cfg.tol_effort, "tol_derivative": cfg.tol_derivative,
            "effort_cap_override": cfg.effort_cap_override}


def run_command(args) -> tuple[int, dict, list | None]:
    """Execute a parsed command; returns (exit status, report, curve rows or None)."""
    problem = ProblemConfig.load(args.config)
    env, cfg = problem.to_environment(), problem.solver_config()
    report = {"command": args.command, "config": problem.to_dict(), "seed": args.seed,
              "threads": _threads(), "tolerances": _tolerances(cfg)}
    status, rows = EXIT_OK, None

    if args.command == "solve":
        outcome = synthesize_optimal_quota_bonus(env, cfg)
        report["outcome"] = outcome
        report["margins"] = {f"{r.condition}@q={r.quota:.6g}": r.worst_margin for r in outcome.reports}
        if outcome.contract is not None:
            hi = max(2.0 * outcome.pair.a, 1.0)
            report["curve"] = _curve(env, outcome.contract, 0.0, hi, CURVE_SAMPLES)
        if not outcome.certified:
            status = EXIT_SOLVER
    elif args.command == "first-best":
        fb = first_best(env, cfg)
        report["first_best"] = {"a": fb.a, "surplus": fb.surplus, "effort_cap": effort_cap(env, cfg)}
    elif args.command == "best-response":
        report["best_response"] = best_response(env, parse_contract(args.contract), cfg)
    elif args.command == "verify":
        contract = parse_contract(args.contract)
        a, u = parse_floats(args.pair, 2, "--pair")
        try:
            pair = EffortUtilityPair(a, u)
        except DomainError as exc:
            raise ConfigError(f"--pair: {exc}") from None
        ver = verify_implementation(env, contract, pair, cfg)
        report["verification"] = ver
        if not ver.ok:
            status = EXIT_VERIFY
    elif args.command == "foa":
        report["foa"] = foa_vs_op(env, cfg)
    elif args.command == "curve":
        contract = parse_contract(args.contract)
        lo, hi, n = parse_floats(args.range, 3, "--range")
        if not (0 <= lo < hi) or n != int(n) or n < 2:
            raise ConfigError(f"--range {args.range!r}: need 0 <= lo < hi and integer n >= 2")
        rows = _curve(env, contract, lo, hi, int(n))
        report["agent_effort_cap"] = agent_effort_cap(env, contract, cfg)
        report["curve"] = rows
    return status, report, rows


def render(report: dict, rows: list | None, fmt: str) -> str:
    if fmt == "json":
        return dumps_json(report)
    if fmt == "csv":
        if rows is not None:
            return render_csv(None, header=("a", "utility"), rows=rows)
        return render_csv(report)
    if "curve" in report:
        # samples are for plotting; the table lists them only for the curve command
        report = dict(report, curve=f"{len(report['curve'])} samples")
    if rows is not None:
        return render_table(report) + render_csv(None, header=("a", "utility"), rows=rows)
    return render_table(report)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status, report, rows = run_command(args)
    except (ConfigError, DomainError) as exc:
        print(f"ira: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"ira: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = render(to_jsonable(report), rows, args.format)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"ira: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_CONFIG
    if not args.quiet:
        sys.stdout.write(text)
    if status == EXIT_VERIFY:
        print("ira: verification failed", file=sys.stderr)
    elif status == EXIT_SOLVER:
        print("ira: no quota-bonus contract could be certified", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
