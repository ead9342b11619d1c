"""Command-line entry point: ``cogaoi analyze|simulate|validate|sweep``.

Exit codes: 0 success, 1 validation failure, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .aoi import PolicyKind
from .analysis import analyze, format_value
from .config import Scenario, ScenarioError, load_scenario
from .sim.runner import ESTIMATORS, simulate_scenario
from .sweep import SweepSpec, parse_axis, run_sweep, sweep_csv
from .validate import validate

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", type=Path, help="YAML scenario file (defaults apply when omitted)")
    p.add_argument("--out", type=Path, help="write the report to this file instead of stdout")
    p.add_argument("--seed", type=int, help="override sim.seed")
    p.add_argument("--slots", type=int, help="override sim.slots")
    p.add_argument("--policy", choices=["fcfs", "qr", "gw", "all"], help="override traffic.policy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cogaoi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cogaoi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="closed-form pipeline with formula labels")
    _common(p)
    p = sub.add_parser("simulate", help="Monte Carlo estimators with 95%% half-widths")
    _common(p)
    p.add_argument("--trace", action="store_true",
                   help="also write a per-slot trace CSV per policy (trace_<policy>.csv beside --out)")
    p = sub.add_parser("validate", help="analytic vs simulated table; exit 1 on any failed row")
    _common(p)
    p = sub.add_parser("sweep", help="grid sweep to CSV")
    _common(p)
    p.add_argument("--axis1", required=True, help="name=start:stop:count or name=v1,v2,...")
    p.add_argument("--axis2", help="optional second axis, same syntax")
    p.add_argument("--mode", choices=["analytic", "simulate", "both"], default="analytic")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def _scenario(args) -> Scenario:
    sc = load_scenario(args.scenario) if args.scenario else Scenario()
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.slots is not None:
        over["slots"] = args.slots
    if args.policy is not None:
        over["policy"] = args.policy
    return sc.with_overrides(**over) if over else sc


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_analyze(sc: Scenario, args) -> int:
    rep = analyze(sc.network, sc.traffic)
    lines = [f"{name}={format_value(value)}  # {formula}" for name, value, formula in rep.items()]
    if not rep.fcfs_stable and PolicyKind.FCFS in rep.aoi:
        print("warning: FCFS queue is unstable (lambda >= mu_p)", file=sys.stderr)
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(sc: Scenario, args) -> int:
    lines = []
    for policy in sc.traffic.policies:
        m = simulate_scenario(sc, policy, trace=args.trace)
        key = policy.value
        lines.append(f"{key}.slots={m.slots_run}")
        lines.append(f"{key}.replications={m.replications}")
        lines.append(f"{key}.n_nodes={','.join(str(n) for n in m.n_nodes)}")
        lines.append(f"{key}.diverged={format_value(m.diverged)}")
        for name in ESTIMATORS:
            lines.append(f"{key}.{name}={format_value(m.value(name))}")
            lines.append(f"{key}.{name}.ci95={format_value(m.ci_halfwidth(name))}")
        for name in ("arrivals", "delivered", "dropped", "in_system"):
            lines.append(f"{key}.{name}={getattr(m, name)}")
        if m.diverged:
            print(f"warning: {key} queue diverged (arrival rate >= empirical mu_p)", file=sys.stderr)
        if args.trace:
            folder = args.out.parent if args.out is not None else Path(".")
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["slot", "queue_len", "age", "active_count", "primary_success"])
            w.writerows(m.trace.tolist())
            (folder / f"trace_{key}.csv").write_text(buf.getvalue())
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_validate(sc: Scenario, args) -> int:
    report = validate(sc)
    if args.out is None:
        sys.stdout.write(report.to_csv())
    else:
        args.out.write_text(report.to_csv())
        print(report.format_table())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_sweep(sc: Scenario, args) -> int:
    if args.jobs < 1:
        raise ScenarioError("--jobs must be >= 1")
    policies = tuple(sc.traffic.policies)
    grid = SweepSpec(parse_axis(args.axis1), parse_axis(args.axis2) if args.axis2 else None,
                     policies, args.mode)
    rows = run_sweep(sc, grid, jobs=args.jobs)
    _emit(sweep_csv(sc, grid, rows), args.out)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate,
            "validate": cmd_validate, "sweep": cmd_sweep}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = _scenario(args)
        return COMMANDS[args.command](sc, args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
