"""Command line entry point: ``lattice-pdr solve|oracle|bench``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .core import Heuristic, Holds, PdrError, ProblemInstance, Refuted, verdict_name
from .engine import Rule, Status, check_invariants, solve
from .io import Model, load_model
from .mdp import Mdp, mdp_heuristics, mdp_instance
from .oracle import mdp_max_reach_exact, ts_oracle
from .ts import ConflictMode, TransitionSystem, heuristic_simple, ts_instance

TS_HEURISTICS = ("simple-init", "simple-final")
MDP_HEURISTICS = ("hcob", "hco01", "mdp-simple-init")
HEURISTICS = TS_HEURISTICS + MDP_HEURISTICS
BENCH_HEADER = ["model", "heuristic", "verdict", "steps", "unfold", "candidate", "decide", "conflict", "wall_ms"]

EXIT_CODES = {"holds": 0, "refuted": 1, "unknown": 2}
EXIT_USAGE = 3


class UsageError(Exception):
    pass


def build(model: Model, heuristic: str) -> tuple[ProblemInstance, Heuristic]:
    if isinstance(model, TransitionSystem):
        if heuristic not in TS_HEURISTICS:
            raise UsageError(f"heuristic {heuristic!r} does not apply to a ts model")
        mode = ConflictMode.INITIAL if heuristic == "simple-init" else ConflictMode.FINAL
        return ts_instance(model), heuristic_simple(model, mode)
    if heuristic not in MDP_HEURISTICS:
        raise UsageError(f"heuristic {heuristic!r} does not apply to an mdp model")
    return mdp_instance(model), mdp_heuristics(model)[heuristic]


def _witness_text(instance: ProblemInstance, verdict) -> Optional[str]:
    if isinstance(verdict, Holds):
        return instance.format_pos(verdict.witness)
    if isinstance(verdict, Refuted):
        return ", ".join(instance.format_neg(y) for y in verdict.witness)
    return None


def cmd_solve(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    instance, heuristic = build(model, args.heuristic)
    keep = args.check_invariants
    verdict, trace = solve(instance, heuristic, budget=args.max_steps, record_states=keep)
    if args.trace:
        Path(args.trace).write_text(trace.format())
    counts = trace.rule_counts()
    witness = _witness_text(instance, verdict)
    if args.json:
        doc = {
            "verdict": verdict_name(verdict),
            "steps": len(trace),
            "rule_counts": {r.name.lower(): counts[r] for r in Rule},
            "witness": witness,
        }
        print(json.dumps(doc, sort_keys=True))
    else:
        name = verdict_name(verdict)
        if hasattr(verdict, "reason"):
            name += f" ({verdict.reason.value})"
        print(f"verdict = {name}")
        print(f"steps = {len(trace)}")
        if witness is not None:
            print(f"witness = {witness}")
    if keep:
        report = check_invariants(trace, instance)
        bad = report.violations()
        for step, inv in bad:
            print(f"invariant {inv} violated at state {step}", file=sys.stderr)
        if not args.json:
            checked = sum(1 for row in report.steps for st in row.values() if st is not Status.NOT_CHECKABLE)
            print(f"invariants: {checked} checks, {len(bad)} violations")
    return EXIT_CODES[verdict_name(verdict)]


def cmd_oracle(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    if isinstance(model, Mdp):
        res = mdp_max_reach_exact(model)
        verdict = "holds" if res.verdict else "refuted"
        print(f"max_prob = {res.max_prob}, verdict = {verdict}")
    else:
        tres = ts_oracle(model)
        verdict = "holds" if tres.safe else "refuted"
        print(f"reachable = {tres.reachable}, verdict = {verdict}")
    return EXIT_CODES[verdict]


def cmd_bench(args: argparse.Namespace) -> int:
    models = sorted(p for p in Path(args.models).iterdir() if p.suffix in (".ts", ".mdp"))
    heuristics = [h.strip() for h in args.heuristics.split(",") if h.strip()]
    for h in heuristics:
        if h not in HEURISTICS:
            raise UsageError(f"unknown heuristic {h!r}")
    loaded = [(p, load_model(p)) for p in models]
    # reject mismatched pairs before doing any work
    for p, m in loaded:
        for h in heuristics:
            build(m, h)
    with open(args.out, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(BENCH_HEADER)
        for p, m in loaded:
            for h in heuristics:
                instance, heuristic = build(m, h)
                t0 = time.perf_counter()
                verdict, trace = solve(instance, heuristic, budget=args.max_steps, record_states=False)
                wall = int((time.perf_counter() - t0) * 1000)
                c = trace.rule_counts()
                out.writerow([
                    str(p), h, verdict_name(verdict), len(trace),
                    c[Rule.UNFOLD], c[Rule.CANDIDATE], c[Rule.DECIDE], c[Rule.CONFLICT], wall,
                ])
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lattice-pdr", description="Lattice PDR solver for transition systems and MDPs.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="run the solver on one model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--heuristic", required=True, choices=HEURISTICS)
    sp.add_argument("--max-steps", type=int, default=100_000)
    sp.add_argument("--check-invariants", action="store_true")
    sp.add_argument("--trace")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_solve)

    op = sub.add_parser("oracle", help="compute the exact answer by enumeration")
    op.add_argument("--model", required=True)
    op.set_defaults(func=cmd_oracle)

    bp = sub.add_parser("bench", help="run every heuristic on every model in a directory")
    bp.add_argument("--models", required=True)
    bp.add_argument("--heuristics", required=True)
    bp.add_argument("--max-steps", type=int, default=100_000)
    bp.add_argument("--out", required=True)
    bp.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else EXIT_USAGE
    if getattr(args, "max_steps", 1) < 1:
        print("error: --max-steps must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, PdrError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
