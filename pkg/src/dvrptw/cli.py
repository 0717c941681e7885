"""Command-line front end.

Three subcommands:

* ``solve``    one working day on one instance, prints the plan
* ``bench``    a batch of seeded runs, prints a CSV or a summary table
* ``compare``  static vs dynamic report CSVs: increases and rank-sum p

Exit codes: 0 success, 1 usage or input errors, 2 infeasible instance.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .acs_engine import AcsParams
from .bench import (aggregate, emit_csv, emit_table, load_instance,
                    parse_csv, rank_sum_test, run_batch)
from .construction import InfeasibleCustomerError
from .instance_io import FormatError
from .planner import PlannerConfig, run_working_day, serialize_events
from .routing_model import serialize_solution

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("instance", help="instance file")
    p.add_argument("--sidecar", help="disclosure-time sidecar file")
    p.add_argument("--t-wd", type=float, default=100.0,
                   help="working-day length in seconds (default 100)")
    p.add_argument("--n-ts", type=int, default=50,
                   help="time slices per day (default 50)")
    p.add_argument("--ants", type=int, default=10)
    p.add_argument("--q0", type=float, default=0.9)
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--cl", type=int, default=20,
                   help="candidate list size (default 20)")
    p.add_argument("--clock", choices=["wall", "virtual"], default="wall")
    p.add_argument("--virtual-iters-per-slice", type=int, default=200,
                   help="colony iterations per slice on the virtual clock")


def _config(args: argparse.Namespace, seed: int) -> PlannerConfig:
    params = AcsParams(n_ants=args.ants, q0=args.q0, rho=args.rho,
                       cl=args.cl)
    return PlannerConfig(
        t_wd=args.t_wd, n_ts=args.n_ts, clock=args.clock,
        virtual_iters_per_slice=args.virtual_iters_per_slice,
        params=params, seed=seed)


def _seed_list(args: argparse.Namespace) -> list[int]:
    if args.seeds:
        return [int(tok) for tok in args.seeds.split(",") if tok.strip()]
    return list(range(args.seed, args.seed + args.runs))


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(prog="dvrptw",
                     description="vehicle routing with time windows and "
                                 "en-route disclosure")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one working day")
    _add_solver_flags(p_solve)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--events", help="write the event log here")

    p_bench = sub.add_parser("bench", help="seeded batch of working days")
    _add_solver_flags(p_bench)
    p_bench.add_argument("--seed", type=int, default=0,
                         help="first seed (seeds run seed..seed+runs-1)")
    p_bench.add_argument("--runs", type=int, default=10)
    p_bench.add_argument("--seeds",
                         help="explicit comma-separated seed list")
    p_bench.add_argument("--out", choices=["csv", "table"], default="table")
    p_bench.add_argument("--csv", help="also write the CSV here")
    p_bench.add_argument("--events-dir", help="write per-run event logs here")

    p_cmp = sub.add_parser("compare",
                           help="static vs dynamic report CSVs")
    p_cmp.add_argument("static_csv")
    p_cmp.add_argument("dynamic_csv")
    p_cmp.add_argument("--out", choices=["csv", "table"], default="table")

    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_compare(args)
    except (FormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleCustomerError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2


def _cmd_solve(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance, args.sidecar)
    cfg = _config(args, args.seed)
    try:
        day = run_working_day(inst, cfg)
    except InfeasibleCustomerError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    if args.events:
        Path(args.events).write_text(serialize_events(day.events))
    sys.stdout.write(serialize_solution(inst, day.solution))
    print(f"feasible_solutions {day.feasible_count}")
    print(f"duration_s {day.duration_s:.3f}")
    if day.hard_infeasible:
        ids = ",".join(map(str, day.hard_infeasible))
        print(f"hard_infeasible {ids}", file=sys.stderr)
        return 2
    if not day.feasible:
        print("plan infeasible", file=sys.stderr)
        return 2
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance, args.sidecar)
    seeds = _seed_list(args)
    if not seeds:
        print("error: no seeds", file=sys.stderr)
        return 1
    cfg = _config(args, seeds[0])
    try:
        reports = run_batch(inst, seeds, cfg, event_dir=args.events_dir)
    except InfeasibleCustomerError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    csv_text = emit_csv(reports)
    if args.csv:
        Path(args.csv).write_text(csv_text)
    if args.out == "csv":
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(emit_table([aggregate(reports)]))
    if any(r.hard_infeasible for r in reports):
        print("hard-infeasible customers occurred; see event logs",
              file=sys.stderr)
        return 2
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    static = parse_csv(Path(args.static_csv).read_text())
    dynamic = parse_csv(Path(args.dynamic_csv).read_text())
    stat_row = aggregate(static)
    dyn_row = aggregate(dynamic, static_ref=static)
    if args.out == "csv":
        sys.stdout.write(emit_csv(static))
        sys.stdout.write(emit_csv(dynamic))
    else:
        sys.stdout.write(emit_table([stat_row, dyn_row]))
    p_nv = rank_sum_test([r.nv for r in static], [r.nv for r in dynamic])
    p_td = rank_sum_test([r.td_unscaled for r in static],
                         [r.td_unscaled for r in dynamic])
    print(f"rank_sum_p nv {p_nv:.6f}")
    print(f"rank_sum_p td {p_td:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
