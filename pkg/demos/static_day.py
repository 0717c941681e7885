#!/usr/bin/env python3
"""Solve a static scenario end to end.

The pipeline in three acts: a nearest-neighbour seed, an inter-route
local-search polish, then a full working day of colony iterations with
progressive commitment.  All 100 customers are known up front, so the
day is pure optimisation — watch the objective drop at each stage.

Run from anywhere: paths resolve relative to this file.
"""

from pathlib import Path

from dvrptw import (VIRTUAL, PlannerConfig, evaluate_solution,
                    iterate_local_search, nearest_neighbour_solution,
                    run_working_day, scale_instance, serialize_solution)
from dvrptw.bench import load_instance

DATA = Path(__file__).resolve().parent.parent / "data"

inst = load_instance(DATA / "C101.txt")
print(f"instance {inst.name}: {inst.n - 1} customers, "
      f"vehicle capacity {inst.vehicle_capacity}")

nn = nearest_neighbour_solution(inst)
ev = evaluate_solution(inst, nn)
print(f"nearest-neighbour seed   nv={ev.nv:3d}  td={ev.distance:9.3f}")

polished = iterate_local_search(inst, nn)
ev = evaluate_solution(inst, polished)
print(f"after local search       nv={ev.nv:3d}  td={ev.distance:9.3f}")

config = PlannerConfig(clock=VIRTUAL, virtual_iters_per_slice=200, seed=1)
res = run_working_day(inst, config)
print(f"after a full working day nv={res.nv:3d}  td={res.td_unscaled:9.3f}"
      f"   ({res.iterations} colony iterations, "
      f"{res.feasible_count} feasible solutions examined)")

print()
print("final plan, one tour per line ('|' closes each committed prefix —")
print("by day end that is the whole tour; distance in original units):")
print(serialize_solution(scale_instance(inst, config.t_wd), res.solution))
