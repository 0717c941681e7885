#!/usr/bin/env python3
"""Replay a working day where half the orders arrive mid-shift.

The planner starts with the customers known at dawn, and every two
seconds of the (virtual) day it sweeps the clock: newly disclosed
customers are folded into the plan, visits whose service has begun are
frozen, and the colony restarts from the committed skeleton.  The event
log tells the whole story; this script walks through it.
"""

from collections import Counter
from pathlib import Path

from dvrptw import VIRTUAL, PlannerConfig, run_working_day

from dvrptw.bench import load_instance

DATA = Path(__file__).resolve().parent.parent / "data"

inst = load_instance(DATA / "C201-0.5.txt")
known = sum(c.available == 0.0 for c in inst.customers[1:])
print(f"instance {inst.name}: {inst.n - 1} customers, "
      f"{known} known at dawn, {inst.n - 1 - known} disclosed later")

config = PlannerConfig(clock=VIRTUAL, virtual_iters_per_slice=200, seed=7)
res = run_working_day(inst, config)

kinds = Counter(ev.kind for ev in res.events)
print(f"\nday of {config.t_wd:.0f}s in {config.n_ts} slices: "
      + ", ".join(f"{n} {k} events" for k, n in sorted(kinds.items())))

print("\nfirst disclosure and what followed:")
first_reveal = next(ev.t for ev in res.events if ev.kind == "reveal")
for ev in res.events:
    if first_reveal <= ev.t <= first_reveal + 10.0:
        print(f"  t={ev.t:7.3f}  {ev.kind:16s} {ev.payload}")

commits = [ev for ev in res.events if ev.kind == "commit"]
frozen = sum(len(ev.payload.split("visits=")[1].split(",")) for ev in commits)
print(f"\n{len(commits)} commitment sweeps froze {frozen} visits; "
      f"by day end every tour is fully committed: "
      f"{all(t.committed == len(t.visits) for t in res.solution.tours)}")

print(f"\nfinal plan: nv={res.nv}, td={res.td_unscaled:.3f} "
      f"(original units), all windows honoured: {res.feasible}, "
      f"unservable disclosures: {len(res.hard_infeasible)}")
