"""Working-day controller: time slices, disclosure, commitment, restarts.

The day is rescaled to ``t_wd`` seconds and cut into ``n_ts`` slices.  A
colony improves the current plan continuously; at each slice boundary the
controller checks two things: customers whose disclosure time has passed,
and planned visits whose service begins at or before the boundary.  If
either set is non-empty the colony is stopped, the begun visits are frozen
(committed prefixes grow, never shrink), the new customers are inserted
(cheapest insertion first, fresh tours for whoever does not fit), the
pheromone matrix is re-seeded around ``1 / (n_av * L_best)`` with a 0.7/0.3
blend of the old trail, and the colony restarts on the new snapshot.

Two clocks exist: ``wall`` runs the colony in a worker thread against real
time; ``virtual`` replaces each inter-boundary wait with a fixed iteration
budget, which makes a run a pure function of its seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable

from . import _kernels as K
from .acs_engine import (AcsParams, Colony, PheromoneState, init_pheromone,
                         preserve_pheromone, run_colony)
from .construction import i1_insertion, nearest_neighbour_solution, nn_tours
from .instance_io import ProblemInstance, scale_instance
from .local_search import iterate_local_search
from .routing_model import (Solution, Tour, commit_prefix,
                            committed_prefixes, evaluate_schedule,
                            evaluate_solution)

__all__ = [
    "PlannerConfig",
    "PlannerState",
    "EventRecord",
    "DayResult",
    "initialize_day",
    "commitment_sweep",
    "reveal_and_repair",
    "run_working_day",
    "serialize_events",
]

WALL = "wall"
VIRTUAL = "virtual"


@dataclass(frozen=True)
class PlannerConfig:
    """Knobs of one working day."""

    t_wd: float = 100.0
    n_ts: int = 50
    clock: str = WALL
    virtual_iters_per_slice: int = 200
    params: AcsParams = field(default_factory=AcsParams)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.clock not in (WALL, VIRTUAL):
            raise ValueError("clock must be 'wall' or 'virtual'")
        if self.n_ts < 1:
            raise ValueError("need at least one time slice")
        if self.t_wd <= 0:
            raise ValueError("working day must have positive length")
        if self.virtual_iters_per_slice < 0:
            raise ValueError("iteration budget cannot be negative")

    @property
    def t_ts(self) -> float:
        return self.t_wd / self.n_ts


@dataclass(frozen=True)
class EventRecord:
    """One timestamped line of the day's event log."""

    t: float
    slice: int
    kind: str
    payload: str = ""


def serialize_events(events: Iterable[EventRecord]) -> str:
    lines = [
        f"t={ev.t:.6f} slice={ev.slice} {ev.kind}"
        + (f" {ev.payload}" if ev.payload else "")
        for ev in events
    ]
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class PlannerState:
    """Mutable snapshot of the day as the controller sees it."""

    inst: ProblemInstance                 # scaled
    available: set[int] = field(default_factory=set)
    pending: dict[int, float] = field(default_factory=dict)
    hard_infeasible: list[int] = field(default_factory=list)
    s_best: Solution = field(default_factory=Solution)
    pheromone: PheromoneState | None = None
    idx_ts: int = 0
    events: list[EventRecord] = field(default_factory=list)

    @property
    def n_av(self) -> int:
        return len(self.available)

    def log(self, t: float, kind: str, payload: str = "") -> None:
        self.events.append(EventRecord(t=t, slice=self.idx_ts, kind=kind,
                                       payload=payload))


@dataclass
class DayResult:
    """What a working day produced."""

    solution: Solution
    nv: int
    td_scaled: float
    td_unscaled: float
    feasible: bool
    hard_infeasible: list[int]
    feasible_count: int
    iterations: int
    duration_s: float
    events: list[EventRecord]


# ---------------------------------------------------------------------------
# day pieces


def initialize_day(inst_scaled: ProblemInstance, params: AcsParams,
                   ) -> PlannerState:
    """Split customers into a-priori and pending, build the first plan.

    The a-priori set gets a nearest-neighbour plan improved by local
    search; the trail matrix starts at ``1 / (n_av * L_nn)`` with the
    pre-improvement tour length.  Fully dynamic days start with an empty
    plan and defer the pheromone matrix to the first disclosure.
    """
    day_start = inst_scaled.customers[0].ready
    st = PlannerState(inst=inst_scaled)
    for c in inst_scaled.customers[1:]:
        if c.available <= day_start:
            st.available.add(c.id)
        else:
            st.pending[c.id] = c.available
    st.log(day_start, "day_start",
           f"a_priori={len(st.available)} pending={len(st.pending)}")
    if st.available:
        nn = nearest_neighbour_solution(inst_scaled, st.available,
                                        params.nn)
        l_nn = evaluate_solution(inst_scaled, nn).distance
        st.s_best = iterate_local_search(inst_scaled, nn)
        if l_nn > 0:
            st.pheromone = init_pheromone(inst_scaled, st.n_av, l_nn,
                                          params.cl)
    return st


def commitment_sweep(inst: ProblemInstance, sol: Solution,
                     threshold: float) -> list[tuple[int, int, int]]:
    """Freeze every visit whose service begins at or before ``threshold``.

    Begin times are non-decreasing along a tour, so the swept set is a
    prefix.  Returns ``(tour_index, old_len, new_len)`` for each tour
    whose committed prefix grew.
    """
    grown: list[tuple[int, int, int]] = []
    for idx, tour in enumerate(sol.tours):
        if not tour.visits:
            continue
        sched = evaluate_schedule(inst, tour)
        p = 0
        for b in sched.begin:
            if b <= threshold:
                p += 1
            else:
                break
        if p > tour.committed:
            old = tour.committed
            commit_prefix(tour, p)
            grown.append((idx, old, p))
    return grown


def reveal_and_repair(inst: ProblemInstance, sol: Solution,
                      reveal_ids: Iterable[int], params: AcsParams,
                      ) -> tuple[Solution, list[int]]:
    """Work newly disclosed customers into the plan.

    Cheapest insertion tries first; whoever finds no slot goes into fresh
    tours grown by the nearest-neighbour rule.  Customers that cannot be
    served even by a dedicated vehicle come back as hard-infeasible.
    """
    ids = sorted({int(c) for c in reveal_ids})
    if not ids:
        return sol.copy(), []
    out, left = i1_insertion(inst, sol, ids, params.ins)
    if not left:
        return out, []
    tours, stuck = nn_tours(inst, left, params.nn)
    out.tours.extend(tours)
    return out, stuck


# ---------------------------------------------------------------------------
# the full day


def run_working_day(inst: ProblemInstance, config: PlannerConfig,
                    ) -> DayResult:
    """Drive one complete working day and return the final plan.

    ``inst`` is an unscaled instance; it is rescaled to ``config.t_wd``
    seconds here.  The reported travel distance comes back in the
    instance's original time units.
    """
    t_start = time.monotonic()
    scaled = scale_instance(inst, config.t_wd)
    params = config.params
    day_start = scaled.customers[0].ready
    st = initialize_day(scaled, params)

    rng = K.rng_from_seed(config.seed)
    colony: Colony | None = None       # wall mode
    virt_skeleton: Solution | None = None  # virtual mode
    virtual = config.clock == VIRTUAL
    feasible_count = 0
    iterations = 0
    improve_log: list[tuple[float, int, float]] = []

    def note_improve_wall(it: int, nv: int, td: float) -> None:
        improve_log.append((day_start + (time.monotonic() - t_start),
                            nv, td))

    def colony_can_run() -> bool:
        return bool(st.available) and st.s_best.nv > 0

    def make_skeleton() -> Solution:
        return Solution([Tour(list(p), len(p))
                         for p in committed_prefixes(st.s_best)])

    def start_colony() -> None:
        nonlocal colony, virt_skeleton
        if virtual:
            virt_skeleton = make_skeleton()
            return
        colony = Colony(scaled, st.pheromone, params, rng)
        colony.start(make_skeleton(), st.available, st.s_best,
                     on_improve=note_improve_wall)

    def run_virtual_slice(k: int) -> None:
        nonlocal feasible_count, iterations
        if virt_skeleton is None:
            return
        t0 = day_start + (k - 1) * config.t_ts
        budget = config.virtual_iters_per_slice

        def note(it: int, nv: int, td: float) -> None:
            improve_log.append(
                (t0 + (it + 1) / max(budget, 1) * config.t_ts, nv, td))

        res = run_colony(scaled, st.pheromone, virt_skeleton, st.available,
                         params, rng, st.s_best,
                         iterations=budget, on_improve=note)
        feasible_count += res.feasible_count
        iterations += res.iterations
        st.s_best = res.best

    def stop_colony() -> None:
        nonlocal colony, virt_skeleton
        nonlocal feasible_count, iterations
        virt_skeleton = None
        if colony is None:
            return
        res = colony.stop()
        if res is not None:
            feasible_count += res.feasible_count
            iterations += res.iterations
            st.s_best = res.best
        colony = None

    if colony_can_run() and st.pheromone is not None:
        start_colony()

    for k in range(1, config.n_ts + 1):
        boundary = day_start + k * config.t_ts
        if virtual:
            run_virtual_slice(k)
        else:
            wait = (t_start + k * config.t_ts) - time.monotonic()
            if wait > 0:
                time.sleep(wait)
        st.idx_ts = k
        final = k == config.n_ts

        reveals = [cid for cid, a in st.pending.items() if a <= boundary]
        plan = _current_plan(st, colony, virtual)
        commits_due = _commits_due(scaled, plan, boundary)
        if not (reveals or commits_due or final):
            continue

        stop_colony()
        for ev in improve_log:
            st.log(ev[0], "improve", f"nv={ev[1]} td={ev[2]:.6f}")
        improve_log.clear()

        grown = commitment_sweep(scaled, st.s_best, boundary)
        for idx, old, new in grown:
            ids = st.s_best.tours[idx].visits[old:new]
            st.log(boundary, "commit",
                   f"tour={idx} visits={','.join(map(str, ids))}")
        if reveals:
            for cid in sorted(reveals):
                del st.pending[cid]
                st.log(boundary, "reveal", f"customer={cid}")
            repaired, stuck = reveal_and_repair(scaled, st.s_best,
                                                reveals, params)
            st.s_best = repaired
            for cid in sorted(set(reveals) - set(stuck)):
                st.available.add(cid)
            for cid in stuck:
                st.hard_infeasible.append(cid)
                st.log(boundary, "hard_infeasible", f"customer={cid}")
        if final:
            grown = commitment_sweep(scaled, st.s_best,
                                     day_start + config.t_wd)
            for idx, old, new in grown:
                ids = st.s_best.tours[idx].visits[old:new]
                st.log(boundary, "commit",
                       f"tour={idx} visits={','.join(map(str, ids))}")
            break

        if colony_can_run():
            ev = evaluate_solution(scaled, st.s_best)
            if ev.distance > 0:
                if st.pheromone is None:
                    st.pheromone = init_pheromone(scaled, st.n_av,
                                                  ev.distance, params.cl)
                else:
                    preserve_pheromone(st.pheromone,
                                       1.0 / (st.n_av * ev.distance))
                st.log(boundary, "restart",
                       f"n_av={st.n_av} l_best={ev.distance:.6f}")
                start_colony()

    stop_colony()
    for ev in improve_log:
        st.log(ev[0], "improve", f"nv={ev[1]} td={ev[2]:.6f}")
    improve_log.clear()

    final_eval = evaluate_solution(scaled, st.s_best)
    td_unscaled = final_eval.distance / scaled.scale
    st.log(day_start + config.t_wd, "day_end",
           f"nv={final_eval.nv} td={td_unscaled:.6f}")
    return DayResult(
        solution=st.s_best,
        nv=final_eval.nv,
        td_scaled=final_eval.distance,
        td_unscaled=td_unscaled,
        feasible=final_eval.feasible,
        hard_infeasible=sorted(st.hard_infeasible),
        feasible_count=feasible_count,
        iterations=iterations,
        duration_s=time.monotonic() - t_start,
        events=st.events)


def _current_plan(st: PlannerState, colony: Colony | None,
                  virtual: bool) -> Solution:
    """The plan commits are judged against at a boundary.

    In virtual mode (and whenever the colony is idle) that is simply the
    controller's best; in wall mode the running colony's live best view.
    """
    if virtual or colony is None:
        return st.s_best
    view = colony.best_view()
    return view if view is not None else st.s_best


def _commits_due(inst: ProblemInstance, plan: Solution,
                 threshold: float) -> bool:
    for tour in plan.tours:
        if tour.committed >= len(tour.visits):
            continue
        sched = evaluate_schedule(inst, tour)
        if sched.begin[tour.committed] <= threshold:
            return True
    return False
