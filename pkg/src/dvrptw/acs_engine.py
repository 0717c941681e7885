"""Single-colony ant system over one routing snapshot.

The colony minimises vehicles first and distance second with a joint
(vehicle, customer) transition rule: every active tour's tail competes to
append every available customer, weighted by pheromone and the inverse of
the time-oriented closeness metric.  Pheromone lives on a dense symmetric
matrix; the local rule nudges traversed edges back toward tau0 and the
global rule reinforces the best-so-far solution once per iteration.

``run_colony`` is synchronous; :class:`Colony` wraps it in a worker thread
with a stop flag for real-time use.  All heavy lifting happens in compiled
kernels that release the GIL, so a controller thread stays live while ants
run.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels as K
from .construction import InsertionWeights, NnWeights
from .instance_io import ProblemInstance
from .routing_model import (Solution, arrays_to_solution, solution_to_arrays)

__all__ = [
    "AcsParams",
    "PheromoneState",
    "ColonyResult",
    "Colony",
    "build_candidate_lists",
    "init_pheromone",
    "preserve_pheromone",
    "local_pheromone_update",
    "global_pheromone_update",
    "transition_weights",
    "joint_transition",
    "construct_ant_solution",
    "run_colony",
]

# blend kept from the old trail when pheromone is re-seeded between
# solver restarts; the remainder comes from the fresh tau0
PRESERVE_OLD = 0.7


@dataclass(frozen=True)
class AcsParams:
    """Colony controls; defaults follow the benchmark configuration."""

    n_ants: int = 10
    q0: float = 0.9
    alpha: float = 1.0
    beta: float = 1.0
    rho: float = 0.9
    cl: int = 20
    stall_threshold: int = 10
    nn: NnWeights = field(default_factory=NnWeights)
    ins: InsertionWeights = field(default_factory=InsertionWeights)

    def __post_init__(self) -> None:
        if not 0.0 <= self.q0 <= 1.0:
            raise ValueError("q0 must lie in [0, 1]")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if self.n_ants < 1:
            raise ValueError("need at least one ant")
        if self.cl < 1:
            raise ValueError("candidate list size must be positive")


@dataclass
class PheromoneState:
    """Dense symmetric trail matrix plus its reset level and the
    per-node candidate lists."""

    tau: np.ndarray
    tau0: float
    cand: np.ndarray


def build_candidate_lists(inst: ProblemInstance, cl: int) -> np.ndarray:
    """For each node the ``min(cl, n - 1)`` nearest other nodes, ascending
    by distance with ties broken by id."""
    n = inst.n
    k = min(cl, n - 1)
    out = np.empty((n, k), dtype=np.int32)
    D = inst.distance_matrix
    for i in range(n):
        order = np.argsort(D[i], kind="stable")
        row = [j for j in order if j != i][:k]
        out[i, :] = row
    out.setflags(write=False)
    return out


def init_pheromone(inst: ProblemInstance, n_av: int, l_ref: float,
                   cl: int) -> PheromoneState:
    """Fresh uniform trail at ``tau0 = 1 / (n_av * l_ref)``."""
    if n_av <= 0:
        raise ValueError("tau0 needs a positive count of available nodes")
    if l_ref <= 0:
        raise ValueError("tau0 needs a positive reference tour length")
    tau0 = 1.0 / (n_av * l_ref)
    tau = np.full((inst.n, inst.n), tau0, dtype=np.float64)
    return PheromoneState(tau=tau, tau0=tau0,
                          cand=build_candidate_lists(inst, cl))


def preserve_pheromone(state: PheromoneState, tau0_new: float) -> None:
    """Blend the old trail into a fresh base level, in place.

    Repeated application without new information contracts the matrix
    geometrically (ratio ``PRESERVE_OLD``) toward the new tau0.
    """
    if tau0_new <= 0:
        raise ValueError("tau0 must stay positive")
    np.multiply(state.tau, PRESERVE_OLD, out=state.tau)
    state.tau += (1.0 - PRESERVE_OLD) * tau0_new
    state.tau0 = tau0_new


def local_pheromone_update(state: PheromoneState, i: int, j: int,
                           rho: float) -> None:
    """Decay one traversed edge toward tau0, both orientations."""
    t = (1.0 - rho) * state.tau[i, j] + rho * state.tau0
    state.tau[i, j] = t
    state.tau[j, i] = (1.0 - rho) * state.tau[j, i] + rho * state.tau0


def global_pheromone_update(state: PheromoneState, inst: ProblemInstance,
                            best: Solution, rho: float,
                            l_best: float) -> None:
    """Reinforce the best solution's edges (depot legs included)."""
    if l_best <= 0:
        raise ValueError("best tour length must be positive")
    tours, tlen, _, nt = solution_to_arrays(inst, best)
    K.global_update(state.tau, tours, tlen, nt, rho, l_best)


# ---------------------------------------------------------------------------
# reference transition rule (plain Python; the engine uses the kernel twin)


def transition_weights(inst: ProblemInstance, state: PheromoneState,
                       tails: Sequence[tuple[int, float, int]],
                       available: Iterable[int], params: AcsParams,
                       use_candidates: bool = True,
                       ) -> tuple[list[tuple[int, int]], list[float]]:
    """Feasible (vehicle, customer) pairs and their unnormalised weights.

    ``tails`` holds one ``(last_node, departure_time, load)`` triple per
    active tour.  Candidate lists gate the scan first; when they offer no
    feasible pair the scan widens to every available customer.
    """
    cs = inst.customers
    D = inst.distance_matrix
    cap = inst.vehicle_capacity
    l0 = cs[0].due
    avail = sorted({int(c) for c in available})
    w = params.nn

    def scan(cands_of) -> tuple[list[tuple[int, int]], list[float]]:
        pairs: list[tuple[int, int]] = []
        weights: list[float] = []
        for v, (last, dep, load) in enumerate(tails):
            for c in cands_of(last):
                if load + cs[c].demand > cap:
                    continue
                d = float(D[last, c])
                arrival = dep + d
                bc = arrival if arrival > cs[c].ready else cs[c].ready
                if bc > cs[c].due:
                    continue
                if bc + cs[c].service + float(D[c, 0]) > l0:
                    continue
                m = (w.w_d * d + w.w_t * (bc - dep)
                     + w.w_u * (cs[c].due - arrival))
                m = max(m, K.EPS_METRIC)
                weights.append(
                    (state.tau[last, c] ** params.alpha)
                    * ((1.0 / m) ** params.beta))
                pairs.append((v, c))
        return pairs, weights

    avail_set = set(avail)
    if use_candidates:
        pairs, weights = scan(
            lambda last: [int(c) for c in state.cand[last]
                          if int(c) in avail_set])
        if pairs:
            return pairs, weights
    return scan(lambda last: avail)


def joint_transition(inst: ProblemInstance, state: PheromoneState,
                     tails: Sequence[tuple[int, float, int]],
                     available: Iterable[int], params: AcsParams,
                     rng: np.random.Generator,
                     ) -> tuple[int, int] | None:
    """Pick the next (vehicle, customer) move, or None when stalled.

    With probability ``q0`` the best-weighted pair wins outright;
    otherwise the pair is sampled proportionally to its weight.
    """
    pairs, weights = transition_weights(inst, state, tails, available,
                                        params)
    if not pairs:
        return None
    if rng.random() <= params.q0:
        best = max(range(len(pairs)), key=lambda k: (weights[k], -k))
        return pairs[best]
    total = sum(weights)
    r = rng.random() * total
    acc = 0.0
    for k, wk in enumerate(weights):
        acc += wk
        if r < acc:
            return pairs[k]
    return pairs[-1]


# ---------------------------------------------------------------------------
# compiled-path plumbing


class _Workspace:
    """Preallocated buffers for one colony over one instance size."""

    def __init__(self, n: int):
        mt = n + 1
        self.ant = self._solution_bufs(mt, n)
        self.it_best = self._solution_bufs(mt, n)
        self.best = self._solution_bufs(mt, n)
        self.skel_tours = np.zeros((mt, n), dtype=np.int32)
        self.skel_tlen = np.zeros(mt, dtype=np.int32)
        self.avail = np.zeros(n, dtype=np.uint8)
        self.scratch_row = np.zeros(n, dtype=np.int32)
        self.scratch_b = np.zeros(n, dtype=np.float64)
        self.out_move = np.zeros(4, dtype=np.int64)
        self.b_scratch = np.zeros(n, dtype=np.float64)

    @staticmethod
    def _solution_bufs(mt: int, n: int) -> dict:
        return {
            "tours": np.zeros((mt, n), dtype=np.int32),
            "tlen": np.zeros(mt, dtype=np.int32),
            "tcom": np.zeros(mt, dtype=np.int32),
            "tload": np.zeros(mt, dtype=np.int64),
            "btime": np.zeros((mt, n), dtype=np.float64),
            "nt": 0,
        }

    @staticmethod
    def copy_bufs(src: dict, dst: dict) -> None:
        dst["tours"][:] = src["tours"]
        dst["tlen"][:] = src["tlen"]
        dst["tcom"][:] = src["tcom"]
        dst["tload"][:] = src["tload"]
        dst["btime"][:] = src["btime"]
        dst["nt"] = src["nt"]


def construct_ant_solution(inst: ProblemInstance, state: PheromoneState,
                           skeleton: Solution, available: Iterable[int],
                           params: AcsParams, rng: np.ndarray,
                           ) -> Solution | None:
    """Build one ant solution (compiled path); None when some available
    customer cannot even start its own tour."""
    arr = inst.arrays
    ws = _Workspace(inst.n)
    sk_tours, sk_tlen, sk_tcom, sk_nt = solution_to_arrays(inst, skeleton)
    avail = np.zeros(inst.n, dtype=np.uint8)
    for c in available:
        avail[int(c)] = 1
    for t in range(sk_nt):
        if sk_tcom[t] != sk_tlen[t]:
            raise ValueError("ant skeleton must be fully committed tours")
    ok, nt = K.ant_construct(
        arr.D, arr.e, arr.l, arr.s, arr.dem, arr.cap, state.cand,
        state.tau, state.tau0, sk_tours, sk_tlen, sk_nt, avail,
        params.q0, params.alpha, params.beta, params.rho,
        params.stall_threshold, params.ins.a1, params.ins.a2,
        params.ins.lam, params.ins.sign, params.nn.w_d, params.nn.w_t,
        params.nn.w_u, rng,
        ws.ant["tours"], ws.ant["tlen"], ws.ant["tcom"],
        ws.ant["tload"], ws.ant["btime"])
    if not ok:
        return None
    return arrays_to_solution(ws.ant["tours"], ws.ant["tlen"],
                              ws.ant["tcom"], nt)


@dataclass
class ColonyResult:
    """Outcome of one colony segment."""

    best: Solution
    nv: int
    distance: float
    iterations: int
    feasible_count: int
    improvements: list[tuple[int, int, float]] = field(default_factory=list)


def run_colony(inst: ProblemInstance, state: PheromoneState,
               skeleton: Solution, available: Iterable[int],
               params: AcsParams, rng: np.ndarray,
               best: Solution,
               iterations: int | None = None,
               stop_flag: np.ndarray | None = None,
               on_improve: Callable[[int, int, float], None] | None = None,
               best_sink: Callable[[Solution], None] | None = None,
               ) -> ColonyResult:
    """Run colony iterations until the budget or the stop flag ends them.

    Each iteration: every ant copies the committed skeleton and builds a
    complete solution (local pheromone rule as it goes), the iteration's
    lexicographic best gets local search, the best-so-far is updated
    monotonically, and the global rule reinforces the best-so-far edges.
    ``best`` seeds the best-so-far and must cover the available set.
    Returns the count of complete feasible ant solutions built.
    """
    arr = inst.arrays
    n = inst.n
    ws = _Workspace(n)
    if stop_flag is None:
        stop_flag = np.zeros(1, dtype=np.int32)

    sk_tours, sk_tlen, sk_tcom, sk_nt = solution_to_arrays(inst, skeleton)
    for t in range(sk_nt):
        if sk_tcom[t] != sk_tlen[t]:
            raise ValueError("colony skeleton must be fully committed")
    ws.skel_tours[:] = sk_tours
    ws.skel_tlen[:] = sk_tlen
    ws.avail[:] = 0
    for c in available:
        ws.avail[int(c)] = 1

    bt, bl, bc, bn = solution_to_arrays(inst, best)
    ws.best["tours"][:] = bt
    ws.best["tlen"][:] = bl
    ws.best["tcom"][:] = bc
    ws.best["nt"] = bn
    K.refresh_caches(ws.best["tours"], ws.best["tlen"], bn, arr.D, arr.e,
                     arr.l, arr.s, arr.dem, arr.cap, ws.best["tload"],
                     ws.best["btime"])
    best_nv, best_td, best_ok = K.solution_cost(
        ws.best["tours"], ws.best["tlen"], bn, arr.D, arr.e, arr.l, arr.s,
        arr.dem, arr.cap, ws.b_scratch)
    if not best_ok:
        raise ValueError("seed solution for the colony is infeasible")

    feasible_count = 0
    it = 0
    improvements: list[tuple[int, int, float]] = []
    while iterations is None or it < iterations:
        if stop_flag[0]:
            break
        got_iter_best = False
        ib_nv = 0
        ib_td = 0.0
        aborted = False
        for _ in range(params.n_ants):
            if stop_flag[0]:
                aborted = True
                break
            ok, nt = K.ant_construct(
                arr.D, arr.e, arr.l, arr.s, arr.dem, arr.cap, state.cand,
                state.tau, state.tau0, ws.skel_tours, ws.skel_tlen, sk_nt,
                ws.avail, params.q0, params.alpha, params.beta, params.rho,
                params.stall_threshold, params.ins.a1, params.ins.a2,
                params.ins.lam, params.ins.sign, params.nn.w_d,
                params.nn.w_t, params.nn.w_u, rng,
                ws.ant["tours"], ws.ant["tlen"], ws.ant["tcom"],
                ws.ant["tload"], ws.ant["btime"])
            if not ok:
                continue
            feasible_count += 1
            ws.ant["nt"] = nt
            a_nv, a_td, _ = K.solution_cost(
                ws.ant["tours"], ws.ant["tlen"], nt, arr.D, arr.e, arr.l,
                arr.s, arr.dem, arr.cap, ws.b_scratch)
            if (not got_iter_best or a_nv < ib_nv
                    or (a_nv == ib_nv and a_td < ib_td)):
                ws.copy_bufs(ws.ant, ws.it_best)
                ib_nv, ib_td = a_nv, a_td
                got_iter_best = True
        if aborted:
            break
        if got_iter_best:
            nt2 = K.ls_run(
                ws.it_best["tours"], ws.it_best["tlen"], ws.it_best["tcom"],
                ws.it_best["nt"], arr.D, arr.e, arr.l, arr.s, arr.dem,
                arr.cap, ws.it_best["tload"], ws.it_best["btime"],
                ws.scratch_row, ws.scratch_b, ws.out_move)
            ws.it_best["nt"] = nt2
            ib_nv, ib_td, _ = K.solution_cost(
                ws.it_best["tours"], ws.it_best["tlen"], nt2, arr.D, arr.e,
                arr.l, arr.s, arr.dem, arr.cap, ws.b_scratch)
            if ib_nv < best_nv or (ib_nv == best_nv and ib_td < best_td):
                ws.copy_bufs(ws.it_best, ws.best)
                best_nv, best_td = ib_nv, ib_td
                improvements.append((it, best_nv, best_td))
                if on_improve is not None:
                    on_improve(it, best_nv, best_td)
                if best_sink is not None:
                    best_sink(arrays_to_solution(
                        ws.best["tours"], ws.best["tlen"], ws.best["tcom"],
                        ws.best["nt"]))
        if best_td > 0:
            K.global_update(state.tau, ws.best["tours"], ws.best["tlen"],
                            ws.best["nt"], params.rho, best_td)
        it += 1
    return ColonyResult(
        best=arrays_to_solution(ws.best["tours"], ws.best["tlen"],
                                ws.best["tcom"], ws.best["nt"]),
        nv=best_nv, distance=best_td, iterations=it,
        feasible_count=feasible_count, improvements=improvements)


class Colony:
    """Background colony with a stop flag, for the real-time clock.

    The controller calls :meth:`start` after each structural change and
    :meth:`stop` before touching tours; the kernels release the GIL so the
    controller thread keeps running between polls.
    """

    def __init__(self, inst: ProblemInstance, state: PheromoneState,
                 params: AcsParams, rng: np.ndarray):
        self.inst = inst
        self.state = state
        self.params = params
        self.rng = rng
        self._thread: threading.Thread | None = None
        self._stop = np.zeros(1, dtype=np.int32)
        self._view: Solution | None = None
        self._view_lock = threading.Lock()
        self.result: ColonyResult | None = None
        self.feasible_total = 0
        self.iterations_total = 0

    def best_view(self) -> Solution | None:
        """Thread-safe copy of the best solution found so far."""
        with self._view_lock:
            return self._view.copy() if self._view is not None else None

    def start(self, skeleton: Solution, available: Iterable[int],
              best: Solution,
              on_improve: Callable[[int, int, float], None] | None = None,
              ) -> None:
        if self._thread is not None:
            raise RuntimeError("colony already running")
        self._stop[0] = 0
        self.result = None
        avail = list(available)
        with self._view_lock:
            self._view = best.copy()

        def sink(sol: Solution) -> None:
            with self._view_lock:
                self._view = sol

        def work() -> None:
            self.result = run_colony(
                self.inst, self.state, skeleton, avail, self.params,
                self.rng, best, iterations=None, stop_flag=self._stop,
                on_improve=on_improve, best_sink=sink)

        self._thread = threading.Thread(target=work, daemon=True)
        self._thread.start()

    def stop(self) -> ColonyResult | None:
        if self._thread is None:
            return self.result
        self._stop[0] = 1
        self._thread.join()
        self._thread = None
        if self.result is not None:
            self.feasible_total += self.result.feasible_count
            self.iterations_total += self.result.iterations
        return self.result
