"""Tours, solutions, schedule evaluation and the commitment contract.

Everything here is plain Python and serves as the reference semantics: the
compiled kernels must agree with these functions, and the audit helper at
the bottom re-derives feasibility from scratch so tests can cross-check any
solution produced elsewhere.  A solution's objective is lexicographic:
vehicle count first, total travel distance second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .instance_io import ProblemInstance

__all__ = [
    "Tour",
    "Solution",
    "ScheduleEval",
    "SolutionEval",
    "evaluate_schedule",
    "evaluate_solution",
    "is_feasible_insertion",
    "compare_solutions",
    "commit_prefix",
    "committed_prefixes",
    "serialize_solution",
    "parse_solution",
    "solution_to_arrays",
    "arrays_to_solution",
    "audit_solution",
]


@dataclass
class Tour:
    """One vehicle's visit sequence (customer ids, depot implicit).

    ``committed`` counts leading visits that are frozen: the vehicle has
    already begun (or finished) serving them and no operator may touch
    them or insert before them.
    """

    visits: list[int] = field(default_factory=list)
    committed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.committed <= len(self.visits):
            raise ValueError("committed prefix length out of range")

    def copy(self) -> "Tour":
        return Tour(list(self.visits), self.committed)


@dataclass
class Solution:
    """An ordered collection of tours."""

    tours: list[Tour] = field(default_factory=list)

    @property
    def nv(self) -> int:
        """Vehicles in use; empty tours do not count."""
        return sum(1 for t in self.tours if t.visits)

    def customers(self) -> list[int]:
        out: list[int] = []
        for t in self.tours:
            out.extend(t.visits)
        return out

    def copy(self) -> "Solution":
        return Solution([t.copy() for t in self.tours])


@dataclass(frozen=True)
class ScheduleEval:
    """Timing of one tour under the forward recurrence.

    ``begin[k]`` is when service starts at ``visits[k]``; a begin time past
    the customer's due time or a depot return past the horizon only sets
    flags, it never raises.
    """

    begin: tuple[float, ...]
    waiting: tuple[float, ...]
    late: tuple[bool, ...]
    return_time: float
    return_late: bool
    load: int
    overloaded: bool
    distance: float

    @property
    def feasible(self) -> bool:
        return not (self.return_late or self.overloaded or any(self.late))


@dataclass(frozen=True)
class SolutionEval:
    nv: int
    distance: float
    feasible: bool
    schedules: tuple[ScheduleEval, ...]


def evaluate_schedule(inst: ProblemInstance, tour: Tour | Sequence[int]) -> ScheduleEval:
    """Walk one tour from the depot: ``b_j = max(e_j, b_i + s_i + d_ij)``."""
    visits = tour.visits if isinstance(tour, Tour) else list(tour)
    cs = inst.customers
    D = inst.distance_matrix
    begin: list[float] = []
    waiting: list[float] = []
    late: list[bool] = []
    b = cs[0].ready
    prev = 0
    load = 0
    dist = 0.0
    for c in visits:
        d = float(D[prev, c])
        dist += d
        arrival = b + cs[prev].service + d
        b = arrival if arrival > cs[c].ready else cs[c].ready
        begin.append(b)
        waiting.append(b - arrival)
        late.append(b > cs[c].due)
        load += cs[c].demand
        prev = c
    dist += float(D[prev, 0])
    ret = b + cs[prev].service + float(D[prev, 0])
    return ScheduleEval(
        begin=tuple(begin), waiting=tuple(waiting), late=tuple(late),
        return_time=ret, return_late=ret > cs[0].due, load=load,
        overloaded=load > inst.vehicle_capacity, distance=dist)


def evaluate_solution(inst: ProblemInstance, sol: Solution) -> SolutionEval:
    scheds = tuple(evaluate_schedule(inst, t) for t in sol.tours)
    nv = sum(1 for t in sol.tours if t.visits)
    dist = sum(sc.distance for sc, t in zip(scheds, sol.tours) if t.visits)
    feasible = all(sc.feasible for sc, t in zip(scheds, sol.tours) if t.visits)
    return SolutionEval(nv=nv, distance=dist, feasible=feasible,
                        schedules=scheds)


def is_feasible_insertion(inst: ProblemInstance, tour: Tour, pos: int,
                          cust: int) -> bool:
    """Exact check of inserting ``cust`` before position ``pos``.

    The whole downstream chain is re-walked to the depot return; no slack
    shortcut.  Positions inside the committed prefix are never feasible.
    """
    if pos < tour.committed or pos > len(tour.visits):
        return False
    trial = tour.visits[:pos] + [cust] + tour.visits[pos:]
    return evaluate_schedule(inst, trial).feasible


def compare_solutions(inst: ProblemInstance, a: Solution, b: Solution) -> int:
    """-1 when ``a`` is strictly better, 0 on ties, +1 otherwise.

    Vehicle count decides first; travel distance breaks ties exactly.
    """
    ea = evaluate_solution(inst, a)
    eb = evaluate_solution(inst, b)
    if ea.nv != eb.nv:
        return -1 if ea.nv < eb.nv else 1
    if ea.distance != eb.distance:
        return -1 if ea.distance < eb.distance else 1
    return 0


def commit_prefix(tour: Tour, new_len: int) -> None:
    """Grow a tour's committed prefix; shrinking is a contract violation."""
    if new_len < tour.committed:
        raise ValueError(
            f"committed prefix cannot shrink ({tour.committed} -> "
            f"{new_len})")
    if new_len > len(tour.visits):
        raise ValueError("committed prefix cannot pass the end of the tour")
    tour.committed = new_len


def committed_prefixes(sol: Solution) -> list[tuple[int, ...]]:
    """Non-empty committed prefixes, in tour order."""
    return [tuple(t.visits[:t.committed]) for t in sol.tours if t.committed]


# ---------------------------------------------------------------------------
# text form


def serialize_solution(inst: ProblemInstance, sol: Solution) -> str:
    """One tour per line, '|' after the committed prefix.

    The header reports the vehicle count and the travel distance in the
    instance's original (unscaled) time units.
    """
    ev = evaluate_solution(inst, sol)
    td = ev.distance / inst.scale
    lines = [f"NV {ev.nv} TD {td:.6f}"]
    for t in sol.tours:
        if not t.visits:
            continue
        toks = [str(c) for c in t.visits]
        if t.committed:
            toks.insert(t.committed, "|")
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> Solution:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("NV "):
        raise ValueError("solution text must start with an 'NV ... TD ...' "
                         "header")
    tours: list[Tour] = []
    for ln in lines[1:]:
        toks = ln.split()
        if "|" in toks:
            cut = toks.index("|")
            ids = [int(t) for t in toks if t != "|"]
            tours.append(Tour(ids, cut))
        else:
            tours.append(Tour([int(t) for t in toks], 0))
    return Solution(tours)


# ---------------------------------------------------------------------------
# kernel array bridge


def solution_to_arrays(inst: ProblemInstance, sol: Solution):
    """Pack a solution into the int32 matrix layout the kernels use."""
    n = inst.n
    mt = n + 1
    tours = np.zeros((mt, n), dtype=np.int32)
    tlen = np.zeros(mt, dtype=np.int32)
    tcom = np.zeros(mt, dtype=np.int32)
    nt = 0
    for t in sol.tours:
        if not t.visits:
            continue
        m = len(t.visits)
        tours[nt, :m] = t.visits
        tlen[nt] = m
        tcom[nt] = t.committed
        nt += 1
    return tours, tlen, tcom, nt


def arrays_to_solution(tours: np.ndarray, tlen: np.ndarray,
                       tcom: np.ndarray, nt: int) -> Solution:
    out = Solution()
    for t in range(nt):
        m = int(tlen[t])
        if m == 0:
            continue
        out.tours.append(Tour([int(c) for c in tours[t, :m]], int(tcom[t])))
    return out


# ---------------------------------------------------------------------------
# independent audit


@dataclass(frozen=True)
class AuditReport:
    ok: bool
    problems: tuple[str, ...]


def audit_solution(inst: ProblemInstance, sol: Solution,
                   required: Iterable[int],
                   expected_prefixes: Sequence[Sequence[int]] | None = None,
                   ) -> AuditReport:
    """Re-derive every constraint of a solution from first principles.

    Checks exactly-once coverage of ``required``, capacity, window and
    depot-return feasibility, and (optionally) that each expected
    committed prefix survives verbatim at the head of the tour that owns
    its first customer.
    """
    problems: list[str] = []
    seen: dict[int, int] = {}
    for t_idx, t in enumerate(sol.tours):
        for c in t.visits:
            if c in seen:
                problems.append(f"customer {c} visited more than once")
            seen[c] = t_idx
        sched = evaluate_schedule(inst, t)
        if t.visits and sched.overloaded:
            problems.append(f"tour {t_idx} exceeds capacity "
                            f"({sched.load} > {inst.vehicle_capacity})")
        for k, flag in enumerate(sched.late):
            if flag:
                problems.append(
                    f"tour {t_idx}: service at {t.visits[k]} begins after "
                    "its due time")
        if t.visits and sched.return_late:
            problems.append(f"tour {t_idx} returns after the depot due time")
    req = set(required)
    missing = req - seen.keys()
    extra = seen.keys() - req
    if missing:
        problems.append(f"unrouted customers: {sorted(missing)}")
    if extra:
        problems.append(f"unexpected customers: {sorted(extra)}")
    if expected_prefixes is not None:
        heads = {t.visits[0]: t for t in sol.tours if t.visits}
        for pref in expected_prefixes:
            pref = list(pref)
            if not pref:
                continue
            tour = heads.get(pref[0])
            if tour is None:
                problems.append(
                    f"committed prefix {pref} lost: no tour starts with "
                    f"{pref[0]}")
                continue
            if tour.visits[:len(pref)] != pref:
                problems.append(
                    f"committed prefix {pref} mangled to "
                    f"{tour.visits[:len(pref)]}")
            if tour.committed < len(pref):
                problems.append(
                    f"committed prefix {pref} no longer marked committed")
    return AuditReport(ok=not problems, problems=tuple(problems))
