"""Route construction heuristics: time-oriented nearest neighbour and
two-level cheapest insertion.

These are the plain-Python reference implementations.  The ant engine uses
compiled twins of both (see ``_kernels``); the test suite holds the two
routes equal on randomised inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .instance_io import ProblemInstance
from .routing_model import Solution, Tour, evaluate_schedule

__all__ = [
    "NnWeights",
    "InsertionWeights",
    "InfeasibleCustomerError",
    "closeness_metric",
    "nearest_neighbour_solution",
    "nn_tours",
    "i1_insertion",
]


@dataclass(frozen=True)
class NnWeights:
    """Weights of the closeness metric: distance, time gap, urgency."""

    w_d: float = 0.4
    w_t: float = 0.4
    w_u: float = 0.2


@dataclass(frozen=True)
class InsertionWeights:
    """Insertion criterion weights.

    ``c1 = a1 * detour + a2 * successor_shift`` picks the position;
    ``c2 = lam * d(0, u) - c1`` picks the customer.  ``seed_rule`` decides
    whether c2 is minimised (default) or maximised (the classic variant
    that favours far-out seeds).
    """

    a1: float = 0.1
    a2: float = 0.9
    lam: float = 2.0
    seed_rule: str = "min"

    def __post_init__(self) -> None:
        if self.seed_rule not in ("min", "max"):
            raise ValueError("seed_rule must be 'min' or 'max'")

    @property
    def sign(self) -> int:
        return 1 if self.seed_rule == "min" else -1


class InfeasibleCustomerError(ValueError):
    """A customer cannot be served even by a dedicated fresh vehicle."""

    def __init__(self, customer: int):
        self.customer = customer
        super().__init__(
            f"customer {customer} cannot be feasibly served by any tour")


def closeness_metric(inst: ProblemInstance, i: int, j: int, b_i: float,
                     weights: NnWeights = NnWeights()) -> float:
    """How attractive is travelling from ``i`` (service begun at ``b_i``)
    to ``j``; smaller is closer.

    Blends the travel time, the gap between service end at ``i`` and
    service begin at ``j``, and the urgency slack until ``j``'s due time.
    """
    cs = inst.customers
    d = inst.distance(i, j)
    dep = b_i + cs[i].service
    arrival = dep + d
    b_j = arrival if arrival > cs[j].ready else cs[j].ready
    t_gap = b_j - dep
    urgency = cs[j].due - arrival
    return weights.w_d * d + weights.w_t * t_gap + weights.w_u * urgency


def nn_tours(inst: ProblemInstance, todo: Iterable[int],
             weights: NnWeights = NnWeights(),
             ) -> tuple[list[Tour], list[int]]:
    """Grow fresh depot tours greedily by the closeness metric.

    A new tour opens only when the current one cannot take anyone; ties
    fall to the lowest customer id.  Returns the tours plus whichever
    customers no empty vehicle can serve, sorted ascending.
    """
    cs = inst.customers
    D = inst.distance_matrix
    cap = inst.vehicle_capacity
    l0 = cs[0].due
    left = {int(c) for c in todo}
    for c in left:
        if not 1 <= c < inst.n:
            raise ValueError(f"unknown customer id {c}")
    tours: list[Tour] = []
    while left:
        visits: list[int] = []
        load = 0
        b = cs[0].ready
        prev = 0
        while True:
            dep = b + cs[prev].service
            best = -1
            best_m = 0.0
            best_b = 0.0
            for c in sorted(left):
                if load + cs[c].demand > cap:
                    continue
                d = float(D[prev, c])
                arrival = dep + d
                bc = arrival if arrival > cs[c].ready else cs[c].ready
                if bc > cs[c].due:
                    continue
                if bc + cs[c].service + float(D[c, 0]) > l0:
                    continue
                m = (weights.w_d * d + weights.w_t * (bc - dep)
                     + weights.w_u * (cs[c].due - arrival))
                if best < 0 or m < best_m:
                    best = c
                    best_m = m
                    best_b = bc
            if best < 0:
                break
            visits.append(best)
            left.remove(best)
            load += cs[best].demand
            b = best_b
            prev = best
        if not visits:
            return tours, sorted(left)
        tours.append(Tour(visits))
    return tours, []


def nearest_neighbour_solution(inst: ProblemInstance,
                               available: Iterable[int] | None = None,
                               weights: NnWeights = NnWeights()) -> Solution:
    """Complete greedy plan over ``available`` (default: everyone).

    Raises :class:`InfeasibleCustomerError` if some customer cannot be
    served even by a dedicated vehicle.  An empty available set yields a
    solution with no tours.
    """
    todo = range(1, inst.n) if available is None else available
    tours, stuck = nn_tours(inst, todo, weights)
    if stuck:
        raise InfeasibleCustomerError(stuck[0])
    return Solution(tours)


def i1_insertion(inst: ProblemInstance, sol: Solution,
                 unrouted: Iterable[int],
                 weights: InsertionWeights = InsertionWeights(),
                 ) -> tuple[Solution, list[int]]:
    """Insert unrouted customers into existing tours, cheapest first.

    Works on a copy; committed prefixes are never preceded.  Returns the
    grown solution and whichever customers found no feasible slot, sorted
    ascending.  Ties: lowest customer id, then earliest (tour, position).
    """
    cs = inst.customers
    D = inst.distance_matrix
    out = sol.copy()
    todo = sorted({int(c) for c in unrouted})
    for c in todo:
        if not 1 <= c < inst.n:
            raise ValueError(f"unknown customer id {c}")
    while todo:
        sel = None  # (score, u, tour_idx, pos)
        for u in todo:
            u_best = None  # (c1, tour_idx, pos)
            for t_idx, tour in enumerate(out.tours):
                sched = evaluate_schedule(inst, tour)
                if sched.load + cs[u].demand > inst.vehicle_capacity:
                    continue
                for pos in range(tour.committed, len(tour.visits) + 1):
                    trial = tour.visits[:pos] + [u] + tour.visits[pos:]
                    tr = evaluate_schedule(inst, trial)
                    if not tr.feasible:
                        continue
                    prev = tour.visits[pos - 1] if pos > 0 else 0
                    nxt = tour.visits[pos] if pos < len(tour.visits) else 0
                    c11 = (float(D[prev, u]) + float(D[u, nxt])
                           - float(D[prev, nxt]))
                    if pos < len(tour.visits):
                        c12 = tr.begin[pos + 1] - sched.begin[pos]
                    else:
                        c12 = tr.return_time - sched.return_time
                    c1 = weights.a1 * c11 + weights.a2 * c12
                    if u_best is None or c1 < u_best[0]:
                        u_best = (c1, t_idx, pos)
            if u_best is None:
                continue
            c2 = weights.lam * float(D[0, u]) - u_best[0]
            score = weights.sign * c2
            if sel is None or score < sel[0]:
                sel = (score, u, u_best[1], u_best[2])
        if sel is None:
            break
        _, u, t_idx, pos = sel
        out.tours[t_idx].visits.insert(pos, u)
        todo.remove(u)
    return out, todo
