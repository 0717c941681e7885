"""Inter-route local search: relocate and exchange, first improvement.

Moves never touch committed visits, never insert before a committed prefix
and accept only strict lexicographic gains: fewer vehicles, or equal
vehicles and strictly less distance.  A relocate that empties a tour drops
the tour on the spot, which is how vehicle-count improvements happen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .instance_io import ProblemInstance
from .routing_model import (Solution, arrays_to_solution, evaluate_solution,
                            solution_to_arrays)

__all__ = [
    "MoveRecord",
    "relocate_move",
    "exchange_move",
    "iterate_local_search",
]


@dataclass(frozen=True)
class MoveRecord:
    """One applied move: where it came from, where it went, what it won."""

    kind: str
    source: tuple[int, int]
    target: tuple[int, int]
    delta_distance: float
    delta_vehicles: int


class _Bufs:
    def __init__(self, inst: ProblemInstance, sol: Solution):
        arr = inst.arrays
        self.arr = arr
        self.tours, self.tlen, self.tcom, self.nt = solution_to_arrays(
            inst, sol)
        mt = inst.n + 1
        self.tload = np.zeros(mt, dtype=np.int64)
        self.btime = np.zeros((mt, inst.n), dtype=np.float64)
        K.refresh_caches(self.tours, self.tlen, self.nt, arr.D, arr.e,
                         arr.l, arr.s, arr.dem, arr.cap, self.tload,
                         self.btime)
        self.scratch_row = np.zeros(inst.n, dtype=np.int32)
        self.scratch_b = np.zeros(inst.n, dtype=np.float64)
        self.out_move = np.zeros(4, dtype=np.int64)


def relocate_move(inst: ProblemInstance, sol: Solution,
                  ) -> tuple[Solution, MoveRecord] | None:
    """Apply the first improving single-customer relocation.

    Scan order is deterministic: source tours ascending, positions
    ascending from the first uncommitted visit, then target tours and
    positions ascending.  Returns None when nothing improves.
    """
    before = evaluate_solution(inst, sol)
    b = _Bufs(inst, sol)
    hit, nt = K.relocate_once(
        b.tours, b.tlen, b.tcom, b.nt, b.arr.D, b.arr.e, b.arr.l, b.arr.s,
        b.arr.dem, b.arr.cap, b.tload, b.btime, b.out_move)
    if not hit:
        return None
    out = arrays_to_solution(b.tours, b.tlen, b.tcom, nt)
    after = evaluate_solution(inst, out)
    rec = MoveRecord(
        kind="relocate",
        source=(int(b.out_move[0]), int(b.out_move[1])),
        target=(int(b.out_move[2]), int(b.out_move[3])),
        delta_distance=after.distance - before.distance,
        delta_vehicles=after.nv - before.nv)
    return out, rec


def exchange_move(inst: ProblemInstance, sol: Solution,
                  ) -> tuple[Solution, MoveRecord] | None:
    """Apply the first improving swap of two customers across tours."""
    before = evaluate_solution(inst, sol)
    b = _Bufs(inst, sol)
    hit = K.exchange_once(
        b.tours, b.tlen, b.tcom, b.nt, b.arr.D, b.arr.e, b.arr.l, b.arr.s,
        b.arr.dem, b.arr.cap, b.tload, b.btime, b.scratch_row, b.scratch_b,
        b.out_move)
    if not hit:
        return None
    out = arrays_to_solution(b.tours, b.tlen, b.tcom, b.nt)
    after = evaluate_solution(inst, out)
    rec = MoveRecord(
        kind="exchange",
        source=(int(b.out_move[0]), int(b.out_move[1])),
        target=(int(b.out_move[2]), int(b.out_move[3])),
        delta_distance=after.distance - before.distance,
        delta_vehicles=after.nv - before.nv)
    return out, rec


def iterate_local_search(inst: ProblemInstance, sol: Solution) -> Solution:
    """Alternate relocate and exchange passes to a local optimum.

    Idempotent: running it on its own output applies no further move.
    """
    b = _Bufs(inst, sol)
    nt = K.ls_run(
        b.tours, b.tlen, b.tcom, b.nt, b.arr.D, b.arr.e, b.arr.l, b.arr.s,
        b.arr.dem, b.arr.cap, b.tload, b.btime, b.scratch_row, b.scratch_b,
        b.out_move)
    return arrays_to_solution(b.tours, b.tlen, b.tcom, nt)
