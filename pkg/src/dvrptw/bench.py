"""Batch running, aggregation and reporting.

One seed produces one :class:`RunReport`; a batch over seeds aggregates
into min/avg/max/sample-stdev rows plus the percentage increase of the
dynamic minima over a static reference.  The rank-sum test is the
two-sided Mann-Whitney U with midranks, tie correction and continuity
correction under the normal approximation.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .instance_io import (DynamicityProfile, ProblemInstance, parse_instance,
                          parse_sidecar, with_available_times)
from .planner import PlannerConfig, run_working_day, serialize_events

__all__ = [
    "RunReport",
    "AggregateStats",
    "run_batch",
    "aggregate",
    "rank_sum_test",
    "emit_csv",
    "parse_csv",
    "emit_table",
]

CSV_HEADER = ("instance,dynamicity,seed,nv,td_unscaled,"
              "feasible_solutions,duration_s")


@dataclass(frozen=True)
class RunReport:
    """One working day's outcome, in original time units."""

    instance: str
    dynamicity: float
    seed: int
    nv: int
    td_unscaled: float
    feasible_solutions: int
    duration_s: float
    hard_infeasible: tuple[int, ...] = ()
    event_log: str = ""


@dataclass(frozen=True)
class AggregateStats:
    """Batch summary; increase percentages are against a static batch."""

    instance: str
    dynamicity: float
    runs: int
    nv_min: int
    nv_avg: float
    nv_max: int
    nv_std: float
    td_min: float
    td_avg: float
    td_max: float
    td_std: float
    increase_nv_pct: float | None = None
    increase_td_pct: float | None = None


def load_instance(path: str | os.PathLike,
                  sidecar: str | os.PathLike | None = None,
                  ) -> ProblemInstance:
    """Read an instance file, attaching sidecar disclosure times if given."""
    inst = parse_instance(Path(path).read_text())
    if sidecar is not None:
        inst = with_available_times(inst,
                                    parse_sidecar(Path(sidecar).read_text()))
    return inst


def run_batch(inst: ProblemInstance, seeds: Sequence[int],
              config: PlannerConfig,
              event_dir: str | os.PathLike | None = None,
              ) -> list[RunReport]:
    """One working day per seed; event logs land in ``event_dir``.

    Runs are independent: each gets its own seed-derived random stream,
    so they can execute in any order (or on separate hosts) and merge.
    """
    level = DynamicityProfile.of(inst).level
    out: list[RunReport] = []
    for seed in seeds:
        cfg = replace(config, seed=int(seed))
        t0 = time.monotonic()
        day = run_working_day(inst, cfg)
        dur = time.monotonic() - t0
        event_path = ""
        if event_dir is not None:
            event_path = str(Path(event_dir)
                             / f"{inst.name}-seed{int(seed)}.events")
            Path(event_path).parent.mkdir(parents=True, exist_ok=True)
            Path(event_path).write_text(serialize_events(day.events))
        out.append(RunReport(
            instance=inst.name, dynamicity=level, seed=int(seed),
            nv=day.nv, td_unscaled=day.td_unscaled,
            feasible_solutions=day.feasible_count, duration_s=dur,
            hard_infeasible=tuple(day.hard_infeasible),
            event_log=event_path))
    return out


def _sample_std(values: Sequence[float]) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))


def aggregate(reports: Sequence[RunReport],
              static_ref: Sequence[RunReport] | None = None,
              ) -> AggregateStats:
    """Summarise a batch; order of reports never matters.

    With a static reference the minima are compared:
    ``increase% = (min_dynamic - min_static) / min_static * 100``.
    """
    if not reports:
        raise ValueError("cannot aggregate an empty batch")
    nvs = [r.nv for r in reports]
    tds = [r.td_unscaled for r in reports]
    inc_nv = inc_td = None
    if static_ref:
        ref_nv = min(r.nv for r in static_ref)
        ref_td = min(r.td_unscaled for r in static_ref)
        if ref_nv > 0:
            inc_nv = (min(nvs) - ref_nv) / ref_nv * 100.0
        if ref_td > 0:
            inc_td = (min(tds) - ref_td) / ref_td * 100.0
    return AggregateStats(
        instance=reports[0].instance,
        dynamicity=reports[0].dynamicity,
        runs=len(reports),
        nv_min=min(nvs), nv_avg=sum(nvs) / len(nvs), nv_max=max(nvs),
        nv_std=_sample_std(nvs),
        td_min=min(tds), td_avg=sum(tds) / len(tds), td_max=max(tds),
        td_std=_sample_std(tds),
        increase_nv_pct=inc_nv, increase_td_pct=inc_td)


def rank_sum_test(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided Mann-Whitney U p-value via the normal approximation.

    Midranks handle ties, the variance carries the tie correction and a
    0.5 continuity correction is applied.  Identical samples (zero
    variance) give p = 1.  Both sides need at least two values.
    """
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise ValueError("rank-sum test needs at least two values per side")
    combined = sorted((v, 0 if k < n1 else 1)
                      for k, v in enumerate(list(a) + list(b)))
    n = n1 + n2
    ranks = [0.0] * n
    tie_term = 0.0
    i = 0
    while i < n:
        j = i
        while j + 1 < n and combined[j + 1][0] == combined[i][0]:
            j += 1
        mid = (i + j) / 2 + 1.0
        for k in range(i, j + 1):
            ranks[k] = mid
        t = j - i + 1
        if t > 1:
            tie_term += t ** 3 - t
        i = j + 1
    r1 = sum(rank for rank, (_, side) in zip(ranks, combined) if side == 0)
    u1 = r1 - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return 1.0
    num = abs(u1 - mu) - 0.5
    if num < 0:
        num = 0.0
    z = num / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


# ---------------------------------------------------------------------------
# output formats


def emit_csv(reports: Iterable[RunReport]) -> str:
    lines = [CSV_HEADER]
    for r in reports:
        lines.append(
            f"{r.instance},{r.dynamicity:g},{r.seed},{r.nv},"
            f"{r.td_unscaled:.6f},{r.feasible_solutions},"
            f"{r.duration_s:.3f}")
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[RunReport]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unrecognised report CSV header")
    out = []
    for ln in lines[1:]:
        toks = ln.split(",")
        if len(toks) != 7:
            raise ValueError(f"bad report row: {ln!r}")
        out.append(RunReport(
            instance=toks[0], dynamicity=float(toks[1]), seed=int(toks[2]),
            nv=int(toks[3]), td_unscaled=float(toks[4]),
            feasible_solutions=int(toks[5]), duration_s=float(toks[6])))
    return out


def emit_table(rows: Sequence[AggregateStats]) -> str:
    """Fixed-width summary table, one aggregate per row."""
    head = (f"{'instance':<14}{'dyn':>5}{'runs':>6}"
            f"{'nv_min':>8}{'nv_avg':>8}{'nv_max':>8}{'nv_std':>8}"
            f"{'td_min':>11}{'td_avg':>11}{'td_max':>11}{'td_std':>10}"
            f"{'dNV%':>8}{'dTD%':>8}")
    lines = [head, "-" * len(head)]
    for r in rows:
        inc_nv = f"{r.increase_nv_pct:.2f}" if r.increase_nv_pct is not None else "-"
        inc_td = f"{r.increase_td_pct:.2f}" if r.increase_td_pct is not None else "-"
        lines.append(
            f"{r.instance:<14}{r.dynamicity:>5.2f}{r.runs:>6}"
            f"{r.nv_min:>8}{r.nv_avg:>8.2f}{r.nv_max:>8}{r.nv_std:>8.2f}"
            f"{r.td_min:>11.3f}{r.td_avg:>11.3f}{r.td_max:>11.3f}"
            f"{r.td_std:>10.3f}{inc_nv:>8}{inc_td:>8}")
    return "\n".join(lines) + "\n"
