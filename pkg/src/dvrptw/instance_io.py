"""Problem-instance model, text formats and the day-length rescaling step.

Two on-disk layouts are understood: the classic static benchmark table
(name header, vehicle block, customer block with seven numeric columns) and
an extended variant that appends an AVAILABLE TIME column carrying each
request's disclosure time.  Disclosure times can also ride in a sidecar file
of ``id value`` pairs next to a static instance.

Instances are immutable; rescaling to a working day returns a fresh object
whose times and distance matrix are multiplied by ``s_v = t_wd / (l0 - e0)``
while coordinates and the raw geometry stay recoverable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Mapping

import numpy as np

__all__ = [
    "Customer",
    "ProblemInstance",
    "DynamicityProfile",
    "FormatError",
    "parse_instance",
    "serialize_instance",
    "parse_sidecar",
    "serialize_sidecar",
    "with_available_times",
    "scale_instance",
    "unscale_instance",
    "generate_available_times",
    "make_dynamic_variant",
    "dynamicity_from_name",
]

STATIC_FORMAT = "static_solomon"
EXTENDED_FORMAT = "dvrptw_extended"


class FormatError(ValueError):
    """Malformed instance or sidecar text; message cites the line number."""


@dataclass(frozen=True)
class Customer:
    """One node of the problem; node 0 is the depot."""

    id: int
    x: float
    y: float
    demand: int
    ready: float
    due: float
    service: float
    available: float = 0.0


@dataclass(frozen=True)
class ProblemInstance:
    """A routing instance, immutable once constructed.

    ``customers`` is depot-first.  ``scale`` is 1.0 for an instance in its
    original time units and ``s_v`` after rescaling; ``work_day`` is the
    rescaled horizon length in seconds (None while unscaled).
    ``n_vehicles_max`` is carried through from the file header but the
    solver treats the fleet as unbounded.
    """

    name: str
    customers: tuple[Customer, ...]
    vehicle_capacity: int
    n_vehicles_max: int
    scale: float = 1.0
    work_day: float | None = None

    def __post_init__(self) -> None:
        if not self.customers:
            raise ValueError("instance needs at least a depot node")
        depot = self.customers[0]
        if depot.demand != 0 or depot.service != 0 or depot.available != 0:
            raise ValueError("depot must have zero demand, service and "
                             "available time")
        for c in self.customers:
            if c.ready > c.due:
                raise ValueError(
                    f"customer {c.id}: ready time {c.ready} after due "
                    f"time {c.due}")

    # -- basic shape ----------------------------------------------------

    @property
    def n(self) -> int:
        """Node count including the depot."""
        return len(self.customers)

    @property
    def n_customers(self) -> int:
        return len(self.customers) - 1

    @property
    def depot(self) -> Customer:
        return self.customers[0]

    @property
    def horizon(self) -> tuple[float, float]:
        return (self.customers[0].ready, self.customers[0].due)

    @property
    def s_v(self) -> float:
        return self.scale

    # -- geometry -------------------------------------------------------

    @cached_property
    def xy(self) -> np.ndarray:
        out = np.empty((self.n, 2), dtype=np.float64)
        for i, c in enumerate(self.customers):
            out[i, 0] = c.x
            out[i, 1] = c.y
        out.setflags(write=False)
        return out

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """Pairwise travel times at the instance's current time scale."""
        xy = self.xy
        diff = xy[:, None, :] - xy[None, :, :]
        base = np.sqrt((diff * diff).sum(axis=2))
        if self.scale != 1.0:
            base = base * self.scale
        base.setflags(write=False)
        return base

    def distance(self, i: int, j: int) -> float:
        """Travel time between nodes at the current scale, full precision."""
        return float(self.distance_matrix[i, j])

    def unscaled_distance(self, i: int, j: int) -> float:
        a = self.customers[i]
        b = self.customers[j]
        return math.hypot(a.x - b.x, a.y - b.y)

    # -- kernel views ---------------------------------------------------

    @cached_property
    def arrays(self) -> "InstanceArrays":
        cs = self.customers
        n = self.n
        e = np.array([c.ready for c in cs], dtype=np.float64)
        l = np.array([c.due for c in cs], dtype=np.float64)
        s = np.array([c.service for c in cs], dtype=np.float64)
        dem = np.array([c.demand for c in cs], dtype=np.int64)
        avail = np.array([c.available for c in cs], dtype=np.float64)
        for a in (e, l, s, dem, avail):
            a.setflags(write=False)
        return InstanceArrays(
            D=self.distance_matrix, e=e, l=l, s=s, dem=dem, avail=avail,
            cap=self.vehicle_capacity, n=n)


@dataclass(frozen=True)
class InstanceArrays:
    """Flat numpy views of one instance, ready for the compiled kernels."""

    D: np.ndarray
    e: np.ndarray
    l: np.ndarray
    s: np.ndarray
    dem: np.ndarray
    avail: np.ndarray
    cap: int
    n: int


@dataclass(frozen=True)
class DynamicityProfile:
    """Which customers are disclosed during the day rather than a priori."""

    dynamic_ids: tuple[int, ...]
    n_customers: int

    @property
    def level(self) -> float:
        if self.n_customers == 0:
            return 0.0
        return len(self.dynamic_ids) / self.n_customers

    @classmethod
    def of(cls, inst: ProblemInstance) -> "DynamicityProfile":
        ids = tuple(c.id for c in inst.customers[1:] if c.available > 0)
        return cls(dynamic_ids=ids, n_customers=inst.n_customers)


# ---------------------------------------------------------------------------
# parsing


_NUM = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _to_number(tok: str, lineno: int) -> float:
    if not _NUM.match(tok):
        raise FormatError(f"line {lineno}: expected a number, got {tok!r}")
    return float(tok)


def parse_instance(text: str, fmt: str = "auto") -> ProblemInstance:
    """Parse instance text into an unscaled :class:`ProblemInstance`.

    ``fmt`` is ``static_solomon``, ``dvrptw_extended`` or ``auto`` to pick
    by the customer-table header.  All structural problems raise
    :class:`FormatError` naming the offending line.
    """
    if fmt not in ("auto", STATIC_FORMAT, EXTENDED_FORMAT):
        raise ValueError(f"unknown format {fmt!r}")
    lines = text.splitlines()
    name = ""
    vehicle_line = -1
    header_line = -1
    extended = fmt == EXTENDED_FORMAT
    for idx, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if not name:
            name = stripped
            continue
        upper = stripped.upper()
        if "NUMBER" in upper and "CAPACITY" in upper:
            vehicle_line = idx
            continue
        if upper.startswith("CUST"):
            header_line = idx
            if len(stripped.split()) == 1:
                continue  # bare CUSTOMER section title; column header follows
            if fmt == "auto":
                extended = "AVAILABLE" in upper
            elif fmt == EXTENDED_FORMAT and "AVAILABLE" not in upper:
                raise FormatError(
                    f"line {idx}: extended format requires an AVAILABLE "
                    "TIME column")
            break
    if not name:
        raise FormatError("line 1: missing instance name")
    if vehicle_line < 0:
        raise FormatError("line 1: missing NUMBER/CAPACITY vehicle header")
    if header_line < 0:
        raise FormatError("line 1: missing customer table header")

    n_veh = capacity = None
    for idx in range(vehicle_line, header_line):
        stripped = lines[idx].strip()
        if not stripped:
            continue
        toks = stripped.split()
        if len(toks) != 2 or not _NUM.match(toks[0]) or not _NUM.match(toks[1]):
            raise FormatError(
                f"line {idx + 1}: expected vehicle count and capacity, "
                f"got {stripped!r}")
        n_veh = int(_to_number(toks[0], idx + 1))
        capacity = int(_to_number(toks[1], idx + 1))
        break
    if capacity is None:
        raise FormatError(
            f"line {vehicle_line}: no vehicle count/capacity row found "
            "after header")

    want = 8 if extended else 7
    rows: list[Customer] = []
    for idx in range(header_line, len(lines)):
        stripped = lines[idx].strip()
        lineno = idx + 1
        if not stripped:
            continue
        toks = stripped.split()
        if not rows and not _NUM.match(toks[0]):
            continue  # header continuation before the first data row
        if not _NUM.match(toks[0]):
            raise FormatError(
                f"line {lineno}: expected a customer row, got {stripped!r}")
        if len(toks) != want:
            raise FormatError(
                f"line {lineno}: expected {want} columns, got {len(toks)}")
        vals = [_to_number(t, lineno) for t in toks]
        cid = int(vals[0])
        if vals[0] != cid:
            raise FormatError(f"line {lineno}: customer id must be integral")
        if cid != len(rows):
            raise FormatError(
                f"line {lineno}: customer ids must run 0, 1, 2, ... in "
                f"order; got {cid}")
        demand = vals[3]
        if demand != int(demand) or demand < 0:
            raise FormatError(
                f"line {lineno}: demand must be a non-negative integer")
        ready, due, service = vals[4], vals[5], vals[6]
        if ready > due:
            raise FormatError(
                f"line {lineno}: ready time {ready:g} after due time "
                f"{due:g}")
        if service < 0:
            raise FormatError(f"line {lineno}: negative service time")
        available = vals[7] if extended else 0.0
        if available < 0:
            raise FormatError(f"line {lineno}: negative available time")
        if not rows:
            if cid != 0:
                raise FormatError(
                    f"line {lineno}: first row must be the depot (id 0)")
            if demand != 0 or service != 0 or available != 0:
                raise FormatError(
                    "line %d: depot must have zero demand, service and "
                    "available time" % lineno)
        rows.append(Customer(
            id=cid, x=vals[1], y=vals[2], demand=int(demand),
            ready=ready, due=due, service=service, available=available))
    if not rows:
        raise FormatError(
            f"line {header_line}: customer table has no data rows")
    return ProblemInstance(
        name=name, customers=tuple(rows), vehicle_capacity=capacity,
        n_vehicles_max=n_veh if n_veh is not None else 0)


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return format(v, ".10g")


def serialize_instance(inst: ProblemInstance, extended: bool | None = None) -> str:
    """Render an instance back to its text form.

    When ``extended`` is None the AVAILABLE TIME column appears exactly if
    any customer has a positive available time, so parse/serialize/parse
    is an identity in either layout.
    """
    if extended is None:
        extended = any(c.available > 0 for c in inst.customers)
    out = [inst.name, "", "VEHICLE", "NUMBER     CAPACITY",
           f"{inst.n_vehicles_max:>4}{inst.vehicle_capacity:>12}", "",
           "CUSTOMER"]
    head = ("CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME   "
            "DUE DATE   SERVICE TIME")
    if extended:
        head += "   AVAILABLE TIME"
    out.append(head)
    out.append("")
    for c in inst.customers:
        row = (f"{c.id:>5}{_fmt_num(c.x):>10}{_fmt_num(c.y):>10}"
               f"{c.demand:>10}{_fmt_num(c.ready):>12}{_fmt_num(c.due):>11}"
               f"{_fmt_num(c.service):>13}")
        if extended:
            row += f"{_fmt_num(c.available):>15}"
        out.append(row)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# sidecar disclosure times


def parse_sidecar(text: str) -> dict[int, float]:
    """Parse ``id available_time`` pairs; '#' starts a comment."""
    out: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        toks = stripped.split()
        if len(toks) != 2:
            raise FormatError(
                f"line {lineno}: expected 'id available_time', got "
                f"{stripped!r}")
        cid = _to_number(toks[0], lineno)
        if cid != int(cid):
            raise FormatError(f"line {lineno}: customer id must be integral")
        val = _to_number(toks[1], lineno)
        if val < 0:
            raise FormatError(f"line {lineno}: negative available time")
        if int(cid) in out:
            raise FormatError(f"line {lineno}: duplicate id {int(cid)}")
        out[int(cid)] = val
    return out


def serialize_sidecar(times: Mapping[int, float]) -> str:
    lines = [f"{cid} {_fmt_num(times[cid])}" for cid in sorted(times)]
    return "\n".join(lines) + ("\n" if lines else "")


def with_available_times(inst: ProblemInstance,
                         times: Mapping[int, float]) -> ProblemInstance:
    """Attach disclosure times to a (typically static) instance."""
    ids = {c.id for c in inst.customers}
    for cid, val in times.items():
        if cid not in ids:
            raise ValueError(f"unknown customer id {cid} in sidecar")
        if cid == 0:
            raise ValueError("depot cannot have an available time")
        if val < 0:
            raise ValueError(f"customer {cid}: negative available time")
    new = tuple(
        replace(c, available=float(times.get(c.id, c.available)))
        if c.id != 0 else c
        for c in inst.customers)
    return replace(inst, customers=new)


# ---------------------------------------------------------------------------
# rescaling


def scale_instance(inst: ProblemInstance, t_wd: float) -> ProblemInstance:
    """Rescale an unscaled instance so its horizon spans ``t_wd`` seconds.

    Every time quantity (windows, service, disclosure times) and the
    travel-time matrix are multiplied by ``s_v``.
    """
    if inst.scale != 1.0:
        raise ValueError("instance is already scaled; unscale it first")
    e0, l0 = inst.horizon
    span = l0 - e0
    if span <= 0:
        raise ValueError(
            f"degenerate horizon [{e0:g}, {l0:g}]: cannot rescale")
    if t_wd <= 0:
        raise ValueError("working day length must be positive")
    s_v = t_wd / span
    scaled = tuple(
        replace(c, ready=c.ready * s_v, due=c.due * s_v,
                service=c.service * s_v, available=c.available * s_v)
        for c in inst.customers)
    return replace(inst, customers=scaled, scale=s_v, work_day=float(t_wd))


def unscale_instance(inst: ProblemInstance) -> ProblemInstance:
    """Invert :func:`scale_instance`."""
    if inst.scale == 1.0:
        return inst
    s_v = inst.scale
    raw = tuple(
        replace(c, ready=c.ready / s_v, due=c.due / s_v,
                service=c.service / s_v, available=c.available / s_v)
        for c in inst.customers)
    return replace(inst, customers=raw, scale=1.0, work_day=None)


# ---------------------------------------------------------------------------
# dynamic-variant generation


def generate_available_times(inst: ProblemInstance, level: float,
                             seed: int) -> dict[int, float]:
    """Draw disclosure times for a fraction ``level`` of the customers.

    Exactly ``round(level * n_customers)`` ids, chosen by a seeded
    generator, receive an integer available time drawn uniformly from
    ``[1, max(1, ready_time)]``; everyone else stays a priori.  Bounding
    the draw by the ready time means a request is always disclosed before
    its window opens, so a request can arrive late in the day yet never
    arrives already expired.  The instance must be unscaled.
    """
    if inst.scale != 1.0:
        raise ValueError("generate from the unscaled instance")
    if not 0.0 <= level <= 1.0:
        raise ValueError("dynamicity level must lie in [0, 1]")
    count = round(level * inst.n_customers)
    rng = np.random.default_rng(seed)
    ids = [c.id for c in inst.customers[1:]]
    chosen = rng.choice(len(ids), size=count, replace=False)
    picked = sorted(ids[int(k)] for k in chosen)
    out = {}
    for cid in picked:
        hi = max(1, int(inst.customers[cid].ready))
        out[cid] = float(rng.integers(1, hi + 1))
    return out


def make_dynamic_variant(inst: ProblemInstance, level: float,
                         seed: int) -> ProblemInstance:
    """Instance copy named ``<base>-<level>`` with drawn disclosure times."""
    times = generate_available_times(inst, level, seed)
    out = with_available_times(inst, times)
    return replace(out, name=f"{inst.name}-{_fmt_level(level)}")


def _fmt_level(level: float) -> str:
    if level == int(level):
        return f"{level:.1f}"
    return f"{level:g}"


def dynamicity_from_name(name: str) -> float:
    """Declared dynamicity from a ``<base>-<level>`` instance name."""
    m = re.search(r"-(\d+(?:\.\d+)?)$", name.strip())
    if not m:
        return 0.0
    return float(m.group(1))
