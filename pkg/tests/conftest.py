import math
import os
import random

import pytest

from dvrptw import Customer, ProblemInstance

DATA = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                    "data")


def data_path(name):
    return os.path.join(DATA, name)


def make_instance(customers, cap=30, horizon=(0.0, 100.0), name="toy",
                  n_vehicles=25):
    """Instance from (x, y, demand, ready, due, service[, available]) rows."""
    rows = [Customer(0, 0.0, 0.0, 0, horizon[0], horizon[1], 0.0)]
    for i, row in enumerate(customers, start=1):
        x, y, dem, e, l, s = row[:6]
        avail = row[6] if len(row) > 6 else 0.0
        rows.append(Customer(i, float(x), float(y), int(dem), float(e),
                             float(l), float(s), float(avail)))
    return ProblemInstance(name=name, customers=tuple(rows),
                           vehicle_capacity=cap, n_vehicles_max=n_vehicles)


def random_instance(rng, n=None, cap=None, name="rand", dynamic=False):
    """Small random instance that always admits a feasible solution.

    Windows are anchored at the depot->customer arrival, so a dedicated
    vehicle per customer is always feasible; richer routes usually are.
    """
    n = n if n is not None else rng.randint(3, 20)
    cap = cap if cap is not None else rng.randint(25, 60)
    horizon = 1000.0
    rows = []
    for i in range(n):
        x = rng.uniform(-40, 40)
        y = rng.uniform(-40, 40)
        dem = rng.randint(1, 20)
        d0 = math.hypot(x, y)
        e = d0 + rng.uniform(0, 300)
        width = rng.uniform(60, 400)
        l = min(e + width, horizon - d0 - 35)
        if l < e:
            e = max(0.0, l - 5)
        service = rng.uniform(0, 15)
        avail = float(rng.randint(1, max(1, int(e)))) if (
            dynamic and rng.random() < 0.5) else 0.0
        rows.append((x, y, dem, e, max(e, l), service, avail))
    biggest = max(r[2] for r in rows)
    return make_instance(rows, cap=max(cap, biggest), horizon=(0.0, horizon),
                         name=name)


@pytest.fixture
def toy():
    """Five customers around the origin with hand-checkable schedules."""
    return make_instance([
        (3, 4, 10, 6, 30, 2),     # 1: d(0,1) = 5
        (6, 8, 10, 10, 40, 2),    # 2: d(1,2) = 5, d(0,2) = 10
        (0, 10, 5, 0, 60, 2),     # 3: d(2,3) = sqrt(40), d(0,3) = 10
        (8, 0, 20, 12, 50, 2),    # 4: d(0,4) = 8
        (0, 20, 25, 30, 80, 2),   # 5: d(3,5) = 10, d(0,5) = 20
    ])


@pytest.fixture
def seeded_rng():
    return random.Random(0xDECADE)


ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance: full-budget benchmark gates (static batches hold the "
        "real-time clock for ~100 s per run; deselect with -m 'not "
        "acceptance' for quick iteration)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay the acceptance PASS/FAIL lines after the run summary."""
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
