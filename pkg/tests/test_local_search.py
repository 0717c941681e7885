import itertools

import pytest

from dvrptw import (Solution, Tour, audit_solution, evaluate_solution,
                    exchange_move, iterate_local_search,
                    nearest_neighbour_solution, relocate_move,
                    serialize_solution)

from conftest import make_instance, random_instance


@pytest.fixture
def line():
    """Three unit-demand customers on a line, wide windows, capacity 3."""
    return make_instance([
        (1, 0, 1, 0, 90, 0),
        (2, 0, 1, 0, 90, 0),
        (3, 0, 1, 0, 90, 0),
    ], cap=3)


def test_relocate_applies_first_improving_move(line):
    sol = Solution([Tour([1, 2]), Tour([3])])
    out, rec = relocate_move(line, sol)
    assert [t.visits for t in out.tours] == [[1], [2, 3]]
    assert rec.kind == "relocate"
    assert rec.source == (0, 1) and rec.target == (1, 0)
    assert rec.delta_distance == -2.0 and rec.delta_vehicles == 0
    # moving the now-lone customer 1 empties its tour: a vehicle win is
    # accepted even though the distance is unchanged by the detour math
    out2, rec2 = relocate_move(line, out)
    assert [t.visits for t in out2.tours] == [[1, 2, 3]]
    assert rec2.delta_vehicles == -1
    assert relocate_move(line, out2) is None   # single tour: nothing inter


def test_relocate_respects_committed_prefix(line):
    sol = Solution([Tour([2, 1], committed=2), Tour([3])])
    out, rec = relocate_move(line, sol)
    # the frozen pair cannot move and nothing may slot in before it, so the
    # first legal move grafts 3 after the prefix and drops its tour
    assert [t.visits for t in out.tours] == [[2, 1, 3]]
    assert rec.source == (1, 0) and rec.target == (0, 2)
    assert rec.delta_vehicles == -1
    assert out.tours[0].committed == 2
    assert audit_solution(line, out, {1, 2, 3},
                          expected_prefixes=[(2, 1)]).ok


def test_exchange_applies_first_improving_swap(line):
    sol = Solution([Tour([1, 2]), Tour([3])])
    out, rec = exchange_move(line, sol)
    assert [t.visits for t in out.tours] == [[3, 2], [1]]
    assert rec.kind == "exchange"
    assert rec.source == (0, 0) and rec.target == (1, 0)
    assert rec.delta_distance == -2.0 and rec.delta_vehicles == 0
    ev = evaluate_solution(line, out)
    assert ev.feasible and ev.distance == 8.0


def test_exchange_never_touches_committed_visits(line):
    # identical layout, but the profitable swap partner is frozen
    sol = Solution([Tour([1, 2], committed=1), Tour([3])])
    assert exchange_move(line, sol) is None


def test_iterate_reaches_move_free_fixpoint(line):
    sol = Solution([Tour([1, 2]), Tour([3])])
    out = iterate_local_search(line, sol)
    assert [t.visits for t in out.tours] == [[1, 2, 3]]
    ev = evaluate_solution(line, out)
    assert (ev.nv, ev.distance) == (1, 6.0)
    assert relocate_move(line, out) is None
    assert exchange_move(line, out) is None
    again = iterate_local_search(line, out)
    assert serialize_solution(line, again) == serialize_solution(line, out)


def test_iterate_handles_empty_solution(line):
    out = iterate_local_search(line, Solution())
    assert out.tours == []


def _brute_relocates(sol):
    """Every way to move one uncommitted customer into another tour."""
    tours = [list(t.visits) for t in sol.tours]
    for t1, row1 in enumerate(tours):
        for p1 in range(sol.tours[t1].committed, len(row1)):
            for t2, row2 in enumerate(tours):
                if t2 == t1:
                    continue
                for p2 in range(sol.tours[t2].committed, len(row2) + 1):
                    new = [list(r) for r in tours]
                    u = new[t1].pop(p1)
                    new[t2].insert(p2, u)
                    yield Solution([
                        Tour(r, sol.tours[k].committed)
                        for k, r in enumerate(new) if r])


def _brute_exchanges(sol):
    tours = [list(t.visits) for t in sol.tours]
    for t1, t2 in itertools.combinations(range(len(tours)), 2):
        for p1 in range(sol.tours[t1].committed, len(tours[t1])):
            for p2 in range(sol.tours[t2].committed, len(tours[t2])):
                new = [list(r) for r in tours]
                new[t1][p1], new[t2][p2] = new[t2][p2], new[t1][p1]
                yield Solution([
                    Tour(r, sol.tours[k].committed)
                    for k, r in enumerate(new)])


def test_fixpoint_admits_no_improving_move_brute_force(seeded_rng):
    for trial in range(40):
        inst = random_instance(seeded_rng, n=seeded_rng.randint(5, 9),
                               name=f"bf{trial}")
        start = nearest_neighbour_solution(inst)
        out = iterate_local_search(inst, start)
        ev = evaluate_solution(inst, out)
        assert ev.feasible
        for cand in itertools.chain(_brute_relocates(out),
                                    _brute_exchanges(out)):
            cev = evaluate_solution(inst, cand)
            if not cev.feasible:
                continue
            better = cev.nv < ev.nv or (cev.nv == ev.nv
                                        and cev.distance < ev.distance - 1e-6)
            assert not better, (
                f"{inst.name}: missed move to "
                f"{[t.visits for t in cand.tours]}")


def test_moves_improve_lexicographically_and_stay_feasible(seeded_rng):
    for trial in range(15):
        inst = random_instance(seeded_rng, n=14, name=f"chain{trial}")
        sol = nearest_neighbour_solution(inst)
        expected = set(range(1, inst.n))
        for _ in range(300):
            before = evaluate_solution(inst, sol)
            step = relocate_move(inst, sol) or exchange_move(inst, sol)
            if step is None:
                break
            sol, rec = step
            after = evaluate_solution(inst, sol)
            assert audit_solution(inst, sol, expected).ok
            assert rec.delta_vehicles == after.nv - before.nv
            assert rec.delta_distance == pytest.approx(
                after.distance - before.distance, abs=1e-9)
            assert rec.delta_vehicles < 0 or (
                rec.delta_vehicles == 0 and rec.delta_distance < 0)
        else:
            pytest.fail("local search failed to terminate")
        assert relocate_move(inst, sol) is None
        assert exchange_move(inst, sol) is None


def test_iterate_preserves_committed_prefixes(seeded_rng):
    for trial in range(10):
        inst = random_instance(seeded_rng, n=16, name=f"keep{trial}")
        nn = nearest_neighbour_solution(inst)
        frozen = Solution([
            Tour(list(t.visits), committed=min(1, len(t.visits)))
            for t in nn.tours])
        prefixes = [tuple(t.visits[:t.committed]) for t in frozen.tours
                    if t.committed]
        out = iterate_local_search(inst, frozen)
        rep = audit_solution(inst, out, set(range(1, inst.n)),
                             expected_prefixes=prefixes)
        assert rep.ok, rep.problems
