import math

import pytest

from dvrptw import (Solution, Tour, audit_solution, commit_prefix,
                    committed_prefixes, compare_solutions, evaluate_schedule,
                    evaluate_solution, arrays_to_solution, solution_to_arrays,
                    is_feasible_insertion, parse_solution, scale_instance,
                    serialize_solution)

from conftest import make_instance

SQ40 = math.sqrt(40.0)    # d(2,3) in the toy fixture
SQ265 = math.sqrt(265.0)  # d(5,1)
SQ464 = math.sqrt(464.0)  # d(4,5)


def test_schedule_waits_at_early_arrivals(toy):
    ev = evaluate_schedule(toy, [1, 2, 3])
    assert ev.begin == pytest.approx((6.0, 13.0, 15.0 + SQ40), abs=1e-12)
    assert ev.waiting == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)
    assert ev.late == (False, False, False)
    assert ev.return_time == pytest.approx(17.0 + SQ40 + 10.0, abs=1e-12)
    assert not ev.return_late
    assert ev.load == 25 and not ev.overloaded
    assert ev.distance == pytest.approx(20.0 + SQ40, abs=1e-12)
    assert ev.feasible


def test_schedule_single_visits(toy):
    ev4 = evaluate_schedule(toy, [4])
    assert ev4.begin == (12.0,) and ev4.waiting == (4.0,)
    assert ev4.return_time == 22.0 and ev4.distance == 16.0
    ev5 = evaluate_schedule(toy, [5])
    assert ev5.begin == (30.0,) and ev5.waiting == (10.0,)
    assert ev5.return_time == 52.0 and ev5.distance == 40.0
    assert ev4.feasible and ev5.feasible


def test_schedule_flags_missed_window(toy):
    ev = evaluate_schedule(toy, [5, 1])
    assert ev.begin == pytest.approx((30.0, 32.0 + SQ265), abs=1e-12)
    assert ev.late == (False, True)
    assert not ev.feasible


def test_schedule_flags_overload(toy):
    ev = evaluate_schedule(toy, [4, 5])
    assert ev.begin == pytest.approx((12.0, 14.0 + SQ464), abs=1e-12)
    assert ev.late == (False, False)
    assert ev.load == 45 and ev.overloaded
    assert not ev.feasible


def test_schedule_flags_late_depot_return():
    inst = make_instance([(0, 20, 25, 30, 80, 2)], horizon=(0.0, 50.0))
    ev = evaluate_schedule(inst, [1])
    assert ev.return_time == 52.0
    assert ev.return_late and not ev.feasible


def test_schedule_empty_tour(toy):
    ev = evaluate_schedule(toy, [])
    assert ev.begin == () and ev.distance == 0.0 and ev.load == 0
    assert ev.return_time == 0.0 and ev.feasible


def test_solution_eval_aggregates(toy):
    sol = Solution([Tour([1, 2, 3]), Tour([4]), Tour([]), Tour([5])])
    ev = evaluate_solution(toy, sol)
    assert ev.nv == 3
    assert ev.distance == pytest.approx(76.0 + SQ40, abs=1e-12)
    assert ev.feasible
    assert sol.nv == 3
    assert sorted(sol.customers()) == [1, 2, 3, 4, 5]


def test_insertion_checks_whole_downstream(toy):
    assert is_feasible_insertion(toy, Tour([1, 2]), 2, 3)
    assert is_feasible_insertion(toy, Tour([1, 2]), 0, 3)
    # 5 first makes customer 1 miss its due time downstream
    assert not is_feasible_insertion(toy, Tour([1, 2]), 0, 5)
    # feasible in time, infeasible in load
    assert not is_feasible_insertion(toy, Tour([1, 2, 3]), 1, 4)
    # committed prefix is untouchable, out-of-range positions rejected
    assert not is_feasible_insertion(toy, Tour([1, 2], committed=1), 0, 3)
    assert not is_feasible_insertion(toy, Tour([1, 2]), 3, 3)


def test_compare_is_lexicographic(toy):
    a = Solution([Tour([1, 2, 3]), Tour([4]), Tour([5])])
    fewer = Solution([Tour([1, 2, 3]), Tour([4, 5])])
    longer = Solution([Tour([2, 1, 3]), Tour([4]), Tour([5])])
    assert compare_solutions(toy, a, fewer) == 1
    assert compare_solutions(toy, fewer, a) == -1
    assert compare_solutions(toy, a, longer) == -1
    assert compare_solutions(toy, a, a.copy()) == 0


def test_commit_prefix_grows_only():
    t = Tour([1, 2, 3])
    commit_prefix(t, 2)
    assert t.committed == 2
    commit_prefix(t, 2)
    with pytest.raises(ValueError):
        commit_prefix(t, 1)
    with pytest.raises(ValueError):
        commit_prefix(t, 4)
    sol = Solution([t, Tour([4]), Tour([5])])
    assert committed_prefixes(sol) == [(1, 2)]


def test_serialize_solution_header_and_marker(toy):
    sol = Solution([Tour([1, 2, 3], committed=2), Tour([4]), Tour([5])])
    text = serialize_solution(toy, sol)
    lines = text.strip().splitlines()
    assert lines[0] == "NV 3 TD %.6f" % (76.0 + SQ40)
    assert lines[1] == "1 2 | 3"
    again = parse_solution(text)
    assert [t.visits for t in again.tours] == [[1, 2, 3], [4], [5]]
    assert [t.committed for t in again.tours] == [2, 0, 0]


def test_serialize_reports_unscaled_distance(toy):
    scaled = scale_instance(toy, t_wd=50.0)
    sol = Solution([Tour([1, 2, 3]), Tour([4]), Tour([5])])
    header = serialize_solution(scaled, sol).splitlines()[0]
    assert header == "NV 3 TD %.6f" % (76.0 + SQ40)


def test_parse_solution_rejects_missing_header():
    with pytest.raises(ValueError):
        parse_solution("1 2 3\n")


def test_array_bridge_round_trip(toy):
    sol = Solution([Tour([1, 2, 3], committed=1), Tour([]), Tour([4, 5])])
    tours, tlen, tcom, nt = solution_to_arrays(toy, sol)
    assert nt == 2
    assert list(tours[0, :3]) == [1, 2, 3] and tlen[0] == 3 and tcom[0] == 1
    back = arrays_to_solution(tours, tlen, tcom, nt)
    assert [t.visits for t in back.tours] == [[1, 2, 3], [4, 5]]
    assert [t.committed for t in back.tours] == [1, 0]


def test_audit_accepts_good_solution(toy):
    sol = Solution([Tour([1, 2, 3]), Tour([4]), Tour([5])])
    rep = audit_solution(toy, sol, required={1, 2, 3, 4, 5})
    assert rep.ok and rep.problems == ()


@pytest.mark.parametrize("tours, required, phrase", [
    ([[1, 2], [4], [5]], {1, 2, 3, 4, 5}, "unrouted"),
    ([[1, 2, 3], [4], [5], [3]], {1, 2, 3, 4, 5}, "more than once"),
    ([[1, 2, 3], [4], [5]], {1, 2, 3, 4}, "unexpected"),
    ([[4, 5], [1, 2, 3]], {1, 2, 3, 4, 5}, "exceeds capacity"),
])
def test_audit_names_each_violation(toy, tours, required, phrase):
    sol = Solution([Tour(list(v)) for v in tours])
    rep = audit_solution(toy, sol, required=required)
    assert not rep.ok
    assert any(phrase in p for p in rep.problems), rep.problems


def test_audit_flags_missed_window_and_late_return():
    inst = make_instance([(0, 10, 5, 0, 5, 0), (0, 30, 5, 0, 80, 0)],
                         horizon=(0.0, 55.0))
    rep = audit_solution(inst, Solution([Tour([1]), Tour([2])]), {1, 2})
    assert not rep.ok
    assert any("due time" in p for p in rep.problems)
    assert any("returns after" in p for p in rep.problems)


def test_audit_checks_prefix_preservation(toy):
    sol = Solution([Tour([1, 2, 3], committed=2), Tour([4]), Tour([5])])
    ok = audit_solution(toy, sol, {1, 2, 3, 4, 5},
                        expected_prefixes=[(1, 2)])
    assert ok.ok
    mangled = audit_solution(toy, sol, {1, 2, 3, 4, 5},
                             expected_prefixes=[(1, 3)])
    assert not mangled.ok
    gone = audit_solution(toy, sol, {1, 2, 3, 4, 5},
                          expected_prefixes=[(6, 5)])
    assert not gone.ok
    unmarked = audit_solution(
        toy, Solution([Tour([1, 2, 3]), Tour([4]), Tour([5])]),
        {1, 2, 3, 4, 5}, expected_prefixes=[(1, 2)])
    assert not unmarked.ok
