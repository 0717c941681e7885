import math

import pytest

from dvrptw import (InfeasibleCustomerError, InsertionWeights, NnWeights,
                    Solution, Tour, closeness_metric, evaluate_solution,
                    i1_insertion, nearest_neighbour_solution, nn_tours)

from conftest import make_instance

SQ40 = math.sqrt(40.0)
SQ45 = math.sqrt(45.0)


def test_closeness_blends_distance_gap_urgency(toy):
    # from the depot at time 0: d=5, gap=6 (waits for the window), urgency=25
    assert closeness_metric(toy, 0, 1, 0.0) == pytest.approx(9.4, abs=1e-12)
    # service at 1 begun at 6: depart 8, d=5, begin at 13
    assert closeness_metric(toy, 1, 2, 6.0) == pytest.approx(9.4, abs=1e-12)
    assert closeness_metric(toy, 0, 5, 0.0) == pytest.approx(32.0, abs=1e-12)


def test_closeness_weights_are_honoured(toy):
    only_d = closeness_metric(toy, 0, 3, 0.0, NnWeights(1.0, 0.0, 0.0))
    only_t = closeness_metric(toy, 0, 3, 0.0, NnWeights(0.0, 1.0, 0.0))
    only_u = closeness_metric(toy, 0, 3, 0.0, NnWeights(0.0, 0.0, 1.0))
    assert only_d == pytest.approx(10.0)
    assert only_t == pytest.approx(10.0)
    assert only_u == pytest.approx(50.0)


def test_nn_reproduces_hand_trace(toy):
    sol = nearest_neighbour_solution(toy)
    assert [t.visits for t in sol.tours] == [[1, 2, 3], [4], [5]]
    ev = evaluate_solution(toy, sol)
    assert ev.feasible
    assert ev.distance == pytest.approx(76.0 + SQ40, abs=1e-12)


def test_nn_respects_capacity_mid_tour(toy):
    # after [1, 2] the metric prefers 4, but 20+20+10 > 30 forces 3
    tours, stuck = nn_tours(toy, [1, 2, 3, 4])
    assert stuck == []
    assert [t.visits for t in tours] == [[1, 2, 3], [4]]


def test_nn_subset_and_empty(toy):
    sol = nearest_neighbour_solution(toy, [4, 5])
    assert [t.visits for t in sol.tours] == [[4], [5]]
    assert nearest_neighbour_solution(toy, []).tours == []


def test_nn_tie_falls_to_lowest_id():
    inst = make_instance([
        (3, 4, 5, 0, 90, 1),
        (3, 4, 5, 0, 90, 1),
    ])
    tours, _ = nn_tours(inst, [1, 2])
    assert tours[0].visits == [1, 2]


def test_nn_reports_hopeless_customer():
    inst = make_instance([
        (0, 10, 5, 0, 5, 0),    # window closes before any vehicle arrives
        (3, 4, 5, 0, 90, 1),
    ])
    tours, stuck = nn_tours(inst, [1, 2])
    assert stuck == [1]
    assert [t.visits for t in tours] == [[2]]
    with pytest.raises(InfeasibleCustomerError) as err:
        nearest_neighbour_solution(inst)
    assert err.value.customer == 1


def test_nn_rejects_unknown_ids(toy):
    with pytest.raises(ValueError):
        nn_tours(toy, [1, 99])


def test_i1_picks_cheapest_position_by_c1(toy):
    base = Solution([Tour([1, 2]), Tour([4])])
    grown, left = i1_insertion(toy, base, [3])
    assert left == []
    assert [t.visits for t in grown.tours] == [[1, 2, 3], [4]]
    # the source solution is untouched
    assert [t.visits for t in base.tours] == [[1, 2], [4]]


def test_i1_leaves_unplaceable_customers(toy):
    base = Solution([Tour([1, 2]), Tour([4])])
    grown, left = i1_insertion(toy, base, [3, 5])
    assert left == [5]
    assert [t.visits for t in grown.tours] == [[1, 2, 3], [4]]


def _line_instance(cap):
    return make_instance([
        (10, 0, 1, 0, 200, 0),
        (12, 0, 1, 0, 200, 0),
        (2, 0, 1, 0, 200, 0),
    ], cap=cap, horizon=(0.0, 200.0))


def test_i1_seed_rule_min_vs_max():
    inst = _line_instance(cap=2)
    base = Solution([Tour([1])])
    # near customer 3 scores c2 = 2*2 - 0, far customer 2 scores 2*12 - 4
    grown_min, left_min = i1_insertion(inst, base, [2, 3])
    assert [t.visits for t in grown_min.tours] == [[3, 1]]
    assert left_min == [2]
    grown_max, left_max = i1_insertion(
        inst, base, [2, 3], InsertionWeights(seed_rule="max"))
    assert [t.visits for t in grown_max.tours] == [[2, 1]]
    assert left_max == [3]


def test_i1_never_precedes_committed_prefix():
    inst = _line_instance(cap=10)
    free, _ = i1_insertion(inst, Solution([Tour([1, 2])]), [3])
    assert [t.visits for t in free.tours] == [[3, 1, 2]]
    pinned, _ = i1_insertion(
        inst, Solution([Tour([1, 2], committed=1)]), [3])
    assert [t.visits for t in pinned.tours] == [[1, 2, 3]]
    assert pinned.tours[0].committed == 1


def test_i1_validates_ids_and_handles_empty(toy):
    base = Solution([Tour([1])])
    with pytest.raises(ValueError):
        i1_insertion(toy, base, [0])
    same, left = i1_insertion(toy, base, [])
    assert left == []
    assert same is not base
    assert [t.visits for t in same.tours] == [[1]]


def test_insertion_weights_validate():
    with pytest.raises(ValueError):
        InsertionWeights(seed_rule="median")
    assert InsertionWeights().sign == 1
    assert InsertionWeights(seed_rule="max").sign == -1
