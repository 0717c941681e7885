import math

import pytest

from dvrptw import (VIRTUAL, AggregateStats, PlannerConfig, RunReport,
                    aggregate, emit_csv, emit_table, parse_csv,
                    rank_sum_test, run_batch)

from conftest import random_instance


def _report(instance="X", dynamicity=0.0, seed=0, nv=10, td=100.0,
            feas=50, dur=1.0):
    return RunReport(instance=instance, dynamicity=dynamicity, seed=seed,
                     nv=nv, td_unscaled=td, feasible_solutions=feas,
                     duration_s=dur)


def test_aggregate_summarises_min_avg_max_std():
    batch = [_report(seed=s, nv=nv, td=td)
             for s, (nv, td) in enumerate([(10, 100.0), (11, 110.0),
                                           (10, 120.0)])]
    stats = aggregate(batch)
    assert (stats.runs, stats.nv_min, stats.nv_max) == (3, 10, 11)
    assert stats.nv_avg == pytest.approx(31 / 3)
    assert stats.nv_std == pytest.approx(math.sqrt(1 / 3))
    assert (stats.td_min, stats.td_avg, stats.td_max) == (100.0, 110.0, 120.0)
    assert stats.td_std == pytest.approx(10.0)
    assert stats.increase_nv_pct is None and stats.increase_td_pct is None
    # order of the reports never matters
    again = aggregate(list(reversed(batch)))
    assert again.td_std == stats.td_std and again.nv_avg == stats.nv_avg


def test_aggregate_increase_percentages():
    static = [_report(nv=10, td=100.0, seed=s) for s in range(3)]
    dynamic = [_report(nv=12, td=120.0, seed=0),
               _report(nv=13, td=150.0, seed=1)]
    stats = aggregate(dynamic, static_ref=static)
    assert stats.increase_nv_pct == 20.0
    assert stats.increase_td_pct == 20.0
    flat = aggregate(static, static_ref=static)
    assert flat.increase_nv_pct == 0.0 and flat.increase_td_pct == 0.0


def test_aggregate_rejects_empty_and_handles_singleton():
    with pytest.raises(ValueError):
        aggregate([])
    one = aggregate([_report(nv=9, td=90.0)])
    assert one.nv_std == 0.0 and one.td_std == 0.0
    assert one.nv_min == one.nv_max == 9


def test_csv_round_trip():
    batch = [
        _report("C101", 0.0, 7, 10, 828.938836, 1200, 100.123),
        _report("C201-0.5", 0.5, 8, 3, 591.557, 900, 99.5),
    ]
    text = emit_csv(batch)
    back = parse_csv(text)
    assert back == [
        RunReport("C101", 0.0, 7, 10, 828.938836, 1200, 100.123),
        RunReport("C201-0.5", 0.5, 8, 3, 591.557, 900, 99.5),
    ]
    with pytest.raises(ValueError):
        parse_csv("not,a,report\n1,2,3\n")
    with pytest.raises(ValueError):
        parse_csv(text.rsplit(",", 1)[0] + "\n")   # truncated last row


def test_rank_sum_matches_hand_values():
    assert rank_sum_test([1, 2], [3, 4]) == \
        pytest.approx(0.24527811680677286, rel=1e-12)
    assert rank_sum_test([1, 2, 2, 3], [2, 3, 3, 4]) == \
        pytest.approx(0.17203370892182296, rel=1e-12)
    assert rank_sum_test([1, 2, 3, 4, 5], [6, 7, 8, 9, 10]) == \
        pytest.approx(0.012185780355344818, rel=1e-12)
    # symmetry, degenerate ties, and arity guards
    assert rank_sum_test([3, 4], [1, 2]) == rank_sum_test([1, 2], [3, 4])
    assert rank_sum_test([5, 5, 5], [5, 5, 5]) == 1.0
    with pytest.raises(ValueError):
        rank_sum_test([1], [2, 3])
    with pytest.raises(ValueError):
        rank_sum_test([1, 2], [3])


def test_rank_sum_agrees_with_scipy(seeded_rng):
    stats = pytest.importorskip("scipy.stats")
    for _ in range(200):
        n1 = seeded_rng.randint(2, 12)
        n2 = seeded_rng.randint(2, 12)
        pool = [seeded_rng.randint(0, 8) * 0.5 for _ in range(n1 + n2)]
        a, b = pool[:n1], pool[n1:]
        if len(set(a + b)) == 1:
            assert rank_sum_test(a, b) == 1.0
            continue
        want = stats.mannwhitneyu(a, b, alternative="two-sided",
                                  method="asymptotic",
                                  use_continuity=True).pvalue
        assert rank_sum_test(a, b) == pytest.approx(float(want), rel=1e-9)


def test_emit_table_layout():
    rows = [
        AggregateStats(instance="C101", dynamicity=0.0, runs=3, nv_min=10,
                       nv_avg=10.333333333, nv_max=11, nv_std=0.5773502692,
                       td_min=828.94, td_avg=830.0, td_max=833.1,
                       td_std=2.08),
        AggregateStats(instance="C101-0.5", dynamicity=0.5, runs=3,
                       nv_min=12, nv_avg=12.0, nv_max=12, nv_std=0.0,
                       td_min=994.73, td_avg=1002.4, td_max=1011.0,
                       td_std=8.15, increase_nv_pct=20.0,
                       increase_td_pct=20.0),
    ]
    text = emit_table(rows)
    lines = text.splitlines()
    assert lines[0].split() == [
        "instance", "dyn", "runs", "nv_min", "nv_avg", "nv_max", "nv_std",
        "td_min", "td_avg", "td_max", "td_std", "dNV%", "dTD%"]
    assert lines[1] == "-" * len(lines[0])
    assert lines[2].split() == [
        "C101", "0.00", "3", "10", "10.33", "11", "0.58", "828.940",
        "830.000", "833.100", "2.080", "-", "-"]
    assert lines[3].split() == [
        "C101-0.5", "0.50", "3", "12", "12.00", "12", "0.00", "994.730",
        "1002.400", "1011.000", "8.150", "20.00", "20.00"]


def test_run_batch_produces_deterministic_reports(seeded_rng, tmp_path):
    inst = random_instance(seeded_rng, n=9, name="batch9", dynamic=True)
    config = PlannerConfig(t_wd=100.0, n_ts=5, clock=VIRTUAL,
                           virtual_iters_per_slice=10)
    batch = run_batch(inst, [4, 5, 6], config, event_dir=tmp_path)
    assert [r.seed for r in batch] == [4, 5, 6]
    for rep in batch:
        assert rep.instance == "batch9"
        assert rep.nv > 0 and rep.td_unscaled > 0
        assert rep.hard_infeasible == ()
        log = (tmp_path / f"batch9-seed{rep.seed}.events").read_text()
        assert log.startswith("t=0.000000 slice=0 day_start")
        assert rep.event_log.endswith(f"batch9-seed{rep.seed}.events")
    # seed order is irrelevant: each day is a pure function of its seed
    redo = run_batch(inst, [6, 4], config)
    by_seed = {r.seed: r for r in batch}
    for rep in redo:
        assert rep.nv == by_seed[rep.seed].nv
        assert rep.td_unscaled == by_seed[rep.seed].td_unscaled
        assert rep.feasible_solutions == by_seed[rep.seed].feasible_solutions
