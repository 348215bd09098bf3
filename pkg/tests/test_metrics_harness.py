# -*- coding: utf-8 -*-
import csv
import math
from dataclasses import replace

import numpy as np
import pytest

from config import get_config
from exceptions import BadConfig, NoResolvedQueries
from metrics_harness import (
    AXIS_VALUES,
    AggregateRow,
    RunMetrics,
    RunRecord,
    ScenarioConfig,
    aggregate,
    avg_discovery_delay,
    check_trends,
    comparison,
    message_budget,
    recall,
    run_scenario,
    simulate,
    success_rate,
    sweep,
    write_csv,
)
from mobility_energy import AffinityMode, EnergyParams, MobilityParams
from protocols import ProtocolParams, Resolution
from scoring import Protocol, ScoringParams


def _res(query_id, issue=0.0, first_hit=None, docs=()):
    return Resolution(query_id=query_id, origin=0, issue_time=issue, first_hit_time=first_hit, docs=set(docs))


def _static(cfg):
    return replace(cfg, mobility=MobilityParams(enabled=False), energy=EnergyParams(enabled=False))


# ============================================
# MÉTRICAS
# ============================================

def test_recall_micro_average():
    relevance = {0: frozenset({1, 2}), 1: frozenset({3, 4})}
    resolutions = {0: _res(0, first_hit=1.0, docs={1, 2}), 1: _res(1)}
    assert recall(resolutions, relevance) == pytest.approx(0.5)


def test_recall_extremes():
    relevance = {0: frozenset({1}), 1: frozenset({2, 3})}
    assert recall({0: _res(0, 0, 1, {1}), 1: _res(1, 0, 1, {2, 3})}, relevance) == 1.0
    assert recall({0: _res(0), 1: _res(1)}, relevance) == 0.0


def test_recall_ignores_irrelevant_retrievals():
    assert recall({0: _res(0, 0, 1, {1, 9})}, {0: frozenset({1, 2})}) == pytest.approx(0.5)


def test_success_rate():
    assert success_rate({i: _res(i, 0, 1) for i in range(3)}) == 1.0
    assert success_rate({i: _res(i) for i in range(3)}) == 0.0
    mixed = {i: _res(i, 0, 1 if i < 7 else None) for i in range(10)}
    assert success_rate(mixed) == pytest.approx(0.7)


def test_avg_discovery_delay():
    assert avg_discovery_delay({0: _res(0, 10.0, 10.8)}) == pytest.approx(0.8)
    assert avg_discovery_delay({0: _res(0, 0.0, 0.5), 1: _res(1, 2.0, 3.5), 2: _res(2)}) == pytest.approx(1.0)
    assert avg_discovery_delay({0: _res(0, 4.0, 4.0)}) == 0.0


def test_avg_discovery_delay_requires_resolution():
    with pytest.raises(NoResolvedQueries):
        avg_discovery_delay({0: _res(0)})


def test_message_budget():
    assert message_budget(3, 3) == 39
    assert message_budget(2, 1) == 2


# ============================================
# CORRIDAS
# ============================================

def test_two_peers_sharing_everything_always_succeed(small_cfg):
    metrics = run_scenario(_static(replace(small_cfg, n_peers=2)))
    assert metrics.success_rate == 1.0
    assert metrics.recall == 1.0
    assert metrics.avg_discovery_delay == 0.0


def test_replay_is_identical(small_cfg):
    cfg = replace(small_cfg, trace=True)
    a, b = simulate(cfg), simulate(cfg)
    assert a.metrics.to_json() == b.metrics.to_json()
    assert a.event_log == b.event_log
    assert a.trace == b.trace
    assert len(a.event_log) > 0


@pytest.mark.parametrize("protocol", list(Protocol))
def test_metrics_bounded_and_budget_respected(small_cfg, protocol):
    metrics = run_scenario(replace(small_cfg, protocol=protocol))
    assert 0.0 <= metrics.recall <= 1.0
    assert 0.0 <= metrics.success_rate <= 1.0
    assert metrics.queries_issued == small_cfg.workload.n_queries
    assert metrics.budget_violations == 0
    assert metrics.max_query_transmissions <= message_budget(3, 3)
    assert metrics.max_peers_reached <= small_cfg.n_peers - 1
    assert 0.0 <= metrics.mean_peers_reached <= metrics.max_peers_reached


def test_same_world_for_every_protocol(small_cfg):
    a = simulate(replace(small_cfg, protocol=Protocol.CDP))
    b = simulate(replace(small_cfg, protocol=Protocol.GOSSIPING_LB))
    assert a.workload.to_json() == b.workload.to_json()


def test_estimated_affinity_mode_runs(small_cfg):
    cfg = replace(small_cfg, mobility=MobilityParams(affinity_mode=AffinityMode.ESTIMATE))
    metrics = run_scenario(cfg)
    assert 0.0 <= metrics.success_rate <= 1.0


def test_dead_batteries_leave_queries_unresolved(small_cfg):
    cfg = replace(small_cfg, energy=EnergyParams(initial_min=6.0, initial_max=7.0, idle_rate=0.05))
    metrics = run_scenario(cfg)
    assert metrics.success_rate < 1.0


def test_invalid_scenarios_rejected(small_cfg):
    with pytest.raises(BadConfig):
        simulate(replace(small_cfg, n_peers=1))
    with pytest.raises(BadConfig):
        simulate(replace(small_cfg, run_duration=small_cfg.workload.issue_end))
    with pytest.raises(BadConfig):
        simulate(small_cfg, positions=[(0.0, 0.0)])


def _bfs(adjacency, origin, depth):
    reached = {origin}
    frontier = [origin]
    for _ in range(depth):
        nxt = []
        for u in frontier:
            for v in sorted(adjacency[u] - reached):
                reached.add(v)
                nxt.append(v)
        frontier = nxt
    return reached


def test_flooding_recall_equals_bfs_oracle_and_dominates(small_cfg):
    gen = np.random.default_rng(17)
    positions = [(float(x), float(y)) for x, y in gen.uniform(0.0, 250.0, size=(10, 2))]
    adjacency = {
        i: {
            j for j in range(10)
            if j != i and math.hypot(positions[j][0] - positions[i][0], positions[j][1] - positions[i][1]) <= 100.0
        }
        for i in range(10)
    }
    base = replace(
        _static(small_cfg),
        protocol_params=ProtocolParams(base_service_rate=1e6, q_cap=1000, airtime=0.0),
    )
    flood = simulate(replace(base, protocol=Protocol.FLOODING, scoring=ScoringParams(K=9)), positions=positions)

    wl = flood.workload
    relevant = retrieved = 0
    for q in wl.queries:
        reach = _bfs(adjacency, q.origin_peer, 3)
        held = set().union(*(wl.placement[p] for p in reach))
        relevant += len(wl.relevance[q.query_id])
        retrieved += len(wl.relevance[q.query_id] & held)
    assert flood.metrics.recall == retrieved / relevant
    assert flood.metrics.hits_lost == 0

    cdp = simulate(replace(base, protocol=Protocol.CDP), positions=positions)
    assert cdp.metrics.recall <= flood.metrics.recall


@pytest.mark.slow
def test_static_hundred_peer_run_is_lossless():
    cfg = ScenarioConfig(
        n_peers=100, seed=5, mobility=MobilityParams(enabled=False), energy=EnergyParams(enabled=False)
    )
    metrics = run_scenario(cfg)
    assert metrics.queries_issued == 200
    assert metrics.hits_lost == 0
    assert metrics.budget_violations == 0
    assert metrics.stale_sends == 0


# ============================================
# AGREGACIÓN Y BARRIDOS
# ============================================

def _metrics(recall_value, delay=0.5):
    return RunMetrics(
        recall=recall_value, success_rate=recall_value, avg_discovery_delay=delay,
        queries_issued=10, queries_resolved=5, hits_lost=0, messages_sent=100,
    )


def test_aggregate_matches_direct_recomputation():
    records = [
        RunRecord("peers", 25, Protocol.CDP, seed, _metrics(r, d))
        for seed, (r, d) in enumerate([(0.2, 0.5), (0.4, None), (0.9, 1.5)])
    ]
    rows = {row.metric: row for row in aggregate(records)}
    assert rows["recall"].mean == pytest.approx(np.mean([0.2, 0.4, 0.9]))
    assert rows["recall"].std == pytest.approx(np.std([0.2, 0.4, 0.9]))
    assert rows["recall"].seed_count == 3
    assert rows["avg_discovery_delay"].mean == pytest.approx(1.0)
    assert rows["avg_discovery_delay"].seed_count == 2


def test_single_seed_has_zero_std():
    rows = aggregate([RunRecord("speed", 4.26, Protocol.CDP, 1, _metrics(0.3))])
    assert all(row.std == 0.0 for row in rows)


def test_write_csv_schema(tmp_path):
    rows = [
        AggregateRow("peers", 25, "cdp", 2, "recall", 0.5, 0.1),
        AggregateRow("peers", 25, "cdp", 0, "avg_discovery_delay", None, None),
    ]
    path = write_csv(rows, tmp_path / "results.csv")
    with path.open(encoding="utf-8") as fh:
        data = list(csv.reader(fh))
    assert data[0] == ["axis", "axis_value", "protocol", "seed_count", "metric", "mean", "std"]
    assert data[1] == ["peers", "25", "cdp", "2", "recall", "0.5", "0.1"]
    assert data[2][-2:] == ["", ""]


def test_sweep_speed_axis_grid(small_cfg):
    result = sweep(small_cfg, "speed", [Protocol.CDP, Protocol.GOSSIPING_LB], seeds=[1])
    assert len(result.records) == 3 * 2
    assert len(result.rows) == 3 * 2 * 7
    assert {row.axis_value for row in result.rows} == {4.26, 7.73, 11.68}
    assert all(row.std == 0.0 for row in result.rows if row.std is not None)
    assert len(result.comparison) == 3
    assert "cdp_recall_dominates" in result.trends


def test_axis_values():
    assert AXIS_VALUES["peers"] == (25, 50, 75, 100)
    assert AXIS_VALUES["speed"] == (4.26, 7.73, 11.68)


def test_sweep_rejects_unknown_axis(small_cfg):
    with pytest.raises(BadConfig):
        sweep(small_cfg, "density", [Protocol.CDP], seeds=[1])


@pytest.mark.slow
def test_parallel_sweep_matches_serial(small_cfg):
    serial = sweep(small_cfg, "speed", [Protocol.CDP], seeds=[1, 2], jobs=1)
    parallel = sweep(small_cfg, "speed", [Protocol.CDP], seeds=[1, 2], jobs=2)
    assert [r.to_dict() for r in serial.records] == [r.to_dict() for r in parallel.records]


@pytest.mark.slow
@pytest.mark.parametrize("axis", ["peers", "speed"])
def test_default_sweep_meets_expected_trends(axis):
    result = sweep(
        ScenarioConfig(), axis, [Protocol.CDP, Protocol.GOSSIPING_LB], seeds=range(1, 11), jobs=get_config().JOBS
    )
    assert [name for name, ok in result.trends.items() if not ok] == []


# ============================================
# TENDENCIAS
# ============================================

def _rows(axis, values, series):
    rows = []
    for (protocol, metric), (means, std) in series.items():
        for value, mean in zip(values, means):
            rows.append(AggregateRow(axis, value, protocol, 10, metric, mean, std))
    return rows


def _peer_series(cdp_recall=(0.2, 0.3, 0.4, 0.5), std=0.01):
    return {
        ("cdp", "recall"): (cdp_recall, std),
        ("cdp", "success_rate"): ((0.3, 0.4, 0.5, 0.6), std),
        ("cdp", "avg_discovery_delay"): ((0.1, 0.2, 0.3, 0.4), std),
        ("gossiping_lb", "recall"): ((0.1, 0.15, 0.2, 0.25), std),
        ("gossiping_lb", "success_rate"): ((0.2, 0.3, 0.4, 0.5), std),
        ("gossiping_lb", "avg_discovery_delay"): ((0.2, 0.3, 0.4, 0.5), std),
    }


def test_check_trends_peers_all_pass():
    verdicts = check_trends(_rows("peers", AXIS_VALUES["peers"], _peer_series()), "peers")
    assert verdicts and all(verdicts.values())


def test_check_trends_tolerates_one_small_dip():
    rows = _rows("peers", AXIS_VALUES["peers"], _peer_series((0.2, 0.3, 0.29, 0.5), std=0.05))
    assert check_trends(rows, "peers")["cdp_recall_nondecreasing"]


def test_check_trends_rejects_large_or_repeated_dips():
    big = _rows("peers", AXIS_VALUES["peers"], _peer_series((0.2, 0.4, 0.25, 0.5), std=0.05))
    assert not check_trends(big, "peers")["cdp_recall_nondecreasing"]
    twice = _rows("peers", AXIS_VALUES["peers"], _peer_series((0.3, 0.29, 0.35, 0.34), std=0.05))
    assert not check_trends(twice, "peers")["cdp_recall_nondecreasing"]


def test_check_trends_dominance_is_strict_on_peers_axis():
    series = _peer_series()
    series[("gossiping_lb", "recall")] = ((0.2, 0.15, 0.2, 0.25), 0.01)
    assert not check_trends(_rows("peers", AXIS_VALUES["peers"], series), "peers")["cdp_recall_dominates"]


def test_check_trends_speed_axis():
    values = AXIS_VALUES["speed"]
    series = {
        ("cdp", "recall"): ((0.5, 0.4, 0.3), 0.01),
        ("cdp", "success_rate"): ((0.6, 0.6, 0.5), 0.01),
        ("cdp", "avg_discovery_delay"): ((0.1, 0.1, 0.1), 0.01),
        ("gossiping_lb", "recall"): ((0.5, 0.3, 0.2), 0.01),
        ("gossiping_lb", "success_rate"): ((0.5, 0.45, 0.5), 0.01),
        ("gossiping_lb", "avg_discovery_delay"): ((0.2, 0.2, 0.2), 0.01),
    }
    verdicts = check_trends(_rows("speed", values, series), "speed")
    assert verdicts["cdp_recall_dominates"]
    assert verdicts["cdp_delay_dominates"]
    assert verdicts["cdp_recall_nonincreasing"]
    assert not verdicts["gossiping_lb_success_rate_nonincreasing"]


def test_comparison_gains():
    series = _peer_series()
    entries = comparison(_rows("peers", AXIS_VALUES["peers"], series))
    assert [e["axis_value"] for e in entries] == [25, 50, 75, 100]
    assert entries[0]["recall_gain"] == pytest.approx(1.0)
    assert entries[0]["success_gain"] == pytest.approx(0.5)
    assert entries[0]["delay_reduction"] == pytest.approx(0.5)
