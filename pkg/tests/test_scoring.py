# -*- coding: utf-8 -*-
import numpy as np
import pytest

from content import TermVector
from exceptions import BadUtilization, ConfigError
from mobility_energy import AFFINITY_CAP, RTIME_CAP
from scoring import (
    NeighborProfile,
    ScoringParams,
    load,
    pertinence,
    psim,
    select_top_k,
    stability,
)

Q = TermVector({1: 1.0, 2: 2.0})


def test_psim_examples():
    assert psim(NeighborProfile(neighbor=1), Q) == 0.0
    profile = NeighborProfile(neighbor=1)
    profile.add(Q)
    assert psim(profile, Q) == pytest.approx(1.0)
    profile.add(TermVector({9: 1.0}))
    assert psim(profile, Q) == pytest.approx(0.5, rel=1e-9)


def test_profile_fifo_eviction():
    profile = NeighborProfile(neighbor=1, capacity=2)
    for term in (1, 2, 3):
        profile.add(TermVector({term: 1.0}))
    assert len(profile) == 2
    assert psim(profile, TermVector({1: 1.0})) == 0.0
    assert psim(profile, TermVector({3: 1.0})) == pytest.approx(0.5)


def test_load_examples():
    assert load(1, 0.0) == pytest.approx(0.5, rel=1e-9)
    assert load(7, 1.0) == pytest.approx(1.0)
    assert load(3, 0.5) == pytest.approx(0.4, rel=1e-9)


@pytest.mark.parametrize("u", [-0.01, 1.01])
def test_load_rejects_bad_utilization(u):
    with pytest.raises(BadUtilization):
        load(1, u)


def test_load_properties():
    gen = np.random.default_rng(0)
    for _ in range(10000):
        cpu = gen.uniform(0.1, 8.0)
        u1, u2 = sorted(gen.uniform(0.0, 1.0, size=2))
        l1, l2 = load(cpu, u1), load(cpu, u2)
        assert 0.0 < l1 <= 1.0
        assert l1 <= l2


def test_stability_examples():
    assert stability(70, 50) == 50
    assert stability(0, 123.0) == 0
    assert stability(RTIME_CAP, AFFINITY_CAP) == RTIME_CAP == AFFINITY_CAP


def test_pertinence_examples():
    params = ScoringParams()
    assert pertinence(10, 0.4, 0.8, params) == pytest.approx(3.5, rel=1e-9)
    assert pertinence(0, 0.1, 1.0, params) == 0.0
    assert pertinence(4, 1.0, 0.0, params) == 0.0


def test_pertinence_literal_load_term():
    params = ScoringParams(literal_eq5=True)
    assert pertinence(10, 0.4, 0.8, params) == pytest.approx(5 * (0.5 * 0.4 + 0.5 * 0.8))


def test_pertinence_properties():
    gen = np.random.default_rng(1)
    params = ScoringParams()
    cap = params.MaxT * (params.L + params.Sim)
    for _ in range(10000):
        S = gen.uniform(0.0, 20.0)
        lo, hi = sorted(gen.uniform(0.0, 1.0, size=2))
        p = gen.uniform(0.0, 1.0)
        score = pertinence(S, lo, p, params)
        assert 0.0 <= score <= cap + 1e-12
        # no creciente en la carga
        assert pertinence(S, hi, p, params) <= score + 1e-12
        # saturada por encima de MaxT
        assert pertinence(S + params.MaxT, lo, p, params) == pertinence(params.MaxT, lo, p, params)


def test_select_top_k_examples():
    assert select_top_k([(1, 0.3), (2, 0.1)], 3) == [1, 2]
    assert select_top_k([(10, 1.0), (11, 2.0), (12, 0.5)], 2) == [11, 10]
    assert select_top_k([(5, 1.0), (4, 1.0)], 1) == [4]


def test_select_top_k_argmax_invariance():
    gen = np.random.default_rng(2)
    for _ in range(10000):
        n = int(gen.integers(1, 10))
        scores = gen.uniform(0.0, 5.0, size=n)
        candidates = list(enumerate(scores))
        k = int(gen.integers(1, 5))
        chosen = select_top_k(candidates, k)
        assert len(chosen) == min(k, n)
        assert chosen[0] == int(np.argmax(scores))
        shuffled = [candidates[i] for i in gen.permutation(n)]
        assert select_top_k(shuffled, k) == chosen


@pytest.mark.parametrize("kwargs", [{"K": 0}, {"TTL": 0}, {"L": 0, "Sim": 0}, {"MaxT": 0}])
def test_invalid_scoring_params(kwargs):
    with pytest.raises(ConfigError):
        ScoringParams(**kwargs)
