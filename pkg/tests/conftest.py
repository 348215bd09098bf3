# -*- coding: utf-8 -*-
import pytest

from content import WorkloadParams
from engine import Simulator
from metrics_harness import ScenarioConfig
from mobility_energy import EnergyState, KinematicState, MobilityParams
from protocols import ContentDiscoveryNetwork, PeerState, ProtocolParams
from scoring import Protocol, ScoringParams


@pytest.fixture
def static_network():
    """Construye una red estática sin consumo de energía a partir de posiciones"""

    def build(
        positions,
        holdings=None,
        documents=(),
        protocol=Protocol.FLOODING,
        K=3,
        TTL=3,
        params=None,
        theta_match=0.8,
        seed=0,
        trace=False,
        **scoring,
    ):
        holdings = holdings or {}
        sim = Simulator(seed=seed, record_log=True)
        peers = [
            PeerState(
                node_id=pid,
                kinematics=KinematicState.stationary(tuple(pos)),
                energy=EnergyState(energy=100.0, enabled=False),
                cpu=1.0,
                q_cap=(params or ProtocolParams()).q_cap,
                shared_docs=set(holdings.get(pid, ())),
            )
            for pid, pos in enumerate(positions)
        ]
        net = ContentDiscoveryNetwork(
            sim,
            peers,
            {d.doc_id: d for d in documents},
            ScoringParams(K=K, TTL=TTL, protocol=protocol, **scoring),
            params or ProtocolParams(),
            MobilityParams(enabled=False),
            theta_match,
            trace=trace,
        )
        return sim, net

    return build


@pytest.fixture
def small_cfg():
    """Escenario chico para corridas completas rápidas"""
    return ScenarioConfig(
        n_peers=10,
        v_nominal=4.26,
        seed=3,
        run_duration=130.0,
        workload=WorkloadParams(
            n_docs=200,
            n_queries=20,
            vocab_size=400,
            theta_match=0.6,
            issue_start=10.0,
            issue_end=100.0,
        ),
    )
