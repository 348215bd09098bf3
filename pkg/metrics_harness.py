# -*- coding: utf-8 -*-
"""
Escenarios, Métricas y Barridos
===============================

- ScenarioConfig: todos los parámetros de una corrida
- simulate / run_scenario: construye el mundo, reproduce la carga y mide
- recall, success_rate, avg_discovery_delay
- sweep: rejilla (valor del eje × protocolo × semilla), agregación media/desvío
- comparison / check_trends: ganancias de CDP y verificación de tendencias

USO:
    cfg = ScenarioConfig(n_peers=50, protocol=Protocol.CDP, seed=7)
    metrics = run_scenario(cfg)

    result = sweep(cfg, "peers", [Protocol.CDP, Protocol.GOSSIPING_LB], seeds=range(1, 11), jobs=4)
    write_csv(result.rows, "results.csv")
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from content import Workload, WorkloadParams, generate_workload
from engine import Simulator
from exceptions import BadConfig, NoResolvedQueries
from mobility_energy import EnergyParams, EnergyState, MobilityParams, Point, RandomWaypoint
from protocols import ContentDiscoveryNetwork, PeerState, ProtocolParams, Resolution, RunStats
from scoring import Protocol, ScoringParams
from validadores import validar_escenario

logger = logging.getLogger("cdpsim.harness")

AXIS_VALUES: Dict[str, Tuple[float, ...]] = {
    "peers": (25, 50, 75, 100),
    "speed": (4.26, 7.73, 11.68),
}

METRIC_NAMES = (
    "recall",
    "success_rate",
    "avg_discovery_delay",
    "queries_issued",
    "hits_lost",
    "messages_sent",
    "mean_peers_reached",
)

CSV_FIELDS = ("axis", "axis_value", "protocol", "seed_count", "metric", "mean", "std")


# ============================================
# CONFIGURACIÓN DE ESCENARIO
# ============================================

@dataclass
class ScenarioConfig:
    n_peers: int = 50
    v_nominal: float = 4.26
    protocol: Protocol = Protocol.CDP
    seed: int = 1
    run_duration: float = 600.0
    trace: bool = False
    mobility: MobilityParams = field(default_factory=MobilityParams)
    energy: EnergyParams = field(default_factory=EnergyParams)
    workload: WorkloadParams = field(default_factory=WorkloadParams)
    scoring: ScoringParams = field(default_factory=ScoringParams)
    protocol_params: ProtocolParams = field(default_factory=ProtocolParams)

    def scoring_params(self) -> ScoringParams:
        """Parámetros de puntuación con el protocolo de la corrida"""
        return replace(self.scoring, protocol=self.protocol)

    def with_axis(self, axis: str, value: float) -> "ScenarioConfig":
        if axis == "peers":
            return replace(self, n_peers=int(value))
        if axis == "speed":
            return replace(self, v_nominal=float(value))
        raise BadConfig(f"eje desconocido: {axis}")


@dataclass
class RunMetrics:
    recall: float
    success_rate: float
    avg_discovery_delay: Optional[float]
    queries_issued: int
    queries_resolved: int
    hits_lost: int
    messages_sent: int
    query_messages: int = 0
    hit_messages: int = 0
    messages_dropped: int = 0
    max_query_transmissions: int = 0
    max_peers_reached: int = 0
    mean_peers_reached: float = 0.0
    query_duplicates: int = 0
    stale_sends: int = 0
    budget_violations: int = 0

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


@dataclass
class RunResult:
    """Todo lo que deja una corrida (métricas, resoluciones, contadores y trazas)"""

    cfg: ScenarioConfig
    workload: Workload
    metrics: RunMetrics
    resolutions: Dict[int, Resolution]
    stats: RunStats
    trace: List[Dict[str, object]] = field(default_factory=list)
    event_log: List[Tuple[float, int, str, str]] = field(default_factory=list)


# ============================================
# MÉTRICAS
# ============================================

def recall(resolutions: Mapping[int, Resolution], workload) -> float:
    """RRD / RLD agregado sobre todas las consultas emitidas (micro-promedio)"""
    relevance = getattr(workload, "relevance", workload)
    relevant = 0
    retrieved = 0
    for query_id, res in resolutions.items():
        rel = relevance.get(query_id, frozenset())
        relevant += len(rel)
        retrieved += len(res.docs & rel)
    return retrieved / relevant if relevant else 0.0


def success_rate(resolutions: Mapping[int, Resolution]) -> float:
    if not resolutions:
        return 0.0
    resolved = sum(1 for res in resolutions.values() if res.resolved)
    return resolved / len(resolutions)


def avg_discovery_delay(resolutions: Mapping[int, Resolution]) -> float:
    """Media del retardo al primer hit, solo sobre consultas resueltas"""
    delays = [res.delay for res in resolutions.values() if res.resolved]
    if not delays:
        raise NoResolvedQueries("ninguna consulta resuelta")
    return float(np.mean(delays))


def message_budget(K: int, TTL: int) -> int:
    """K + K² + … + K^TTL"""
    return sum(K ** h for h in range(1, TTL + 1))


def _collect_metrics(network: ContentDiscoveryNetwork, workload: Workload, n_peers: int) -> RunMetrics:
    resolutions = network.resolutions
    stats = network.stats
    try:
        delay: Optional[float] = avg_discovery_delay(resolutions)
    except NoResolvedQueries:
        delay = None

    budget = message_budget(network.scoring.K, network.scoring.TTL)
    reach_cap = min(n_peers - 1, budget)
    violations = 0
    reached_counts = []
    for query_id in resolutions:
        tx = stats.per_query_tx.get(query_id, 0)
        reached = len(stats.per_query_receivers.get(query_id, ()))
        reached_counts.append(reached)
        if tx > budget or reached > reach_cap:
            violations += 1

    return RunMetrics(
        recall=recall(resolutions, workload),
        success_rate=success_rate(resolutions),
        avg_discovery_delay=delay,
        queries_issued=len(resolutions),
        queries_resolved=sum(1 for r in resolutions.values() if r.resolved),
        hits_lost=stats.hits_lost,
        messages_sent=stats.messages_sent,
        query_messages=stats.query_messages,
        hit_messages=stats.hit_messages,
        messages_dropped=stats.messages_dropped,
        max_query_transmissions=max(stats.per_query_tx.values(), default=0),
        max_peers_reached=max((len(s) for s in stats.per_query_receivers.values()), default=0),
        mean_peers_reached=float(np.mean(reached_counts)) if reached_counts else 0.0,
        query_duplicates=stats.duplicates,
        stale_sends=stats.stale_sends,
        budget_violations=violations,
    )


# ============================================
# CONSTRUCCIÓN DEL MUNDO Y CORRIDA
# ============================================

def build_peers(
    cfg: ScenarioConfig, sim: Simulator, workload: Workload, positions: Optional[Sequence[Point]] = None
) -> List[PeerState]:
    if positions is not None and len(positions) != cfg.n_peers:
        raise BadConfig(f"se dieron {len(positions)} posiciones para {cfg.n_peers} pares")

    model = RandomWaypoint(cfg.mobility, cfg.v_nominal)
    energy_rng = sim.rng("energy")
    cpu_rng = sim.rng("cpu")

    peers = []
    for peer_id in range(cfg.n_peers):
        rng = sim.rng(f"mobility:{peer_id}")
        kinematics = model.initial_state(rng, None if positions is None else tuple(positions[peer_id]))
        initial = energy_rng.uniform(cfg.energy.initial_min, cfg.energy.initial_max)
        peers.append(
            PeerState(
                node_id=peer_id,
                kinematics=kinematics,
                energy=EnergyState.from_params(initial, cfg.energy),
                mobility=None if model.static else model,
                rng=rng,
                cpu=float(cpu_rng.choice(cfg.protocol_params.cpu_choices)),
                q_cap=cfg.protocol_params.q_cap,
                shared_docs=set(workload.placement.get(peer_id, ())),
            )
        )
    return peers


def simulate(
    cfg: ScenarioConfig, workload: Optional[Workload] = None, positions: Optional[Sequence[Point]] = None
) -> RunResult:
    """
    Construye el mundo y reproduce la carga hasta run_duration.

    Determinista en (cfg, seed): la carga, las trayectorias, las energías
    iniciales y los cpu salen de flujos con nombre independientes del
    protocolo, así que todos los protocolos ven el mismo mundo.
    """
    ok, errores = validar_escenario(cfg)
    if not ok:
        raise BadConfig("; ".join(errores))

    sim = Simulator(seed=cfg.seed, record_log=cfg.trace)
    if workload is None:
        workload = generate_workload(cfg.workload, cfg.n_peers, sim.rng("workload"))

    peers = build_peers(cfg, sim, workload, positions)
    network = ContentDiscoveryNetwork(
        sim,
        peers,
        workload.documents_by_id(),
        cfg.scoring_params(),
        cfg.protocol_params,
        cfg.mobility,
        workload.theta_match,
        trace=cfg.trace,
    )
    network.start(workload.queries, cfg.run_duration)
    sim.run_until(cfg.run_duration)

    metrics = _collect_metrics(network, workload, cfg.n_peers)
    if metrics.hits_lost:
        logger.warning(f"⚠️ {metrics.hits_lost} hit(s) perdidos por caminos inversos rotos")
    if metrics.budget_violations:
        logger.error(f"❌ {metrics.budget_violations} consulta(s) superaron el presupuesto de mensajes")
    logger.info(
        f"✅ Corrida {cfg.protocol.value} N={cfg.n_peers} v={cfg.v_nominal} seed={cfg.seed}: "
        f"recall={metrics.recall:.3f} éxito={metrics.success_rate:.3f}"
    )
    return RunResult(
        cfg=cfg,
        workload=workload,
        metrics=metrics,
        resolutions=dict(network.resolutions),
        stats=network.stats,
        trace=network.trace,
        event_log=sim.event_log,
    )


def run_scenario(cfg: ScenarioConfig) -> RunMetrics:
    return simulate(cfg).metrics


# ============================================
# BARRIDOS
# ============================================

@dataclass
class RunRecord:
    axis: str
    axis_value: float
    protocol: Protocol
    seed: int
    metrics: RunMetrics

    def to_dict(self) -> Dict[str, object]:
        return {
            "axis": self.axis,
            "axis_value": self.axis_value,
            "protocol": self.protocol.value,
            "seed": self.seed,
            "metrics": self.metrics.to_dict(),
        }


@dataclass
class AggregateRow:
    axis: str
    axis_value: float
    protocol: str
    seed_count: int
    metric: str
    mean: Optional[float]
    std: Optional[float]

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass
class SweepResult:
    axis: str
    protocols: List[Protocol]
    seeds: List[int]
    records: List[RunRecord]
    rows: List[AggregateRow]
    comparison: List[Dict[str, object]]
    trends: Dict[str, bool]


def _run_cell(task: Tuple[ScenarioConfig, str, float]) -> RunRecord:
    cfg, axis, value = task
    return RunRecord(axis=axis, axis_value=value, protocol=cfg.protocol, seed=cfg.seed, metrics=run_scenario(cfg))


def sweep(
    base_cfg: ScenarioConfig,
    axis: str,
    protocols: Iterable[Protocol],
    seeds: Iterable[int],
    jobs: int = 1,
) -> SweepResult:
    """Corre la rejilla completa y agrega media/desvío por (valor, protocolo, métrica)"""
    if axis not in AXIS_VALUES:
        raise BadConfig(f"eje desconocido: {axis} (use {', '.join(AXIS_VALUES)})")
    protocols = [Protocol(p) for p in protocols]
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise BadConfig("se requiere al menos una semilla")
    if not protocols:
        raise BadConfig("se requiere al menos un protocolo")

    tasks = [
        (replace(base_cfg.with_axis(axis, value), protocol=protocol, seed=seed, trace=False), axis, value)
        for value in AXIS_VALUES[axis]
        for protocol in protocols
        for seed in seeds
    ]
    logger.info(f"📦 Barrido '{axis}': {len(tasks)} corridas, jobs={jobs}")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            records = list(executor.map(_run_cell, tasks))
    else:
        records = [_run_cell(task) for task in tasks]

    rows = aggregate(records)
    trends = check_trends(rows, axis)
    for name, ok in trends.items():
        if ok:
            logger.info(f"✅ Tendencia {name}: cumple")
        else:
            logger.warning(f"⚠️ Tendencia {name}: no cumple")
    return SweepResult(
        axis=axis,
        protocols=protocols,
        seeds=seeds,
        records=records,
        rows=rows,
        comparison=comparison(rows),
        trends=trends,
    )


def aggregate(records: Sequence[RunRecord]) -> List[AggregateRow]:
    """Media y desvío poblacional (ddof=0) por celda; un retardo nulo no entra a la media"""
    cells: Dict[Tuple[str, float, str], List[RunRecord]] = {}
    for rec in records:
        cells.setdefault((rec.axis, rec.axis_value, rec.protocol.value), []).append(rec)

    rows = []
    for (axis, value, protocol), recs in cells.items():
        for metric in METRIC_NAMES:
            values = [getattr(r.metrics, metric) for r in recs]
            values = [float(v) for v in values if v is not None]
            if values:
                mean, std = float(np.mean(values)), float(np.std(values))
            else:
                mean = std = None
            rows.append(AggregateRow(axis, value, protocol, len(values), metric, mean, std))
    return rows


def write_csv(rows: Iterable[AggregateRow], path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            data = row.to_dict()
            writer.writerow({k: ("" if data[k] is None else data[k]) for k in CSV_FIELDS})
    return path


def write_runs_json(records: Iterable[RunRecord], path) -> Path:
    path = Path(path)
    path.write_text(json.dumps([r.to_dict() for r in records], sort_keys=True, indent=2), encoding="utf-8")
    return path


# ============================================
# COMPARACIÓN Y TENDENCIAS
# ============================================

def _means(rows: Iterable[AggregateRow]) -> Dict[Tuple[str, str], List[Tuple[float, Optional[float], Optional[float]]]]:
    series: Dict[Tuple[str, str], List[Tuple[float, Optional[float], Optional[float]]]] = {}
    for row in rows:
        series.setdefault((row.protocol, row.metric), []).append((row.axis_value, row.mean, row.std))
    for values in series.values():
        values.sort(key=lambda v: v[0])
    return series


def _relative(new: Optional[float], base: Optional[float]) -> Optional[float]:
    if new is None or base is None or base == 0:
        return None
    return (new - base) / base


def comparison(rows: Iterable[AggregateRow]) -> List[Dict[str, object]]:
    """Ganancia relativa de CDP frente a Gossiping-LB por valor del eje"""
    series = _means(rows)
    cdp, glb = Protocol.CDP.value, Protocol.GOSSIPING_LB.value
    if (cdp, "recall") not in series or (glb, "recall") not in series:
        return []

    def by_value(protocol: str, metric: str) -> Dict[float, Optional[float]]:
        return {v: m for v, m, _ in series.get((protocol, metric), [])}

    out = []
    recall_c, recall_g = by_value(cdp, "recall"), by_value(glb, "recall")
    succ_c, succ_g = by_value(cdp, "success_rate"), by_value(glb, "success_rate")
    delay_c, delay_g = by_value(cdp, "avg_discovery_delay"), by_value(glb, "avg_discovery_delay")
    for value in sorted(recall_c):
        reduction = _relative(delay_c.get(value), delay_g.get(value))
        out.append({
            "axis_value": value,
            "recall_gain": _relative(recall_c.get(value), recall_g.get(value)),
            "success_gain": _relative(succ_c.get(value), succ_g.get(value)),
            "delay_reduction": None if reduction is None else -reduction,
        })
    return out


def write_comparison_csv(entries: Iterable[Mapping[str, object]], path) -> Path:
    path = Path(path)
    fields = ("axis_value", "recall_gain", "success_gain", "delay_reduction")
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for entry in entries:
            writer.writerow({k: ("" if entry.get(k) is None else entry[k]) for k in fields})
    return path


def _monotone(points: Sequence[Tuple[float, Optional[float], Optional[float]]], increasing: bool, allowance: int) -> bool:
    """
    Monotonía entre valores adyacentes del eje.

    Se toleran `allowance` violaciones siempre que la diferencia quede dentro
    de un desvío estándar de alguno de los dos puntos.
    """
    if any(m is None for _, m, _ in points):
        return False
    used = 0
    for (_, m0, s0), (_, m1, s1) in zip(points, points[1:]):
        broken = m1 < m0 if increasing else m1 > m0
        if not broken:
            continue
        if used < allowance and abs(m1 - m0) <= max(s0 or 0.0, s1 or 0.0):
            used += 1
            continue
        return False
    return True


def _dominates(
    better: Sequence[Tuple[float, Optional[float], Optional[float]]],
    worse: Sequence[Tuple[float, Optional[float], Optional[float]]],
    higher: bool,
    strict: bool,
) -> bool:
    worse_by_value = {v: m for v, m, _ in worse}
    if not better or len(better) != len(worse_by_value):
        return False
    for value, m, _ in better:
        other = worse_by_value.get(value)
        if m is None or other is None or (math.isnan(m) or math.isnan(other)):
            return False
        if higher:
            ok = m > other if strict else m >= other
        else:
            ok = m < other if strict else m <= other
        if not ok:
            return False
    return True


def check_trends(rows: Iterable[AggregateRow], axis: str) -> Dict[str, bool]:
    """
    Veredictos de tendencia sobre las filas agregadas de un barrido.

    Eje peers: CDP supera estrictamente a Gossiping-LB en recall y éxito, no
    lo supera en retardo; recall, éxito y retardo no decrecen con N (una
    violación tolerada dentro de 1 desvío).
    Eje speed: CDP >= Gossiping-LB en recall/éxito y <= en retardo; recall y
    éxito no crecen con la velocidad.
    """
    series = _means(rows)
    verdicts: Dict[str, bool] = {}
    cdp, glb = Protocol.CDP.value, Protocol.GOSSIPING_LB.value
    peers_axis = axis == "peers"

    if (cdp, "recall") in series and (glb, "recall") in series:
        for metric in ("recall", "success_rate"):
            verdicts[f"cdp_{metric}_dominates"] = _dominates(
                series[(cdp, metric)], series[(glb, metric)], higher=True, strict=peers_axis
            )
        verdicts["cdp_delay_dominates"] = _dominates(
            series[(cdp, "avg_discovery_delay")], series[(glb, "avg_discovery_delay")], higher=False, strict=False
        )

    protocols = sorted({p for p, _ in series})
    for protocol in protocols:
        if peers_axis:
            for metric in ("recall", "success_rate", "avg_discovery_delay"):
                verdicts[f"{protocol}_{metric}_nondecreasing"] = _monotone(
                    series[(protocol, metric)], increasing=True, allowance=1
                )
        else:
            for metric in ("recall", "success_rate"):
                verdicts[f"{protocol}_{metric}_nonincreasing"] = _monotone(
                    series[(protocol, metric)], increasing=False, allowance=0
                )
    return verdicts
