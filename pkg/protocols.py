# -*- coding: utf-8 -*-
"""
Protocolos de Descubrimiento de Contenido
=========================================

Máquinas de estado sobre el motor de eventos:

1) Emisión de consultas (aciertos locales con retardo 0)
2) Reenvío según el protocolo activo:
   - CDP: top-K por pertinencia (estabilidad, carga, similitud de perfil)
   - Gossiping-LB: muestreo ponderado por (1 − u) + ε, sin mirar el contenido
   - Flooding: K vecinos al azar
3) Supresión de duplicados por query_id
4) Query hits por el camino inverso, con pérdida si un salto se rompe
5) Aprendizaje de perfiles en cada relevo del hit

Los metadatos de vecinos (cpu, u, muestras de energía) viajan en beacons
periódicos; la posición/velocidad se lee de la cinemática real.

Cada par conoce a sus vecinos por la ronda de beacons: una entrada se crea al
oír el beacon del vecino y caduca tras `hello_loss` rondas sin oírlo, así que
entre rondas la tabla puede listar vecinos que ya salieron del alcance (la
transmisión hacia ellos se pierde) y omitir a los recién llegados.

El medio es compartido: toda transmisión ocupa el canal de los pares al
alcance del emisor durante `airtime` segundos, y esos pares escuchan a quién
se le envió cada consulta (no se la reenvían otra vez).
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field, replace
from typing import Deque, Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import numpy as np

from content import Document, QuerySpec, TermVector, matches
from engine import Event, EventKind, Simulator
from exceptions import BrokenReversePath, InsufficientSamples, NotNeighbors, QueueOverflow
from mobility_energy import (
    AFFINITY_CAP,
    AffinityMode,
    AffinitySample,
    EnergyAction,
    MobileNode,
    MobilityParams,
    affinity_estimate,
    affinity_oracle,
    consume,
    distance,
    in_range,
    neighbors_of,
    position_at,
    record_energy_sample,
    rtime_from_samples,
)
from scoring import (
    NeighborProfile,
    Protocol,
    ScoringParams,
    load,
    pertinence,
    psim,
    select_top_k,
    stability,
)

logger = logging.getLogger("cdpsim.protocols")


@dataclass
class ProtocolParams:
    q_cap: int = 50
    base_service_rate: float = 200.0
    link_latency: float = 0.005
    beacon_interval: float = 1.0
    gossip_epsilon: float = 0.01
    pending_ttl_factor: float = 2.0
    cpu_choices: Tuple[float, ...] = (1.0, 2.0, 4.0)
    hello_loss: int = 2
    airtime: float = 0.002
    overhearing: bool = True


# ============================================
# MENSAJES
# ============================================

@dataclass(frozen=True)
class QueryMsg:
    query_id: int
    origin: int
    terms: TermVector
    ttl_remaining: int
    path: Tuple[int, ...]
    issue_time: float


@dataclass(frozen=True)
class QueryHitMsg:
    query_id: int
    responder: int
    matched_docs: FrozenSet[int]
    reverse_path: Tuple[int, ...]
    hop_cursor: int = 0


@dataclass(frozen=True)
class Delivery:
    """Payload de MessageArrival: un mensaje en tránsito por un enlace"""

    sender: int
    receiver: int
    msg: object

    def log_key(self) -> str:
        kind = "Q" if isinstance(self.msg, QueryMsg) else "H"
        return f"{kind}:{self.msg.query_id}:{self.sender}->{self.receiver}"


@dataclass(frozen=True)
class Beacon:
    time: float
    cpu: float
    u: float
    energy_samples: Optional[Tuple[Tuple[float, float], Tuple[float, float]]]


@dataclass
class PendingQuery:
    terms: TermVector
    expires: float


@dataclass
class OverheardQuery:
    """Pares que ya recibieron (o enviaron) una consulta, según lo escuchado en el medio"""

    peers: Set[int]
    expires: float


# ============================================
# ESTADO DE UN PAR
# ============================================

@dataclass
class PeerState(MobileNode):
    cpu: float = 1.0
    q_cap: int = 50
    queue: Deque[Delivery] = field(default_factory=deque)
    shared_docs: Set[int] = field(default_factory=set)
    profiles: Dict[int, NeighborProfile] = field(default_factory=dict)
    seen_queries: Set[int] = field(default_factory=set)
    pending: Dict[int, PendingQuery] = field(default_factory=dict)
    overheard: Dict[int, OverheardQuery] = field(default_factory=dict)
    beacon: Optional[Beacon] = None
    affinity: Dict[int, AffinitySample] = field(default_factory=dict)
    heard: Dict[int, int] = field(default_factory=dict)
    medium_busy_until: float = 0.0
    busy: bool = False

    @property
    def peer_id(self) -> int:
        return self.node_id

    @property
    def u(self) -> float:
        return min(1.0, len(self.queue) / self.q_cap)


@dataclass
class Resolution:
    query_id: int
    origin: int
    issue_time: float
    first_hit_time: Optional[float] = None
    docs: Set[int] = field(default_factory=set)

    @property
    def resolved(self) -> bool:
        return self.first_hit_time is not None

    @property
    def delay(self) -> Optional[float]:
        return None if self.first_hit_time is None else self.first_hit_time - self.issue_time


@dataclass
class RunStats:
    query_messages: int = 0
    hit_messages: int = 0
    hits_emitted: int = 0
    hits_lost: int = 0
    messages_dropped: int = 0
    duplicates: int = 0
    stale_sends: int = 0
    max_path_len: int = 0
    per_query_tx: Counter = field(default_factory=Counter)
    per_query_receivers: Dict[int, Set[int]] = field(default_factory=lambda: defaultdict(set))

    @property
    def messages_sent(self) -> int:
        return self.query_messages + self.hit_messages


# ============================================
# RED
# ============================================

class ContentDiscoveryNetwork:
    """Pares, transporte y protocolo activo de una corrida"""

    def __init__(
        self,
        sim: Simulator,
        peers: Iterable[PeerState],
        documents: Mapping[int, Document],
        scoring: ScoringParams,
        params: ProtocolParams,
        mobility: MobilityParams,
        theta_match: float,
        trace: bool = False,
    ):
        self.sim = sim
        self.order: List[PeerState] = sorted(peers, key=lambda p: p.node_id)
        self.peers: Dict[int, PeerState] = {p.node_id: p for p in self.order}
        self.documents = documents
        self.scoring = scoring
        self.params = params
        self.mobility = mobility
        self.radio_range = mobility.radio_range
        self.theta_match = theta_match
        self.stats = RunStats()
        self.resolutions: Dict[int, Resolution] = {}
        self.trace_enabled = trace
        self.trace: List[Dict[str, object]] = []
        self.end_time = 0.0
        self.finished = False
        self._last_energy_tick: Optional[float] = None
        self._round: Optional[int] = None
        self._rng = sim.rng("protocol")

        sim.on(EventKind.MOBILITY_TICK, self._on_mobility_tick)
        sim.on(EventKind.ENERGY_TICK, self._on_energy_tick)
        sim.on(EventKind.MESSAGE_ARRIVAL, self._on_arrival)
        sim.on(EventKind.QUEUE_SERVICE, self._on_service)
        sim.on(EventKind.QUERY_ISSUE, self._on_query_issue)
        sim.on(EventKind.RUN_END, self._on_run_end)

    @property
    def protocol(self) -> Protocol:
        return self.scoring.protocol

    def start(self, queries: Iterable[QuerySpec], duration: float) -> int:
        """Programa ticks, consultas y fin de corrida; devuelve cuántas consultas se programaron"""
        self.end_time = duration
        self.sim.schedule_at(0.0, EventKind.MOBILITY_TICK)
        self.sim.schedule_at(0.0, EventKind.ENERGY_TICK)
        issued = 0
        for q in sorted(queries, key=lambda q: (q.issue_time, q.query_id)):
            if q.issue_time <= duration:
                self.sim.schedule_at(q.issue_time, EventKind.QUERY_ISSUE, q)
                issued += 1
        self.sim.schedule_at(duration, EventKind.RUN_END)
        return issued

    # ============================================
    # TICKS PERIÓDICOS
    # ============================================

    def publish_beacon(self, peer: PeerState, t: float) -> Beacon:
        peer.beacon = Beacon(time=t, cpu=peer.cpu, u=peer.u, energy_samples=peer.energy.samples())
        return peer.beacon

    def _on_mobility_tick(self, event: Event, t: float) -> None:
        for peer in self.order:
            position_at(peer, t)
            self.publish_beacon(peer, t)
        self._refresh_tables(t)

        if self.mobility.affinity_mode is AffinityMode.ESTIMATE:
            self._sample_affinities(t)

        nxt = t + self.params.beacon_interval
        if nxt < self.end_time:
            self.sim.schedule_at(nxt, EventKind.MOBILITY_TICK)

    def _refresh_tables(self, t: float) -> None:
        """Ronda de beacons: cada par anota a quién oyó y olvida lo no oído en hello_loss rondas"""
        self._round = 0 if self._round is None else self._round + 1
        for peer in self.order:
            for j in neighbors_of(peer, t, self.order, self.radio_range):
                peer.heard[j] = self._round
            for gone in [j for j, r in peer.heard.items() if self._round - r >= self.params.hello_loss]:
                del peer.heard[gone]

    def neighbor_table(self, peer: PeerState, t: float) -> Set[int]:
        """Vecinos conocidos por beacons; antes de la primera ronda, los vecinos reales"""
        if not peer.connected:
            return set()
        if self._round is None:
            return neighbors_of(peer, t, self.order, self.radio_range)
        return set(peer.heard)

    def _sample_affinities(self, t: float) -> None:
        window = self.mobility.affinity_window
        for peer in self.order:
            current = neighbors_of(peer, t, self.order, self.radio_range)
            for gone in [j for j in peer.affinity if j not in current]:
                del peer.affinity[gone]
            for j in sorted(current):
                sample = peer.affinity.get(j)
                if sample is None:
                    sample = AffinitySample(neighbor=j, samples=deque(maxlen=window))
                    peer.affinity[j] = sample
                sample.add(t, distance(peer, self.peers[j], t))

    def _on_energy_tick(self, event: Event, t: float) -> None:
        dt = 0.0 if self._last_energy_tick is None else t - self._last_energy_tick
        self._last_energy_tick = t
        for peer in self.order:
            if dt > 0.0:
                consume(peer, EnergyAction.IDLE, dt)
            record_energy_sample(peer, t)
            self._prune(peer, t)

        nxt = t + self.params.beacon_interval
        if nxt < self.end_time:
            self.sim.schedule_at(nxt, EventKind.ENERGY_TICK)

    def _prune(self, peer: PeerState, t: float) -> None:
        """Descarta consultas pendientes y escuchadas ya vencidas"""
        for query_id in [q for q, p in peer.pending.items() if p.expires < t]:
            del peer.pending[query_id]
        for query_id in [q for q, o in peer.overheard.items() if o.expires < t]:
            del peer.overheard[query_id]

    def _on_run_end(self, event: Event, t: float) -> None:
        self.finished = True
        logger.debug(f"Fin de corrida en t={t}")

    # ============================================
    # TRANSPORTE Y COLAS
    # ============================================

    def _trace(self, t: float, kind: str, src: int, dst: Optional[int], query_id: int) -> None:
        if self.trace_enabled:
            self.trace.append({"time": t, "type": kind, "from": src, "to": dst, "query_id": query_id})

    def _occupy_medium(self, sender: PeerState, hearers: Iterable[int], t: float) -> float:
        """Espera a que el canal del emisor quede libre; devuelve el instante de inicio"""
        start = max(t, sender.medium_busy_until)
        if self.params.airtime > 0.0:
            end = start + self.params.airtime
            sender.medium_busy_until = end
            for h in hearers:
                other = self.peers[h]
                other.medium_busy_until = max(other.medium_busy_until, end)
        return start

    def _note_overheard(self, hearers: Iterable[int], msg: QueryMsg, sender_id: int, receiver_id: int, t: float) -> None:
        expires = t + self.params.pending_ttl_factor * self.scoring.MaxT
        for h in hearers:
            entry = self.peers[h].overheard.get(msg.query_id)
            if entry is None:
                entry = OverheardQuery(peers=set(), expires=expires)
                self.peers[h].overheard[msg.query_id] = entry
            entry.peers.update((sender_id, receiver_id))

    def _send(self, sender: PeerState, receiver_id: int, msg: object, t: float) -> None:
        # Quienes oyen la trama se fijan antes de cobrar la transmisión
        hearers = neighbors_of(sender, t, self.order, self.radio_range)
        consume(sender, EnergyAction.TX)
        start = self._occupy_medium(sender, hearers, t)
        delivery = Delivery(sender=sender.node_id, receiver=receiver_id, msg=msg)

        if isinstance(msg, QueryMsg):
            self.stats.query_messages += 1
            self.stats.per_query_tx[msg.query_id] += 1
            self.stats.max_path_len = max(self.stats.max_path_len, len(msg.path))
            self._trace(start, "query", sender.node_id, receiver_id, msg.query_id)
            if self.params.overhearing:
                self._note_overheard(hearers, msg, sender.node_id, receiver_id, t)
        else:
            self.stats.hit_messages += 1
            self._trace(start, "hit", sender.node_id, receiver_id, msg.query_id)

        if receiver_id not in hearers:
            # Entrada vieja de la tabla: el destinatario ya no está al alcance
            self.stats.stale_sends += 1
            self._lose(delivery, start)
            return
        if isinstance(msg, QueryMsg):
            self.stats.per_query_receivers[msg.query_id].add(receiver_id)
        self.sim.schedule_at(start + self.params.link_latency, EventKind.MESSAGE_ARRIVAL, delivery)

    def _service_time(self, peer: PeerState) -> float:
        return 1.0 / (peer.cpu * self.params.base_service_rate)

    def _enqueue(self, peer: PeerState, delivery: Delivery, t: float) -> None:
        if len(peer.queue) >= peer.q_cap:
            raise QueueOverflow(f"cola llena en el par {peer.node_id}")
        peer.queue.append(delivery)
        if not peer.busy:
            peer.busy = True
            self.sim.schedule_at(t + self._service_time(peer), EventKind.QUEUE_SERVICE, peer.node_id)

    def _lose(self, delivery: Delivery, t: float) -> None:
        """Mensaje que llega a (o espera en) un par apagado"""
        if isinstance(delivery.msg, QueryHitMsg):
            self.stats.hits_lost += 1
            self._trace(t, "hit_lost", delivery.sender, delivery.receiver, delivery.msg.query_id)
        else:
            self.stats.messages_dropped += 1
            self._trace(t, "drop", delivery.sender, delivery.receiver, delivery.msg.query_id)

    def _on_arrival(self, event: Event, t: float) -> None:
        delivery: Delivery = event.payload
        peer = self.peers[delivery.receiver]
        if not peer.connected:
            self._lose(delivery, t)
            return
        consume(peer, EnergyAction.RX)
        try:
            self._enqueue(peer, delivery, t)
        except QueueOverflow:
            self.stats.messages_dropped += 1
            self._trace(t, "drop", delivery.sender, delivery.receiver, delivery.msg.query_id)

    def _on_service(self, event: Event, t: float) -> None:
        peer = self.peers[event.payload]
        if not peer.connected:
            for delivery in peer.queue:
                self._lose(delivery, t)
            peer.queue.clear()
            peer.busy = False
            return

        delivery = peer.queue.popleft()
        if isinstance(delivery.msg, QueryMsg):
            self.handle_query(peer.node_id, delivery.msg, t)
        else:
            self.handle_query_hit(peer.node_id, delivery.msg, t)

        if peer.queue:
            self.sim.schedule_at(t + self._service_time(peer), EventKind.QUEUE_SERVICE, peer.node_id)
        else:
            peer.busy = False

    # ============================================
    # CONSULTAS
    # ============================================

    def _on_query_issue(self, event: Event, t: float) -> None:
        spec: QuerySpec = event.payload
        self.issue_query(spec.origin_peer, spec.terms, t, spec.query_id)

    def _local_matches(self, peer: PeerState, terms: TermVector) -> FrozenSet[int]:
        return frozenset(
            doc_id for doc_id in peer.shared_docs if matches(self.documents[doc_id], terms, self.theta_match)
        )

    def _remember(self, peer: PeerState, query_id: int, terms: TermVector, t: float) -> None:
        ttl = self.params.pending_ttl_factor * self.scoring.MaxT
        peer.pending[query_id] = PendingQuery(terms=terms, expires=t + ttl)

    def _resolve(self, query_id: int, t: float, docs: Iterable[int]) -> None:
        res = self.resolutions[query_id]
        if res.first_hit_time is None:
            res.first_hit_time = t
            logger.debug(f"Consulta {query_id} resuelta en {t - res.issue_time:.4f} s")
        res.docs.update(docs)

    def issue_query(self, origin: int, q: TermVector, t: float, query_id: int) -> None:
        peer = self.peers[origin]
        self.resolutions[query_id] = Resolution(query_id=query_id, origin=origin, issue_time=t)
        if not peer.connected:
            return

        peer.seen_queries.add(query_id)
        self._remember(peer, query_id, q, t)
        local = self._local_matches(peer, q)
        if local:
            self._resolve(query_id, t, local)

        msg = QueryMsg(
            query_id=query_id, origin=origin, terms=q, ttl_remaining=self.scoring.TTL, path=(origin,), issue_time=t
        )
        self._forward(peer, msg, t)

    def _forward(self, peer: PeerState, msg: QueryMsg, t: float) -> None:
        if msg.ttl_remaining <= 0 or not peer.connected:
            return
        if self.protocol is Protocol.CDP:
            next_hops = self.cdp_forward(peer.node_id, msg, t)
        elif self.protocol is Protocol.GOSSIPING_LB:
            next_hops = self.gossiping_lb_forward(peer.node_id, msg, t)
        else:
            next_hops = self.flooding_forward(peer.node_id, msg, t)

        for hop in next_hops:
            if not peer.connected:
                # la batería se agotó con la copia anterior
                break
            copy = replace(msg, ttl_remaining=msg.ttl_remaining - 1, path=msg.path + (hop,))
            self._send(peer, hop, copy, t)

    def eligible_neighbors(self, peer: PeerState, msg: QueryMsg, t: float) -> List[int]:
        """
        Vecinos de la tabla que no están en el camino ni se sabe que ya tienen
        la consulta (se excluye antes de tomar K).
        """
        excluded = set(msg.path)
        overheard = peer.overheard.get(msg.query_id)
        if overheard is not None:
            excluded |= overheard.peers
        return sorted(j for j in self.neighbor_table(peer, t) if j not in excluded)

    # ============================================
    # POLÍTICAS DE REENVÍO
    # ============================================

    def _neighbor_affinity(self, peer: PeerState, neighbor: PeerState, t: float) -> float:
        if self.mobility.affinity_mode is AffinityMode.ORACLE:
            try:
                return affinity_oracle(peer, neighbor, t, self.radio_range)
            except NotNeighbors:
                # entrada de tabla de un vecino que ya se fue
                return 0.0
        sample = peer.affinity.get(neighbor.node_id)
        if sample is None:
            return AFFINITY_CAP
        try:
            return affinity_estimate(sample, t, self.radio_range)
        except InsufficientSamples:
            return AFFINITY_CAP

    def _beacon_of(self, neighbor: PeerState, t: float) -> Beacon:
        return neighbor.beacon if neighbor.beacon is not None else self.publish_beacon(neighbor, t)

    def neighbor_score(self, peer: PeerState, neighbor: PeerState, q: TermVector, t: float) -> float:
        beacon = self._beacon_of(neighbor, t)
        S = stability(
            rtime_from_samples(beacon.energy_samples, self.scoring.MinEnergy),
            self._neighbor_affinity(peer, neighbor, t),
        )
        profile = peer.profiles.get(neighbor.node_id)
        psim_val = psim(profile, q) if profile is not None else 0.0
        return pertinence(S, load(beacon.cpu, beacon.u), psim_val, self.scoring)

    def cdp_forward(self, peer_id: int, msg: QueryMsg, t: float) -> List[int]:
        peer = self.peers[peer_id]
        scored = [
            (j, self.neighbor_score(peer, self.peers[j], msg.terms, t))
            for j in self.eligible_neighbors(peer, msg, t)
        ]
        # pertinencia nula: enlace ya roto, batería agotada o cola llena sin perfil
        return select_top_k([(j, s) for j, s in scored if s > 0.0], self.scoring.K)

    def gossiping_lb_forward(self, peer_id: int, msg: QueryMsg, t: float) -> List[int]:
        peer = self.peers[peer_id]
        eligible = self.eligible_neighbors(peer, msg, t)
        if len(eligible) <= 1:
            return eligible
        weights = np.array(
            [(1.0 - self._beacon_of(self.peers[j], t).u) + self.params.gossip_epsilon for j in eligible]
        )
        size = min(self.scoring.K, len(eligible))
        picked = self._rng.gen.choice(len(eligible), size=size, replace=False, p=weights / weights.sum())
        return [eligible[int(i)] for i in picked]

    def flooding_forward(self, peer_id: int, msg: QueryMsg, t: float) -> List[int]:
        peer = self.peers[peer_id]
        eligible = self.eligible_neighbors(peer, msg, t)
        if len(eligible) <= self.scoring.K:
            return eligible
        picked = self._rng.gen.choice(len(eligible), size=self.scoring.K, replace=False)
        return [eligible[int(i)] for i in picked]

    # ============================================
    # MANEJADORES DE MENSAJES
    # ============================================

    def handle_query(self, peer_id: int, msg: QueryMsg, t: float) -> None:
        peer = self.peers[peer_id]
        if msg.query_id in peer.seen_queries:
            self.stats.duplicates += 1
            return
        peer.seen_queries.add(msg.query_id)
        self._remember(peer, msg.query_id, msg.terms, t)

        matched = self._local_matches(peer, msg.terms)
        if matched:
            self.stats.hits_emitted += 1
            hit = QueryHitMsg(
                query_id=msg.query_id,
                responder=peer_id,
                matched_docs=matched,
                reverse_path=tuple(reversed(msg.path)),
                hop_cursor=0,
            )
            self._relay_hit(peer, hit, t)

        # Se sigue reenviando aunque haya acierto local
        if msg.ttl_remaining > 0:
            self._forward(peer, msg, t)

    def _next_hop(self, peer: PeerState, hit: QueryHitMsg, t: float) -> int:
        next_id = hit.reverse_path[hit.hop_cursor + 1]
        if not in_range(peer, self.peers[next_id], t, self.radio_range):
            raise BrokenReversePath(f"salto {peer.node_id}->{next_id} roto para la consulta {hit.query_id}")
        return next_id

    def _relay_hit(self, peer: PeerState, hit: QueryHitMsg, t: float) -> None:
        try:
            next_id = self._next_hop(peer, hit, t)
        except BrokenReversePath as exc:
            self.stats.hits_lost += 1
            self._trace(t, "hit_lost", peer.node_id, hit.reverse_path[hit.hop_cursor + 1], hit.query_id)
            logger.debug(f"⚠️ {exc}")
            return
        self._send(peer, next_id, replace(hit, hop_cursor=hit.hop_cursor + 1), t)

    def handle_query_hit(self, peer_id: int, hit: QueryHitMsg, t: float) -> None:
        peer = self.peers[peer_id]
        delivering = hit.reverse_path[hit.hop_cursor - 1]

        pending = peer.pending.get(hit.query_id)
        if pending is not None and pending.expires < t:
            del peer.pending[hit.query_id]
            pending = None
        if pending is not None:
            profile = peer.profiles.get(delivering)
            if profile is None:
                profile = NeighborProfile(neighbor=delivering, capacity=self.scoring.profile_capacity)
                peer.profiles[delivering] = profile
            profile.add(pending.terms)

        if hit.hop_cursor == len(hit.reverse_path) - 1:
            self._resolve(hit.query_id, t, hit.matched_docs)
        else:
            self._relay_hit(peer, hit, t)
