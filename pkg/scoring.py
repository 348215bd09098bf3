# -*- coding: utf-8 -*-
"""
Funciones de Puntuación de Vecinos
==================================

Funciones puras (sin estado global) para elegir los K vecinos de reenvío:

- psim: similitud media entre la consulta y el perfil del vecino
- load: carga según cpu y utilización de cola
- stability: min(Rtime, afinidad)
- pertinence: combinación acotada por MaxT
- select_top_k: los K mejores, empates por id ascendente
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Iterable, List, Tuple

from content import TermVector, cosine
from exceptions import BadUtilization, ConfigError


class Protocol(str, Enum):
    CDP = "cdp"
    GOSSIPING_LB = "gossiping_lb"
    FLOODING = "flooding"


@dataclass
class ScoringParams:
    K: int = 3
    TTL: int = 3
    L: float = 0.5
    Sim: float = 0.5
    MaxT: float = 5.0
    MinEnergy: float = 20.0
    protocol: Protocol = Protocol.CDP
    profile_capacity: int = 100
    literal_eq5: bool = False

    def __post_init__(self) -> None:
        errores = []
        if self.K < 1:
            errores.append("K debe ser >= 1")
        if self.TTL < 1:
            errores.append("TTL debe ser >= 1")
        if self.L < 0 or self.Sim < 0 or self.L + self.Sim <= 0:
            errores.append("L y Sim deben ser >= 0 con L + Sim > 0")
        if self.MaxT <= 0:
            errores.append("MaxT debe ser > 0")
        if self.profile_capacity < 1:
            errores.append("profile_capacity debe ser >= 1")
        if errores:
            raise ConfigError("; ".join(errores))


@dataclass
class NeighborProfile:
    """Consultas recientes que el vecino ayudó a responder (FIFO, capacidad P_cap)"""

    neighbor: int
    capacity: int = 100
    recent_queries: Deque[TermVector] = field(default_factory=deque)

    def __post_init__(self) -> None:
        self.recent_queries = deque(self.recent_queries, maxlen=self.capacity)

    def add(self, q: TermVector) -> None:
        self.recent_queries.append(q)

    def __len__(self) -> int:
        return len(self.recent_queries)


def psim(profile: NeighborProfile, q: TermVector) -> float:
    """Media del coseno entre q y cada consulta del perfil; perfil vacío => 0"""
    if not profile.recent_queries:
        return 0.0
    total = sum(cosine(qk, q) for qk in profile.recent_queries)
    return total / len(profile.recent_queries)


def load(cpu: float, u: float) -> float:
    """Load = 1 / (cpu·(1 − u) + 1); en (0, 1], 1 con la cola llena"""
    if not 0.0 <= u <= 1.0:
        raise BadUtilization(f"utilización {u} fuera de [0, 1]")
    if cpu <= 0:
        raise ValueError(f"cpu debe ser > 0 (recibido {cpu})")
    return 1.0 / (cpu * (1.0 - u) + 1.0)


def stability(rtime_j: float, affinity_ij: float) -> float:
    return min(rtime_j, affinity_ij)


def pertinence(S: float, load_val: float, psim_val: float, params: ScoringParams) -> float:
    """
    min(S, MaxT) × (L × (1 − Load) + Sim × Psim).

    Con literal_eq5 el término de carga se suma tal cual (L × Load).
    """
    load_term = load_val if params.literal_eq5 else 1.0 - load_val
    return min(S, params.MaxT) * (params.L * load_term + params.Sim * psim_val)


def select_top_k(candidates: Iterable[Tuple[int, float]], K: int) -> List[int]:
    ranked = sorted(candidates, key=lambda c: (-c[1], c[0]))
    return [peer_id for peer_id, _ in ranked[:K]]
