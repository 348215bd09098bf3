# -*- coding: utf-8 -*-
"""
Movilidad, Conectividad y Energía
=================================

- Random Waypoint dentro de un área rectangular (posiciones evaluadas de forma
  perezosa: cada nodo avanza su trayectoria hasta el instante pedido).
- Conectividad por rango de radio (distancia <= rango => vecinos).
- Batería con costos lineales por transmisión, recepción y reposo.
- Predictores de vida útil: afinidad A_ij(t) (oráculo cinemático o estimador
  por pendiente de distancia) y tiempo restante de batería Rtime.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Iterable, Optional, Set, Tuple

from engine import RngStream
from exceptions import BadSampleOrder, InsufficientSamples, NotNeighbors

logger = logging.getLogger("cdpsim.mobility")

AFFINITY_CAP = 1e6
RTIME_CAP = 1e6

Point = Tuple[float, float]


# ============================================
# PARÁMETROS
# ============================================

class AffinityMode(str, Enum):
    ORACLE = "oracle"
    ESTIMATE = "estimate"


@dataclass
class MobilityParams:
    area_width: float = 500.0
    area_height: float = 500.0
    speed_spread: float = 0.5      # velocidad de tramo en [(1-s)·v, (1+s)·v]
    pause_max: float = 2.0
    radio_range: float = 100.0
    enabled: bool = True
    affinity_mode: AffinityMode = AffinityMode.ORACLE
    affinity_window: int = 4


@dataclass
class EnergyParams:
    initial_min: float = 80.0
    initial_max: float = 100.0
    tx_cost: float = 0.05
    rx_cost: float = 0.025
    idle_rate: float = 0.001
    shutdown: float = 5.0
    enabled: bool = True
    sample_window: int = 10


# ============================================
# ESTADOS
# ============================================

@dataclass
class KinematicState:
    position: Point
    velocity: Point = (0.0, 0.0)
    waypoint: Optional[Point] = None
    speed: float = 0.0
    pause_until: float = 0.0
    leg_start: Optional[Point] = None
    leg_start_time: float = 0.0
    arrival_time: float = 0.0
    t: float = 0.0

    @classmethod
    def stationary(cls, position: Point, t: float = 0.0) -> "KinematicState":
        return cls(position=position, waypoint=position, pause_until=math.inf, t=t)

    @classmethod
    def moving(cls, position: Point, waypoint: Point, speed: float, t: float = 0.0) -> "KinematicState":
        """Estado en mitad de un tramo (útil para construir escenarios a mano)"""
        state = cls(position=position, t=t, pause_until=t)
        _start_leg(state, waypoint, speed, t)
        return state


@dataclass
class EnergyState:
    energy: float
    tx_cost: float = 0.05
    rx_cost: float = 0.025
    idle_rate: float = 0.001
    shutdown: float = 5.0
    enabled: bool = True
    connected: bool = True
    history: Deque[Tuple[float, float]] = field(default_factory=lambda: deque(maxlen=11))

    @classmethod
    def from_params(cls, energy: float, params: EnergyParams) -> "EnergyState":
        return cls(
            energy=energy,
            tx_cost=params.tx_cost,
            rx_cost=params.rx_cost,
            idle_rate=params.idle_rate,
            shutdown=params.shutdown,
            enabled=params.enabled,
            history=deque(maxlen=params.sample_window + 1),
        )

    @property
    def last_sample(self) -> Optional[Tuple[float, float]]:
        """(t_k, Energy(t_k)): la muestra más antigua de la ventana"""
        return self.history[0] if self.history else None

    def samples(self) -> Optional[Tuple[Tuple[float, float], Tuple[float, float]]]:
        """((t_k, e_k), (t_p, e_p)) o None si aún no hay dos muestras"""
        if len(self.history) < 2:
            return None
        return self.history[0], self.history[-1]


@dataclass
class AffinitySample:
    neighbor: int
    samples: Deque[Tuple[float, float]] = field(default_factory=lambda: deque(maxlen=4))

    def add(self, t: float, distance_m: float) -> None:
        # Tiempos estrictamente crecientes
        if self.samples and t <= self.samples[-1][0]:
            return
        self.samples.append((t, distance_m))


class EnergyAction(str, Enum):
    TX = "tx"
    RX = "rx"
    IDLE = "idle"


# ============================================
# RANDOM WAYPOINT
# ============================================

def _start_leg(state: KinematicState, waypoint: Point, speed: float, t: float) -> None:
    x, y = state.position
    dx, dy = waypoint[0] - x, waypoint[1] - y
    dist = math.hypot(dx, dy)
    state.leg_start = state.position
    state.leg_start_time = t
    state.waypoint = waypoint
    state.speed = speed
    if dist == 0.0 or speed <= 0.0:
        state.velocity = (0.0, 0.0)
        state.arrival_time = t
    else:
        state.velocity = (dx / dist * speed, dy / dist * speed)
        state.arrival_time = t + dist / speed
    state.t = t


class RandomWaypoint:
    """Modelo Random Waypoint: destino uniforme, velocidad uniforme por tramo, pausa uniforme"""

    def __init__(self, params: MobilityParams, v_nominal: float):
        self.params = params
        self.v_nominal = v_nominal
        self.v_min = max(0.0, (1.0 - params.speed_spread) * v_nominal)
        self.v_max = (1.0 + params.speed_spread) * v_nominal
        self.static = (not params.enabled) or v_nominal <= 0.0

    def random_point(self, rng: RngStream) -> Point:
        return (rng.uniform(0.0, self.params.area_width), rng.uniform(0.0, self.params.area_height))

    def initial_state(self, rng: RngStream, position: Optional[Point] = None) -> KinematicState:
        pos = position if position is not None else self.random_point(rng)
        if self.static:
            return KinematicState.stationary(pos)
        # pause_until = 0: el primer tramo arranca en t=0
        return KinematicState(position=pos, waypoint=pos, pause_until=0.0, t=0.0)

    def _clamp(self, p: Point) -> Point:
        return (
            min(max(p[0], 0.0), self.params.area_width),
            min(max(p[1], 0.0), self.params.area_height),
        )

    def advance(self, state: KinematicState, t: float, rng: RngStream) -> Point:
        """Avanza el estado hasta t (t no decreciente por nodo) y devuelve la posición"""
        if t <= state.t:
            return state.position

        while True:
            if state.velocity == (0.0, 0.0):
                # En pausa (o estático)
                if self.static or t <= state.pause_until:
                    state.t = t
                    return state.position
                start = state.pause_until
                _start_leg(state, self.random_point(rng), rng.uniform(self.v_min, self.v_max), start)
                if state.velocity == (0.0, 0.0):
                    # Tramo degenerado: nueva pausa y se vuelve a sortear
                    state.pause_until = start + rng.uniform(0.0, self.params.pause_max)
                continue

            if t < state.arrival_time:
                span = state.arrival_time - state.leg_start_time
                frac = (t - state.leg_start_time) / span
                sx, sy = state.leg_start
                wx, wy = state.waypoint
                state.position = self._clamp((sx + (wx - sx) * frac, sy + (wy - sy) * frac))
                state.t = t
                return state.position

            # Llegada al waypoint
            state.position = state.waypoint
            state.t = state.arrival_time
            state.velocity = (0.0, 0.0)
            state.pause_until = state.arrival_time + rng.uniform(0.0, self.params.pause_max)


# ============================================
# NODO MÓVIL
# ============================================

@dataclass
class MobileNode:
    node_id: int
    kinematics: KinematicState
    energy: EnergyState
    mobility: Optional[RandomWaypoint] = None
    rng: Optional[RngStream] = None

    @property
    def connected(self) -> bool:
        return self.energy.connected


def position_at(node: MobileNode, t: float) -> Point:
    if node.mobility is None:
        return node.kinematics.position
    return node.mobility.advance(node.kinematics, t, node.rng)


def distance(a: MobileNode, b: MobileNode, t: float) -> float:
    ax, ay = position_at(a, t)
    bx, by = position_at(b, t)
    return math.hypot(bx - ax, by - ay)


def within_range(dx: float, dy: float, radio_range: float) -> bool:
    """Única comparación de alcance del simulador: distancia al cuadrado, borde inclusivo"""
    return dx * dx + dy * dy <= radio_range * radio_range


def in_range(a: MobileNode, b: MobileNode, t: float, radio_range: float) -> bool:
    """Enlace utilizable: ambos encendidos y a distancia <= rango"""
    if not (a.connected and b.connected):
        return False
    ax, ay = position_at(a, t)
    bx, by = position_at(b, t)
    return within_range(bx - ax, by - ay, radio_range)


def neighbors_of(node: MobileNode, t: float, nodes: Iterable[MobileNode], radio_range: float) -> Set[int]:
    if not node.connected:
        return set()
    x, y = position_at(node, t)
    result = set()
    for other in nodes:
        if other.node_id == node.node_id or not other.connected:
            continue
        ox, oy = position_at(other, t)
        if within_range(ox - x, oy - y, radio_range):
            result.add(other.node_id)
    return result


# ============================================
# AFINIDAD A_ij(t)
# ============================================

def affinity_oracle(i: MobileNode, j: MobileNode, t: float, radio_range: float) -> float:
    """
    Tiempo hasta que j sale del rango de i suponiendo velocidades constantes.

    Resuelve |Δp + Δv·τ| = rango y devuelve la raíz positiva; AFFINITY_CAP si
    la velocidad relativa es nula.
    """
    pix, piy = position_at(i, t)
    pjx, pjy = position_at(j, t)
    dpx, dpy = pjx - pix, pjy - piy
    if not within_range(dpx, dpy, radio_range):
        raise NotNeighbors(f"pares {i.node_id} y {j.node_id} fuera de rango en t={t}")
    # dentro del rango c <= 0 salvo redondeo en el borde
    c = min(dpx * dpx + dpy * dpy - radio_range * radio_range, 0.0)

    vix, viy = i.kinematics.velocity
    vjx, vjy = j.kinematics.velocity
    dvx, dvy = vjx - vix, vjy - viy
    a = dvx * dvx + dvy * dvy
    if a == 0.0:
        return AFFINITY_CAP

    b = 2.0 * (dpx * dvx + dpy * dvy)
    disc = max(b * b - 4.0 * a * c, 0.0)
    tau = (-b + math.sqrt(disc)) / (2.0 * a)
    return min(max(tau, 0.0), AFFINITY_CAP)


def affinity_estimate(sample_window: AffinitySample, t: float, radio_range: float) -> float:
    """Extrapolación lineal de la pendiente de distancia con las dos últimas muestras"""
    if len(sample_window.samples) < 2:
        raise InsufficientSamples(
            f"vecino {sample_window.neighbor}: {len(sample_window.samples)} muestra(s), se requieren 2"
        )
    (t0, d0), (t1, d1) = sample_window.samples[-2], sample_window.samples[-1]
    slope = (d1 - d0) / (t1 - t0)
    if slope <= 0.0:
        return AFFINITY_CAP
    remaining = (radio_range - d1) / slope
    return min(max(remaining, 0.0), AFFINITY_CAP)


# ============================================
# ENERGÍA
# ============================================

def consume(node: MobileNode, action: EnergyAction, dt: float = 0.0) -> float:
    """Descuenta el costo de la acción; apaga el nodo al cruzar el umbral de apagado"""
    state = node.energy
    if not state.connected or not state.enabled:
        return state.energy

    if action is EnergyAction.TX:
        cost = state.tx_cost
    elif action is EnergyAction.RX:
        cost = state.rx_cost
    else:
        cost = state.idle_rate * dt

    state.energy = max(0.0, state.energy - cost)
    if state.energy <= state.shutdown:
        state.connected = False
        logger.debug(f"🔋 Par {node.node_id} sin batería (energía={state.energy:.3f})")
    return state.energy


def record_energy_sample(node: MobileNode, t: float) -> None:
    history = node.energy.history
    if history and t <= history[-1][0]:
        return
    history.append((t, node.energy.energy))


def rtime(t_k: float, energy_k: float, t_p: float, energy_p: float, min_energy: float) -> float:
    """
    Tiempo restante de batería hasta MinEnergy:
    [E(t_p) - MinEnergy] × (t_p - t_k) / (E(t_k) - E(t_p)), acotado a [0, RTIME_CAP]
    """
    if t_k >= t_p:
        raise BadSampleOrder(f"t_k={t_k} debe ser menor que t_p={t_p}")
    if energy_p <= min_energy:
        return 0.0
    drain = energy_k - energy_p
    if drain <= 0.0:
        return RTIME_CAP
    value = (energy_p - min_energy) * (t_p - t_k) / drain
    return min(max(value, 0.0), RTIME_CAP)


def rtime_from_samples(
    samples: Optional[Tuple[Tuple[float, float], Tuple[float, float]]], min_energy: float
) -> float:
    """Rtime a partir de la ventana publicada; sin dos muestras no hay drenaje medible"""
    if samples is None:
        return RTIME_CAP
    (t_k, e_k), (t_p, e_p) = samples
    return rtime(t_k, e_k, t_p, e_p, min_energy)



def node_rtime(node: MobileNode, min_energy: float) -> float:
    return rtime_from_samples(node.energy.samples(), min_energy)
