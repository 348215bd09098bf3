# -*- coding: utf-8 -*-
"""
Motor de Eventos Discretos
==========================

Reloj virtual, cola de eventos ordenada por (time, seq) y flujos aleatorios
con nombre. Todo lo demás del simulador son manejadores de eventos.

USO:
    sim = Simulator(seed=7)
    sim.on(EventKind.QUERY_ISSUE, manejador)
    sim.schedule(Event(time=5.0, kind=EventKind.QUERY_ISSUE, payload=3))
    sim.run_until(600.0)
"""

from __future__ import annotations

import hashlib
import heapq
import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from exceptions import PastTime


class EventKind(str, Enum):
    MOBILITY_TICK = "MobilityTick"
    ENERGY_TICK = "EnergyTick"
    MESSAGE_ARRIVAL = "MessageArrival"
    QUEUE_SERVICE = "QueueService"
    QUERY_ISSUE = "QueryIssue"
    RUN_END = "RunEnd"


@dataclass(frozen=True)
class Event:
    time: float
    kind: EventKind
    payload: Any = None


@dataclass(frozen=True)
class EventHandle:
    seq: int
    time: float


Handler = Callable[[Event, float], None]


def _label_key(label: str) -> int:
    """Entero estable derivado de la etiqueta (hash() de Python no es estable entre procesos)"""
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "big")


class RngStream:
    """
    Flujo aleatorio determinista en (semilla maestra, etiqueta).

    Envuelve un numpy.random.Generator; `gen` queda expuesto para las
    operaciones vectorizadas (choice con pesos, muestreo sin reemplazo).
    """

    def __init__(self, master_seed: int, label: str):
        self.label = label
        self.master_seed = master_seed
        self.gen = np.random.default_rng(np.random.SeedSequence([master_seed, _label_key(label)]))

    def uniform(self, a: float, b: float) -> float:
        return float(self.gen.uniform(a, b))

    def random(self) -> float:
        return float(self.gen.random())

    def integers(self, low: int, high: int) -> int:
        """Entero en [low, high)"""
        return int(self.gen.integers(low, high))

    def choice(self, seq):
        return seq[int(self.gen.integers(0, len(seq)))]

    def __repr__(self) -> str:
        return f"RngStream(label={self.label!r}, seed={self.master_seed})"


class Simulator:
    """Bucle de eventos de una corrida. Un solo hilo; nada compartido entre corridas."""

    def __init__(self, seed: int = 0, record_log: bool = False):
        self.seed = int(seed)
        self._now = 0.0
        self._queue: List[Tuple[float, int, Event]] = []
        self._next_seq = 0
        self._cancelled: set[int] = set()
        self._handlers: Dict[EventKind, Handler] = {}
        self._streams: Dict[str, RngStream] = {}
        self.record_log = record_log
        self.event_log: List[Tuple[float, int, str, str]] = []
        self.unhandled = 0

    # ============================================
    # RELOJ Y COLA
    # ============================================

    def now(self) -> float:
        return self._now

    def __len__(self) -> int:
        return len(self._queue)

    def on(self, kind: EventKind, handler: Handler) -> None:
        """Registra el manejador de un tipo de evento (uno por tipo)"""
        self._handlers[kind] = handler

    def schedule(self, event: Event) -> EventHandle:
        if event.time < self._now:
            raise PastTime(f"evento {event.kind.value} en t={event.time} < reloj {self._now}")
        seq = self._next_seq
        self._next_seq += 1
        heapq.heappush(self._queue, (float(event.time), seq, event))
        return EventHandle(seq=seq, time=float(event.time))

    def schedule_at(self, time: float, kind: EventKind, payload: Any = None) -> EventHandle:
        return self.schedule(Event(time=time, kind=kind, payload=payload))

    def cancel(self, handle: EventHandle) -> None:
        self._cancelled.add(handle.seq)

    def run_until(self, t_end: float) -> int:
        """Despacha todos los eventos con time <= t_end (inclusivo) y deja el reloj en t_end"""
        if t_end < self._now:
            raise PastTime(f"run_until({t_end}) con reloj en {self._now}")

        dispatched = 0
        while self._queue and self._queue[0][0] <= t_end:
            time, seq, event = heapq.heappop(self._queue)
            if seq in self._cancelled:
                self._cancelled.discard(seq)
                continue
            self._now = time
            if self.record_log:
                self.event_log.append((time, seq, event.kind.value, _digest(event.payload)))
            handler = self._handlers.get(event.kind)
            if handler is None:
                self.unhandled += 1
            else:
                handler(event, time)
            dispatched += 1

        self._now = float(t_end)
        return dispatched

    # ============================================
    # FLUJOS ALEATORIOS
    # ============================================

    def rng(self, label: str) -> RngStream:
        """Mismo objeto para la misma etiqueta dentro de la corrida"""
        stream = self._streams.get(label)
        if stream is None:
            stream = RngStream(self.seed, label)
            self._streams[label] = stream
        return stream


def _digest(payload: Any) -> str:
    if payload is None:
        return ""
    describe = getattr(payload, "log_key", None)
    if callable(describe):
        return describe()
    return repr(payload)


def dump_event_log(event_log: List[Tuple[float, int, str, str]], fh) -> None:
    """Escribe el log de despacho como JSON lines"""
    for time, seq, kind, digest in event_log:
        fh.write(json.dumps({"time": time, "seq": seq, "kind": kind, "payload": digest}, sort_keys=True))
        fh.write("\n")

