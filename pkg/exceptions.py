# -*- coding: utf-8 -*-
"""
Excepciones del simulador CDP
Todas heredan de SimulationError para que la CLI pueda distinguirlas
de fallos de E/S u otros errores inesperados.
"""


class SimulationError(Exception):
    """Error base del simulador"""


class ConfigError(SimulationError, ValueError):
    """Configuración inválida (clave desconocida, valor mal formado, rango)"""


class BadConfig(ConfigError):
    """Parámetros de generación de carga inconsistentes"""


# =========================
# MOTOR DE EVENTOS
# =========================

class PastTime(SimulationError, ValueError):
    """Se intentó programar un evento antes del reloj actual"""


# =========================
# MOVILIDAD / ENERGÍA
# =========================

class NotNeighbors(SimulationError, ValueError):
    """Los pares no están dentro del rango de radio"""


class InsufficientSamples(SimulationError, ValueError):
    """Menos de dos muestras de distancia para estimar la afinidad"""


class BadSampleOrder(SimulationError, ValueError):
    """Muestras de energía con t_k >= t_p"""


# =========================
# CONTENIDO / SCORING
# =========================

class EmptyVector(SimulationError, ValueError):
    """Vector de términos vacío en una similitud coseno"""


class BadUtilization(SimulationError, ValueError):
    """Utilización de cola fuera de [0, 1]"""


# =========================
# PROTOCOLOS / MÉTRICAS
# =========================

class QueueOverflow(SimulationError):
    """Mensaje descartado: cola del par llena"""


class BrokenReversePath(SimulationError):
    """El siguiente salto del camino inverso está fuera de rango o apagado"""


class NoResolvedQueries(SimulationError):
    """No hay consultas resueltas para promediar el retardo"""
