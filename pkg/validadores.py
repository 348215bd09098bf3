# -*- coding: utf-8 -*-
"""
Validadores para la Configuración de Escenarios
"""


def validar_entero(valor, nombre, minimo=None, maximo=None):
    """
    Valida un entero dentro de [minimo, maximo]
    Retorna: (es_valido, mensaje_error)
    """
    if isinstance(valor, bool):
        return False, f"{nombre} debe ser un entero"
    try:
        numero = int(valor)
    except (ValueError, TypeError):
        return False, f"{nombre} debe ser un entero"

    if numero != valor and not isinstance(valor, str):
        return False, f"{nombre} debe ser un entero"

    if minimo is not None and numero < minimo:
        return False, f"{nombre} debe ser >= {minimo}"

    if maximo is not None and numero > maximo:
        return False, f"{nombre} no puede exceder {maximo}"

    return True, None


def validar_real(valor, nombre, minimo=None, maximo=None, estricto=False):
    """
    Valida un número real; con estricto=True el mínimo queda excluido
    """
    try:
        numero = float(valor)
    except (ValueError, TypeError):
        return False, f"{nombre} inválido"

    if numero != numero:
        return False, f"{nombre} no puede ser NaN"

    if minimo is not None:
        if estricto and numero <= minimo:
            return False, f"{nombre} debe ser > {minimo}"
        if not estricto and numero < minimo:
            return False, f"{nombre} debe ser >= {minimo}"

    if maximo is not None and numero > maximo:
        return False, f"{nombre} no puede exceder {maximo}"

    return True, None


def validar_rango(minimo, maximo, nombre):
    """Un par (min, max) con min <= max"""
    try:
        if float(minimo) > float(maximo):
            return False, f"{nombre}: el mínimo ({minimo}) supera al máximo ({maximo})"
    except (ValueError, TypeError):
        return False, f"{nombre}: rango inválido"
    return True, None


def validar_cpu(opciones):
    if not opciones:
        return False, "cpu_choices no puede estar vacío"
    for cpu in opciones:
        es_valido, mensaje = validar_real(cpu, "cpu_choices", minimo=0, estricto=True)
        if not es_valido:
            return False, mensaje
    return True, None


# ============================================
# FUNCIÓN HELPER PARA EL ESCENARIO
# ============================================

def validar_escenario(cfg):
    """
    Valida todos los parámetros de un ScenarioConfig

    Args:
        cfg: ScenarioConfig resuelto (defaults + archivo + overrides)

    Returns:
        (es_valido, lista_errores)
    """
    errores = []

    def revisar(resultado):
        es_valido, mensaje = resultado
        if not es_valido and mensaje:
            errores.append(mensaje)

    # Corrida
    revisar(validar_entero(cfg.n_peers, "n_peers", minimo=2))
    revisar(validar_real(cfg.v_nominal, "v_nominal", minimo=0))
    revisar(validar_entero(cfg.seed, "seed", minimo=0))

    wl = cfg.workload
    horizonte = wl.issue_end + cfg.scoring.MaxT
    es_valido, mensaje = validar_real(cfg.run_duration, "run_duration", minimo=0, estricto=True)
    if not es_valido:
        errores.append(mensaje)
    elif cfg.run_duration <= horizonte:
        errores.append(
            f"run_duration ({cfg.run_duration}) debe superar issue_end + MaxT ({horizonte})"
        )

    # Movilidad
    mob = cfg.mobility
    revisar(validar_real(mob.area_width, "mobility.area_width", minimo=0, estricto=True))
    revisar(validar_real(mob.area_height, "mobility.area_height", minimo=0, estricto=True))
    revisar(validar_real(mob.radio_range, "mobility.radio_range", minimo=0, estricto=True))
    revisar(validar_real(mob.speed_spread, "mobility.speed_spread", minimo=0, maximo=1))
    revisar(validar_real(mob.pause_max, "mobility.pause_max", minimo=0))
    revisar(validar_entero(mob.affinity_window, "mobility.affinity_window", minimo=2))

    # Energía
    en = cfg.energy
    revisar(validar_rango(en.initial_min, en.initial_max, "energy.initial_min/initial_max"))
    revisar(validar_real(en.tx_cost, "energy.tx_cost", minimo=0))
    revisar(validar_real(en.rx_cost, "energy.rx_cost", minimo=0))
    revisar(validar_real(en.idle_rate, "energy.idle_rate", minimo=0))
    revisar(validar_real(en.shutdown, "energy.shutdown", minimo=0))
    revisar(validar_entero(en.sample_window, "energy.sample_window", minimo=1))
    if en.initial_min <= en.shutdown:
        errores.append("energy.initial_min debe superar energy.shutdown")

    # Puntuación: Rtime se mide hasta MinEnergy, que debe quedar antes del apagado
    revisar(validar_real(cfg.scoring.MinEnergy, "scoring.MinEnergy", minimo=0))
    if cfg.scoring.MinEnergy <= en.shutdown:
        errores.append("scoring.MinEnergy debe superar energy.shutdown")

    # Carga
    revisar(validar_entero(wl.n_docs, "workload.n_docs", minimo=1))
    revisar(validar_entero(wl.n_queries, "workload.n_queries", minimo=0))
    revisar(validar_entero(wl.vocab_size, "workload.vocab_size", minimo=1))
    revisar(validar_entero(wl.replication, "workload.replication", minimo=1))
    revisar(validar_real(wl.replication_ratio, "workload.replication_ratio", minimo=0, maximo=1))
    revisar(validar_real(wl.query_zipf_s, "workload.query_zipf_s", minimo=0))
    revisar(validar_real(wl.theta_match, "workload.theta_match", minimo=0, maximo=1, estricto=True))
    revisar(validar_real(wl.background_prob, "workload.background_prob", minimo=0, maximo=1))
    revisar(validar_real(wl.placement_bias, "workload.placement_bias", minimo=0, maximo=1))
    revisar(validar_rango(wl.doc_len_min, wl.doc_len_max, "workload.doc_len_min/doc_len_max"))
    revisar(validar_rango(wl.issue_start, wl.issue_end, "workload.issue_start/issue_end"))
    revisar(validar_real(wl.issue_start, "workload.issue_start", minimo=0))

    # Protocolo
    pp = cfg.protocol_params
    revisar(validar_entero(pp.q_cap, "protocol.q_cap", minimo=1))
    revisar(validar_real(pp.base_service_rate, "protocol.base_service_rate", minimo=0, estricto=True))
    revisar(validar_real(pp.link_latency, "protocol.link_latency", minimo=0))
    revisar(validar_real(pp.beacon_interval, "protocol.beacon_interval", minimo=0, estricto=True))
    revisar(validar_real(pp.gossip_epsilon, "protocol.gossip_epsilon", minimo=0, estricto=True))
    revisar(validar_real(pp.pending_ttl_factor, "protocol.pending_ttl_factor", minimo=0, estricto=True))
    revisar(validar_cpu(pp.cpu_choices))
    revisar(validar_entero(pp.hello_loss, "protocol.hello_loss", minimo=1))
    revisar(validar_real(pp.airtime, "protocol.airtime", minimo=0))

    return (len(errores) == 0, errores)
