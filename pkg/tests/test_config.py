# -*- coding: utf-8 -*-
import logging

import pytest

from config import (
    configurar_logging,
    dump_scenario,
    get_config,
    load_scenario,
    parse_override,
    write_effective_config,
)
from exceptions import ConfigError
from metrics_harness import ScenarioConfig
from mobility_energy import AffinityMode
from scoring import Protocol

ESCENARIO = """
[run]
n_peers = 40
protocol = GOSSIPING_LB
seed = 9

[mobility]
affinity_mode = estimate
radio_range = 120

[scoring]
K = 2
TTL = 4

[protocol]
cpu_choices = 1.0, 3.0
"""


def _write(tmp_path, text):
    path = tmp_path / "escenario.ini"
    path.write_text(text, encoding="utf-8")
    return path


def test_load_scenario_from_ini(tmp_path):
    cfg = load_scenario(_write(tmp_path, ESCENARIO))
    assert cfg.n_peers == 40
    assert cfg.protocol is Protocol.GOSSIPING_LB
    assert cfg.seed == 9
    assert cfg.mobility.affinity_mode is AffinityMode.ESTIMATE
    assert cfg.mobility.radio_range == 120.0
    assert cfg.scoring.K == 2 and cfg.scoring.TTL == 4
    assert cfg.protocol_params.cpu_choices == (1.0, 3.0)
    # lo no mencionado queda en su default
    assert cfg.workload.n_docs == ScenarioConfig().workload.n_docs


def test_defaults_without_file():
    assert load_scenario() == ScenarioConfig()


def test_overrides_beat_file(tmp_path):
    cfg = load_scenario(_write(tmp_path, ESCENARIO), ["run.n_peers=60", "scoring.K=5"])
    assert cfg.n_peers == 60
    assert cfg.scoring.K == 5
    assert cfg.scoring.TTL == 4


def test_unknown_key_names_the_key(tmp_path):
    path = _write(tmp_path, "[scoring]\nbogus = 1\n")
    with pytest.raises(ConfigError, match="scoring.bogus"):
        load_scenario(path)


def test_protocol_is_not_a_scoring_key():
    with pytest.raises(ConfigError, match="scoring.protocol"):
        load_scenario(overrides=["scoring.protocol=flooding"])


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ConfigError, match="radio"):
        load_scenario(_write(tmp_path, "[radio]\nrange = 1\n"))


@pytest.mark.parametrize("override", ["run.n_peers=muchos", "run.trace=quizas", "run.protocol=chord"])
def test_bad_literals_rejected(override):
    with pytest.raises(ConfigError):
        load_scenario(overrides=[override])


def test_missing_or_malformed_file(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "no_existe.ini")
    with pytest.raises(ConfigError):
        load_scenario(_write(tmp_path, "n_peers = 3\n"))


@pytest.mark.parametrize("texto", ["n_peers=3", "run.n_peers"])
def test_parse_override_requires_section_and_value(texto):
    with pytest.raises(ConfigError):
        parse_override(texto)


def test_parse_override_keeps_value_text():
    assert parse_override("protocol.cpu_choices=1.0, 2.0") == ("protocol", "cpu_choices", "1.0, 2.0")


def test_dump_reload_gives_same_scenario(tmp_path):
    cfg = load_scenario(_write(tmp_path, ESCENARIO), ["energy.enabled=false", "workload.theta_match=0.65"])
    path = write_effective_config(cfg, tmp_path)
    assert path.name == "effective_config.ini"
    assert load_scenario(path) == cfg
    assert "theta_match = 0.65" in dump_scenario(cfg)


def test_configurar_logging_writes_rotating_file(tmp_path):
    logger = configurar_logging(tmp_path, "info")
    logging.getLogger("cdpsim.prueba").info("hola")
    for handler in logger.handlers:
        handler.flush()
    assert "hola" in (tmp_path / "cdpsim.log").read_text(encoding="utf-8")
    # una segunda llamada reemplaza los handlers
    configurar_logging(tmp_path, "info")
    assert len(logging.getLogger("cdpsim").handlers) == 2


def test_get_config_by_environment():
    assert get_config("testing").TESTING
    assert get_config("desconocido") is get_config("development")
