# -*- coding: utf-8 -*-
"""
Configuración Centralizada del Simulador
✅ Ajustes de ejecución desde variables de entorno / .env
✅ Archivo INI de escenario con claves estrictas y overrides section.key=value
"""

import configparser
import logging
import os
from dataclasses import fields, replace
from enum import Enum
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, get_args, get_origin, get_type_hints

from dotenv import load_dotenv

from content import WorkloadParams
from exceptions import ConfigError
from metrics_harness import ScenarioConfig
from mobility_energy import EnergyParams, MobilityParams
from protocols import ProtocolParams
from scoring import ScoringParams

# Cargar variables de entorno desde .env (en local)
load_dotenv()

# Directorio base (carpeta donde está este config.py)
BASE_DIR = Path(__file__).parent.resolve()

LOG_FORMAT = "%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]"


def _ensure_dir(path: Path) -> Path:
    """Crea un directorio si no existe y retorna el mismo Path."""
    path.mkdir(parents=True, exist_ok=True)
    return path


class Config:
    """Ajustes de ejecución (no afectan los resultados de una corrida)"""

    # =========================
    # RUTAS
    # =========================
    OUTPUT_ROOT = Path(os.environ.get("CDPSIM_OUTPUT_ROOT", "") or BASE_DIR / "resultados")
    LOG_DIR = Path(os.environ.get("CDPSIM_LOG_DIR", "") or BASE_DIR / "logs")
    LOG_FILE = LOG_DIR / "cdpsim.log"

    # =========================
    # LOGGING
    # =========================
    LOG_LEVEL = os.environ.get("CDPSIM_LOG_LEVEL", "INFO")
    LOG_MAX_BYTES = int(os.environ.get("CDPSIM_LOG_MAX_BYTES", 10240000))  # 10MB
    LOG_BACKUPS = int(os.environ.get("CDPSIM_LOG_BACKUPS", 10))

    # =========================
    # BARRIDOS
    # =========================
    JOBS = int(os.environ.get("CDPSIM_JOBS", 1))
    DEFAULT_SEEDS = 10

    @classmethod
    def init_dirs(cls):
        _ensure_dir(cls.OUTPUT_ROOT)
        _ensure_dir(cls.LOG_DIR)


class DevelopmentConfig(Config):
    DEBUG = True
    TESTING = False


class TestingConfig(Config):
    DEBUG = False
    TESTING = True
    LOG_LEVEL = "WARNING"
    JOBS = 1


config = {
    "development": DevelopmentConfig,
    "testing": TestingConfig,
    "default": DevelopmentConfig,
}


def get_config(env=None):
    """Obtiene la configuración según el entorno"""
    if env is None:
        env = os.environ.get("CDPSIM_ENV", "development")
    return config.get(env, config["default"])


# ============================================
# LOGGING
# ============================================

def configurar_logging(log_dir=None, level=None, max_bytes=None, backups=None):
    """
    Instala archivo rotativo + consola en el logger 'cdpsim'.
    Llamarla dos veces reemplaza los handlers (no los duplica).
    """
    settings = get_config()
    log_dir = _ensure_dir(Path(log_dir) if log_dir else settings.LOG_DIR)
    level = (level or settings.LOG_LEVEL).upper()

    logger = logging.getLogger("cdpsim")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    file_handler = RotatingFileHandler(
        log_dir / "cdpsim.log",
        maxBytes=max_bytes or settings.LOG_MAX_BYTES,
        backupCount=backups or settings.LOG_BACKUPS,
        encoding="utf-8",
    )
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(file_handler)

    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logger.addHandler(console)

    logger.setLevel(level)
    logger.propagate = False
    return logger


# ============================================
# ARCHIVO DE ESCENARIO (INI)
# ============================================

RUN_KEYS = ("n_peers", "v_nominal", "protocol", "seed", "run_duration", "trace")

# sección INI -> (atributo de ScenarioConfig, clase de parámetros)
SECTIONS = {
    "mobility": ("mobility", MobilityParams),
    "energy": ("energy", EnergyParams),
    "workload": ("workload", WorkloadParams),
    "scoring": ("scoring", ScoringParams),
    "protocol": ("protocol_params", ProtocolParams),
}

# el protocolo activo se fija en [run]
EXCLUDED = {("scoring", "protocol")}

_TRUE = {"1", "yes", "true", "on"}
_FALSE = {"0", "no", "false", "off"}


def _section_keys(section: str) -> Dict[str, type]:
    if section == "run":
        hints = get_type_hints(ScenarioConfig)
        return {k: hints[k] for k in RUN_KEYS}
    _, cls = SECTIONS[section]
    hints = get_type_hints(cls)
    return {f.name: hints[f.name] for f in fields(cls) if (section, f.name) not in EXCLUDED}


def _coerce(raw: str, tipo, clave: str):
    texto = raw.strip()
    try:
        if tipo is bool:
            if texto.lower() in _TRUE:
                return True
            if texto.lower() in _FALSE:
                return False
            raise ValueError(texto)
        if isinstance(tipo, type) and issubclass(tipo, Enum):
            return tipo(texto.lower())
        if tipo is int:
            return int(texto)
        if tipo is float:
            return float(texto)
        if get_origin(tipo) is tuple:
            elem = get_args(tipo)[0]
            return tuple(elem(x.strip()) for x in texto.split(",") if x.strip())
        return texto
    except ValueError:
        raise ConfigError(f"{clave}: valor inválido {raw!r}") from None


def _format(valor) -> str:
    if isinstance(valor, bool):
        return "true" if valor else "false"
    if isinstance(valor, Enum):
        return str(valor.value)
    if isinstance(valor, tuple):
        return ", ".join(repr(v) for v in valor)
    if isinstance(valor, float):
        return repr(valor)
    return str(valor)


def parse_override(texto: str) -> Tuple[str, str, str]:
    """'section.key=value' -> (section, key, value)"""
    if "=" not in texto:
        raise ConfigError(f"override sin '=': {texto!r}")
    ruta, valor = texto.split("=", 1)
    if "." not in ruta:
        raise ConfigError(f"override sin sección: {texto!r} (use section.key=value)")
    section, key = ruta.strip().split(".", 1)
    return section.strip(), key.strip(), valor


def scenario_from_raw(raw: Dict[str, Dict[str, str]], base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Aplica valores crudos (sección -> clave -> texto) sobre base; claves desconocidas => ConfigError"""
    cfg = base or ScenarioConfig()
    run_values = {}
    nested = {}

    for section, values in raw.items():
        if section != "run" and section not in SECTIONS:
            raise ConfigError(f"sección desconocida: [{section}]")
        known = _section_keys(section)
        coerced = {}
        for key, texto in values.items():
            if key not in known:
                raise ConfigError(f"clave desconocida: {section}.{key}")
            coerced[key] = _coerce(texto, known[key], f"{section}.{key}")
        if section == "run":
            run_values.update(coerced)
        elif coerced:
            attr, _ = SECTIONS[section]
            nested[attr] = replace(getattr(cfg, attr), **coerced)

    return replace(cfg, **run_values, **nested)


def load_scenario(path=None, overrides: Iterable[str] = ()) -> ScenarioConfig:
    """
    Defaults < archivo INI < overrides section.key=value.
    Los flags dedicados de la CLI se aplican después, en cli.py.
    """
    raw: Dict[str, Dict[str, str]] = {}
    if path:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # K, TTL, MaxT... conservan mayúsculas
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except FileNotFoundError:
            raise ConfigError(f"no existe el archivo de configuración: {path}") from None
        except configparser.Error as e:
            raise ConfigError(f"archivo de configuración mal formado: {e}") from None
        for section in parser.sections():
            raw[section] = dict(parser.items(section))

    for texto in overrides:
        section, key, valor = parse_override(texto)
        raw.setdefault(section, {})[key] = valor

    return scenario_from_raw(raw)


def dump_scenario(cfg: ScenarioConfig) -> str:
    """INI completo con todos los valores efectivos"""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser["run"] = {k: _format(getattr(cfg, k)) for k in RUN_KEYS}
    for section, (attr, _) in SECTIONS.items():
        params = getattr(cfg, attr)
        parser[section] = {k: _format(getattr(params, k)) for k in _section_keys(section)}

    lines = []
    for section in parser.sections():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in parser.items(section))
        lines.append("")
    return "\n".join(lines)


def write_effective_config(cfg: ScenarioConfig, out_dir) -> Path:
    path = Path(out_dir) / "effective_config.ini"
    path.write_text(dump_scenario(cfg), encoding="utf-8")
    return path
