# -*- coding: utf-8 -*-
"""
Línea de Comandos del Simulador
===============================

Subcomandos:
    run           una corrida -> metrics.json (+ trazas / PDF opcionales)
    sweep         barrido por eje (peers | speed) -> results.csv, runs.json, comparison.csv, xlsx, pdf
    gen-workload  carga sintética -> JSON reproducible byte a byte

Códigos de salida: 0 éxito, 1 error de configuración, 2 error de ejecución.

USO:
    python run.py run --config escenario.ini --protocol cdp --peers 50 --seed 7
    python run.py sweep --axis peers --protocols cdp,gossiping_lb --seeds 10 --jobs 4
    python run.py gen-workload --docs 17000 --queries 700 --out carga.json
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from datetime import datetime
from pathlib import Path

from config import _ensure_dir, configurar_logging, get_config, load_scenario, write_effective_config
from content import generate_workload
from engine import RngStream, dump_event_log
from exceptions import ConfigError
from metrics_harness import (
    AXIS_VALUES,
    simulate,
    sweep,
    write_comparison_csv,
    write_csv,
    write_runs_json,
)
from scoring import Protocol
from validadores import validar_escenario

logger = logging.getLogger("cdpsim.cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


# ============================================
# UTILIDADES
# ============================================

def _output_dir(out, subcommand):
    if out:
        return _ensure_dir(Path(out))
    stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return _ensure_dir(get_config().OUTPUT_ROOT / f"{subcommand}_{stamp}")


def _parse_protocol(texto):
    try:
        return Protocol(texto.strip().lower())
    except ValueError:
        opciones = ", ".join(p.value for p in Protocol)
        raise ConfigError(f"protocolo desconocido: {texto!r} (use {opciones})") from None


def _resolve(args):
    """Defaults < archivo < --set < flags dedicados"""
    cfg = load_scenario(args.config, args.set or ())

    cambios = {}
    if getattr(args, "protocol", None):
        cambios["protocol"] = _parse_protocol(args.protocol)
    if getattr(args, "peers", None) is not None:
        cambios["n_peers"] = args.peers
    if getattr(args, "seed", None) is not None:
        cambios["seed"] = args.seed
    if getattr(args, "speed", None) is not None:
        cambios["v_nominal"] = args.speed
    if getattr(args, "duration", None) is not None:
        cambios["run_duration"] = args.duration
    if getattr(args, "trace", False):
        cambios["trace"] = True

    wl = {}
    if getattr(args, "docs", None) is not None:
        wl["n_docs"] = args.docs
    if getattr(args, "queries", None) is not None:
        wl["n_queries"] = args.queries
    if wl:
        cambios["workload"] = replace(cfg.workload, **wl)

    return replace(cfg, **cambios)


def _validate(cfg):
    ok, errores = validar_escenario(cfg)
    if not ok:
        raise ConfigError("; ".join(errores))
    return cfg


def _write_bytes(path, buffer):
    path.write_bytes(buffer.getvalue())
    logger.info(f"✅ Escrito {path}")
    return path


# ============================================
# SUBCOMANDOS
# ============================================

def cmd_run(args):
    cfg = _validate(_resolve(args))
    out = _output_dir(args.out, "run")
    write_effective_config(cfg, out)

    result = simulate(cfg)
    metrics_path = out / "metrics.json"
    metrics_path.write_text(result.metrics.to_json(), encoding="utf-8")
    logger.info(f"✅ Escrito {metrics_path}")

    if cfg.trace:
        with (out / "trace.jsonl").open("w", encoding="utf-8") as fh:
            for entry in result.trace:
                fh.write(json.dumps(entry, sort_keys=True))
                fh.write("\n")
        with (out / "events.jsonl").open("w", encoding="utf-8") as fh:
            dump_event_log(result.event_log, fh)

    if args.pdf:
        from pdf_reports import pdf_generator
        _write_bytes(out / "report.pdf", pdf_generator.generar_reporte_experimento(cfg, metrics=result.metrics))

    print(out)
    return EXIT_OK


def cmd_sweep(args):
    cfg = _validate(_resolve(args))
    if args.seeds < 1:
        raise ConfigError("--seeds debe ser >= 1")
    protocols = [_parse_protocol(p) for p in args.protocols.split(",") if p.strip()]
    jobs = args.jobs if args.jobs is not None else get_config().JOBS
    seeds = range(cfg.seed, cfg.seed + args.seeds)

    out = _output_dir(args.out, "sweep")
    write_effective_config(cfg, out)

    result = sweep(cfg, args.axis, protocols, seeds, jobs=jobs)
    write_csv(result.rows, out / "results.csv")
    write_runs_json(result.records, out / "runs.json")
    write_comparison_csv(result.comparison, out / "comparison.csv")
    fallas = [name for name, ok in result.trends.items() if not ok]
    if fallas:
        logger.warning(f"⚠️ {len(fallas)} tendencia(s) sin cumplir: {', '.join(fallas)}")

    if not args.no_reports:
        from excel_reports import excel_generator
        from pdf_reports import pdf_generator
        _write_bytes(out / "results.xlsx", excel_generator.generar_reporte_barrido(result, cfg))
        _write_bytes(out / "report.pdf", pdf_generator.generar_reporte_experimento(cfg, sweep_result=result))

    print(out)
    return EXIT_OK


def cmd_gen_workload(args):
    cfg = _validate(_resolve(args))
    workload = generate_workload(cfg.workload, cfg.n_peers, RngStream(cfg.seed, "workload"))

    if args.out:
        path = Path(args.out)
        _ensure_dir(path.parent)
    else:
        path = _output_dir(None, "gen-workload") / "workload.json"
    write_effective_config(cfg, path.parent)
    path.write_text(workload.to_json(), encoding="utf-8")
    logger.info(f"📦 Carga escrita en {path}")
    print(path)
    return EXIT_OK


# ============================================
# PARSER
# ============================================

def build_parser():
    parser = argparse.ArgumentParser(prog="cdpsim", description="Simulador de descubrimiento de contenido en MANET")
    parser.add_argument("--log-dir", default=None, help="carpeta del log rotativo")
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def comunes(p):
        p.add_argument("--config", default=None, help="archivo INI de escenario")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override puntual (repetible)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--peers", type=int, default=None)
        p.add_argument("--out", default=None)

    p_run = sub.add_parser("run", help="una corrida")
    comunes(p_run)
    p_run.add_argument("--protocol", default=None, help="cdp | gossiping_lb | flooding")
    p_run.add_argument("--speed", type=float, default=None, help="velocidad nominal (m/s)")
    p_run.add_argument("--duration", type=float, default=None, help="duración virtual (s)")
    p_run.add_argument("--trace", action="store_true", help="escribe trace.jsonl y events.jsonl")
    p_run.add_argument("--pdf", action="store_true", help="escribe report.pdf")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="barrido por eje")
    comunes(p_sweep)
    p_sweep.add_argument("--axis", choices=sorted(AXIS_VALUES), required=True)
    p_sweep.add_argument("--protocols", default="cdp,gossiping_lb")
    p_sweep.add_argument("--seeds", type=int, default=get_config().DEFAULT_SEEDS)
    p_sweep.add_argument("--jobs", type=int, default=None)
    p_sweep.add_argument("--speed", type=float, default=None)
    p_sweep.add_argument("--duration", type=float, default=None)
    p_sweep.add_argument("--no-reports", action="store_true", help="omite results.xlsx y report.pdf")
    p_sweep.set_defaults(func=cmd_sweep)

    p_gen = sub.add_parser("gen-workload", help="genera la carga sintética")
    comunes(p_gen)
    p_gen.add_argument("--docs", type=int, default=None)
    p_gen.add_argument("--queries", type=int, default=None)
    p_gen.set_defaults(func=cmd_gen_workload)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    configurar_logging(args.log_dir, args.log_level)

    try:
        return args.func(args)
    except ConfigError as e:
        logger.error(f"❌ Configuración inválida: {e}")
        print(f"error de configuración: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        logger.exception(f"❌ Error de ejecución: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
