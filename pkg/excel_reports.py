# -*- coding: utf-8 -*-
"""
Reportes Excel - Barridos del Simulador
=======================================

Libro multi-hoja de un barrido:

1) 📊 Resumen: veredictos de tendencia y ganancias de CDP vs Gossiping-LB
2) 📈 Métricas: filas agregadas (media ± desvío por valor del eje y protocolo)
3) 🧪 Corridas: métricas de cada (valor, protocolo, semilla)
4) 📝 Supuestos: modelo de radio, energía y carga sintética declarados
"""

import io
from datetime import datetime

import openpyxl
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter


def _num(v, digits=4):
    """Redondea de forma segura; None queda vacío"""
    if v is None:
        return None
    try:
        return round(float(v), digits)
    except Exception:
        return None


def _pct(v):
    return None if v is None else f"{v * 100:+.1f}%"


def supuestos(cfg):
    """Pares (parámetro, valor) que condicionan la lectura de los resultados"""
    if cfg is None:
        return []
    return [
        ("Área", f"{cfg.mobility.area_width:g} × {cfg.mobility.area_height:g} m"),
        ("Rango de radio", f"{cfg.mobility.radio_range:g} m (disco, sin pérdidas MAC)"),
        ("Movilidad", f"Random Waypoint, v ∈ [(1-{cfg.mobility.speed_spread:g})·v, (1+{cfg.mobility.speed_spread:g})·v], "
                      f"pausa ≤ {cfg.mobility.pause_max:g} s"),
        ("Afinidad", cfg.mobility.affinity_mode.value),
        ("Energía inicial", f"U[{cfg.energy.initial_min:g}, {cfg.energy.initial_max:g}] J"),
        ("Costos", f"tx={cfg.energy.tx_cost:g} J, rx={cfg.energy.rx_cost:g} J, reposo={cfg.energy.idle_rate:g} J/s"),
        ("Carga sintética", f"{cfg.workload.n_docs} documentos, {cfg.workload.n_queries} consultas, "
                            f"vocabulario {cfg.workload.vocab_size}, Zipf s={cfg.workload.zipf_s:g}"),
        ("Coincidencia", f"coseno ≥ {cfg.workload.theta_match:g}"),
        ("Réplicas por documento", cfg.workload.replication),
        ("K / TTL", f"{cfg.scoring.K} / {cfg.scoring.TTL}"),
        ("L / Sim / MaxT", f"{cfg.scoring.L:g} / {cfg.scoring.Sim:g} / {cfg.scoring.MaxT:g}"),
        ("Término de carga", "literal (L·Load)" if cfg.scoring.literal_eq5 else "invertido (L·(1 − Load))"),
        ("Cola", f"Q_cap={cfg.protocol_params.q_cap}, {cfg.protocol_params.base_service_rate:g} msg/s por unidad de cpu"),
        ("Duración", f"{cfg.run_duration:g} s virtuales"),
    ]


class ExcelReportGenerator:
    """Generador de libros Excel para barridos"""

    def __init__(self):
        self.workbook = None

        # 🎨 PALETA DE COLORES (sin #)
        self.colors = {
            "header": "1F4E78",
            "subheader": "2F75B5",
            "ok": "70AD47",
            "danger": "C00000",
            "soft": "F2F2F2",
        }

        thin = Side(style="thin", color="BFBFBF")
        self.border = Border(left=thin, right=thin, top=thin, bottom=thin)

        self.font_title = Font(bold=True, size=16, color="FFFFFF")
        self.font_header = Font(bold=True, size=11, color="FFFFFF")
        self.font_bold = Font(bold=True)
        self.font_verdict = Font(bold=True, color="FFFFFF")

        self.align_center = Alignment(horizontal="center", vertical="center", wrap_text=True)
        self.align_left = Alignment(horizontal="left", vertical="center", wrap_text=True)

        self.fill_header = self._fill("header")
        self.fill_subheader = self._fill("subheader")
        self.fill_soft = self._fill("soft")
        self.fill_ok = self._fill("ok")
        self.fill_danger = self._fill("danger")

    def _fill(self, key):
        return PatternFill(start_color=self.colors[key], end_color=self.colors[key], fill_type="solid")

    # ============================================
    # 🔧 UTILIDADES DE FORMATO
    # ============================================

    def _set_col_widths_auto(self, ws, min_width=10, max_width=60, padding=2):
        for col in ws.columns:
            max_len = max((len(str(c.value)) for c in col if c.value is not None), default=0)
            ws.column_dimensions[get_column_letter(col[0].column)].width = max(min_width, min(max_width, max_len + padding))

    def _apply_table_header(self, ws, row, headers):
        for c, h in enumerate(headers, start=1):
            cell = ws.cell(row=row, column=c, value=h)
            cell.font = self.font_header
            cell.fill = self.fill_subheader
            cell.alignment = self.align_center
            cell.border = self.border
        ws.row_dimensions[row].height = 22

    def _title_block(self, ws, title, merge_to_col=6):
        end_col = get_column_letter(merge_to_col)
        ws.merge_cells(f"A1:{end_col}1")
        ws["A1"].value = title
        ws["A1"].font = self.font_title
        ws["A1"].fill = self.fill_header
        ws["A1"].alignment = self.align_center
        ws.row_dimensions[1].height = 32

        ws.merge_cells(f"A2:{end_col}2")
        ws["A2"].value = f"Generado: {datetime.now().strftime('%d/%m/%Y %H:%M')}"
        ws["A2"].alignment = self.align_center
        return 4

    def _write_rows(self, ws, start_row, rows, zebra=True):
        for i, values in enumerate(rows):
            r = start_row + i
            for c, v in enumerate(values, start=1):
                cell = ws.cell(row=r, column=c, value=v)
                cell.border = self.border
                if zebra and i % 2 == 1:
                    cell.fill = self.fill_soft
        return start_row + len(rows)

    # ============================================
    # 📊 HOJAS
    # ============================================

    def _hoja_resumen(self, ws, result):
        row = self._title_block(ws, f"Barrido por '{result.axis}'")
        ws.cell(row=row, column=1, value="Protocolos").font = self.font_bold
        ws.cell(row=row, column=2, value=", ".join(p.value for p in result.protocols))
        ws.cell(row=row + 1, column=1, value="Semillas").font = self.font_bold
        ws.cell(row=row + 1, column=2, value=len(result.seeds))
        row += 3

        self._apply_table_header(ws, row, ["Verificación", "Resultado"])
        row += 1
        for name, ok in result.trends.items():
            ws.cell(row=row, column=1, value=name).border = self.border
            cell = ws.cell(row=row, column=2, value="CUMPLE" if ok else "NO CUMPLE")
            cell.font = self.font_verdict
            cell.fill = self.fill_ok if ok else self.fill_danger
            cell.alignment = self.align_center
            cell.border = self.border
            row += 1

        if result.comparison:
            row += 1
            self._apply_table_header(ws, row, ["Valor del eje", "Ganancia recall", "Ganancia éxito", "Reducción retardo"])
            self._write_rows(ws, row + 1, [
                (e["axis_value"], _pct(e["recall_gain"]), _pct(e["success_gain"]), _pct(e["delay_reduction"]))
                for e in result.comparison
            ])

    def _hoja_metricas(self, ws, result):
        headers = ["axis", "axis_value", "protocol", "seed_count", "metric", "mean", "std"]
        self._apply_table_header(ws, 1, headers)
        self._write_rows(ws, 2, [
            (r.axis, r.axis_value, r.protocol, r.seed_count, r.metric, _num(r.mean, 6), _num(r.std, 6))
            for r in result.rows
        ])
        ws.freeze_panes = "A2"

    def _hoja_corridas(self, ws, result):
        headers = [
            "Valor", "Protocolo", "Semilla", "Recall", "Éxito", "Retardo (s)",
            "Emitidas", "Resueltas", "Hits perdidos", "Mensajes", "Descartados", "Violaciones presupuesto",
            "Pares alcanzados (media)", "Duplicados", "Envíos a vecinos idos",
        ]
        self._apply_table_header(ws, 1, headers)
        self._write_rows(ws, 2, [
            (
                rec.axis_value, rec.protocol.value, rec.seed,
                _num(rec.metrics.recall), _num(rec.metrics.success_rate), _num(rec.metrics.avg_discovery_delay),
                rec.metrics.queries_issued, rec.metrics.queries_resolved, rec.metrics.hits_lost,
                rec.metrics.messages_sent, rec.metrics.messages_dropped, rec.metrics.budget_violations,
                _num(rec.metrics.mean_peers_reached), rec.metrics.query_duplicates, rec.metrics.stale_sends,
            )
            for rec in result.records
        ])
        ws.freeze_panes = "A2"

    def _hoja_supuestos(self, ws, cfg):
        self._apply_table_header(ws, 1, ["Supuesto", "Valor"])
        filas = supuestos(cfg) or [("Configuración", "no disponible")]
        self._write_rows(ws, 2, filas)
        for row in ws.iter_rows(min_row=2):
            for cell in row:
                cell.alignment = self.align_left

    def generar_reporte_barrido(self, sweep_result, cfg=None):
        """Libro completo de un barrido; retorna un BytesIO listo para guardar"""
        self.workbook = openpyxl.Workbook()
        ws = self.workbook.active
        ws.title = "Resumen"
        self._hoja_resumen(ws, sweep_result)

        for titulo, builder, arg in (
            ("Métricas", self._hoja_metricas, sweep_result),
            ("Corridas", self._hoja_corridas, sweep_result),
            ("Supuestos", self._hoja_supuestos, cfg),
        ):
            builder(self.workbook.create_sheet(titulo), arg)

        for sheet in self.workbook.worksheets:
            self._set_col_widths_auto(sheet)

        buffer = io.BytesIO()
        self.workbook.save(buffer)
        buffer.seek(0)
        return buffer


excel_generator = ExcelReportGenerator()
