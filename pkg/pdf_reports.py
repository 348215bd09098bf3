# -*- coding: utf-8 -*-
"""pdf_reports.py

Exporta `pdf_generator`: informe PDF de una corrida o de un barrido
(parámetros, supuestos, tablas de métricas y veredictos de tendencia).
"""

import io
from datetime import datetime

from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import cm
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from excel_reports import supuestos


def _safe(value, default="—"):
    if value is None:
        return default
    s = str(value).strip()
    return s if s else default


def _fmt_num(value, digits=4):
    try:
        return f"{float(value):.{digits}f}"
    except Exception:
        return _safe(value)


def _fmt_pct(value):
    return "—" if value is None else f"{value * 100:+.1f}%"


class PDFGenerator:
    """Generador de informes de experimento."""

    def __init__(self, titulo="Simulador de Descubrimiento de Contenido"):
        self.titulo = titulo
        base = getSampleStyleSheet()
        self.s_brand = ParagraphStyle("brand", parent=base["Title"], fontSize=16, leading=18, spaceAfter=6)
        self.s_title = ParagraphStyle("title", parent=base["Heading2"], fontSize=12, leading=14, spaceAfter=6)
        self.s_section = ParagraphStyle("section", parent=base["Heading3"], fontSize=11, leading=13, spaceBefore=10, spaceAfter=6)
        self.s_small = ParagraphStyle("small", parent=base["Normal"], fontSize=9, leading=11)

    def _tabla_kv(self, filas, col_widths=(5.0*cm, 11.0*cm)):
        data = [[Paragraph(f"<b>{_safe(k)}</b>", self.s_small), Paragraph(_safe(v), self.s_small)] for k, v in filas]
        t = Table(data, colWidths=list(col_widths))
        t.setStyle(TableStyle([
            ("VALIGN", (0,0), (-1,-1), "TOP"),
            ("LINEBELOW", (0,0), (-1,-1), 0.25, colors.lightgrey),
            ("TOPPADDING", (0,0), (-1,-1), 3),
            ("BOTTOMPADDING", (0,0), (-1,-1), 3),
        ]))
        return t

    def _tabla(self, header, filas, col_widths):
        data = [[Paragraph(f"<b>{h}</b>", self.s_small) for h in header]]
        for fila in filas:
            data.append([Paragraph(_safe(v), self.s_small) for v in fila])
        t = Table(data, colWidths=col_widths, repeatRows=1)
        t.setStyle(TableStyle([
            ("BACKGROUND", (0,0), (-1,0), colors.whitesmoke),
            ("LINEBELOW", (0,0), (-1,0), 0.5, colors.grey),
            ("GRID", (0,0), (-1,-1), 0.25, colors.lightgrey),
            ("VALIGN", (0,0), (-1,-1), "TOP"),
        ]))
        return t

    def _metricas_corrida(self, metrics):
        return self._tabla_kv([
            ("Recall", _fmt_num(metrics.recall)),
            ("Tasa de éxito", _fmt_num(metrics.success_rate)),
            ("Retardo medio (s)", _fmt_num(metrics.avg_discovery_delay) if metrics.avg_discovery_delay is not None else "sin consultas resueltas"),
            ("Consultas emitidas / resueltas", f"{metrics.queries_issued} / {metrics.queries_resolved}"),
            ("Mensajes (consulta + hit)", f"{metrics.messages_sent} ({metrics.query_messages} + {metrics.hit_messages})"),
            ("Hits perdidos", metrics.hits_lost),
            ("Mensajes descartados", metrics.messages_dropped),
            ("Pares alcanzados por consulta (media)", _fmt_num(metrics.mean_peers_reached)),
            ("Consultas duplicadas", metrics.query_duplicates),
            ("Envíos a vecinos que ya no estaban", metrics.stale_sends),
            ("Violaciones de presupuesto", metrics.budget_violations),
        ])

    def _tabla_barrido(self, result):
        principales = ("recall", "success_rate", "avg_discovery_delay")
        filas = [
            (r.axis_value, r.protocol, r.metric, _fmt_num(r.mean), _fmt_num(r.std), r.seed_count)
            for r in result.rows if r.metric in principales
        ]
        header = ["Valor", "Protocolo", "Métrica", "Media", "Desvío", "n"]
        return self._tabla(header, filas, [2.0*cm, 3.0*cm, 4.2*cm, 2.6*cm, 2.6*cm, 1.6*cm])

    def generar_reporte_experimento(self, cfg, sweep_result=None, metrics=None):
        buffer = io.BytesIO()
        doc = SimpleDocTemplate(buffer, pagesize=A4, leftMargin=2*cm, rightMargin=2*cm, topMargin=2*cm, bottomMargin=2*cm)
        story = []
        story.append(Paragraph(_safe(self.titulo), self.s_brand))
        subtitulo = f"Barrido por '{sweep_result.axis}'" if sweep_result is not None else "Corrida individual"
        story.append(Paragraph(subtitulo, self.s_title))
        story.append(Paragraph(f"Generado: {datetime.now().strftime('%d/%m/%Y %H:%M')}", self.s_small))
        story.append(Spacer(1, 10))

        story.append(Paragraph("Escenario", self.s_section))
        story.append(self._tabla_kv([
            ("Protocolo", cfg.protocol.value),
            ("Pares", cfg.n_peers),
            ("Velocidad nominal", f"{cfg.v_nominal:g} m/s"),
            ("Semilla", cfg.seed),
        ]))

        story.append(Paragraph("Supuestos", self.s_section))
        story.append(self._tabla_kv(supuestos(cfg)))

        if metrics is not None:
            story.append(Paragraph("Métricas", self.s_section))
            story.append(self._metricas_corrida(metrics))

        if sweep_result is not None:
            story.append(Paragraph("Métricas agregadas", self.s_section))
            story.append(self._tabla_barrido(sweep_result))
            if sweep_result.comparison:
                story.append(Paragraph("CDP frente a Gossiping-LB", self.s_section))
                story.append(self._tabla(
                    ["Valor", "Ganancia recall", "Ganancia éxito", "Reducción retardo"],
                    [(e["axis_value"], _fmt_pct(e["recall_gain"]), _fmt_pct(e["success_gain"]), _fmt_pct(e["delay_reduction"]))
                     for e in sweep_result.comparison],
                    [3.0*cm, 4.3*cm, 4.3*cm, 4.4*cm],
                ))
            if sweep_result.trends:
                story.append(Paragraph("Tendencias", self.s_section))
                story.append(self._tabla_kv([(k, "CUMPLE" if v else "NO CUMPLE") for k, v in sweep_result.trends.items()]))

        doc.build(story)
        buffer.seek(0)
        return buffer


pdf_generator = PDFGenerator()
