"""Forest-plot rows, deterministic SVG rendering and result serialisation."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .exceptions import EmptyRows
from .meta import IntervalMethod, PoolResult, Weighting
from .optim import normal_quantile
from .types import FittedSummary, OutcomeMeasure


class RowKind(enum.Enum):
    Model = "model"
    CombinedCI = "combined-ci"
    CombinedCR = "combined-cr"


@dataclass(frozen=True)
class ForestRow:
    label: str
    center: float
    low: float
    high: float
    kind: RowKind


def combined_label(res: PoolResult) -> str:
    name = "REML" if res.method is IntervalMethod.Wald else "REML+KNHA"
    if res.weighting is Weighting.InverseVariance:
        name += ", inverse-variance"
    return f"Combined ({name})"


def build_forest(
    summaries: Sequence[FittedSummary],
    results: Sequence[PoolResult],
    alpha: float = 0.10,
) -> list[ForestRow]:
    """One row per model (y_hat +/- z * se_hat) then a CI and a CR row per pooled result."""
    z = normal_quantile(1 - alpha / 2)
    rows = []
    for s in summaries:
        low = s.y_hat - z * s.se_hat
        if s.measure.nonnegative:
            low = max(low, 0.0)
        rows.append(ForestRow(s.model_id, s.y_hat, low, s.y_hat + z * s.se_hat, RowKind.Model))
    for r in results:
        label = combined_label(r)
        rows.append(ForestRow(label, r.theta_hat, r.ci_low, r.ci_high, RowKind.CombinedCI))
        rows.append(ForestRow(label, r.theta_hat, r.cr_low, r.cr_high, RowKind.CombinedCR))
    return rows


# SVG layout, pixels
WIDTH = 720
LABEL_W = 220
RIGHT_PAD = 30
TOP = 44
ROW_H = 22
AXIS_H = 48
N_TICKS = 5

_DEFAULT_REF = {
    OutcomeMeasure.ReproductionNumber: 1.0,
    OutcomeMeasure.GrowthRate: 0.0,
    OutcomeMeasure.DailyInfections: None,
}
_UNSET = object()


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def render_svg(
    rows: Sequence[ForestRow],
    title: str,
    measure: OutcomeMeasure | None = None,
    reference=_UNSET,
) -> str:
    """Render forest rows as a standalone SVG 1.1 document.

    Each row becomes exactly one ``<line class="interval">``. A combined CR
    row shares the vertical slot of the CI row just before it, so the CR
    appears as an error bar over the shaded CI. ``reference`` draws a vertical
    line (default 1 for R, 0 for r, none otherwise; pass ``None`` to disable).
    """
    if not rows:
        raise EmptyRows("nothing to render")
    if reference is _UNSET:
        reference = _DEFAULT_REF.get(measure) if measure is not None else None

    slots, n = [], -1
    for i, row in enumerate(rows):
        prev = rows[i - 1] if i else None
        shares = (
            row.kind is RowKind.CombinedCR
            and prev is not None
            and prev.kind is RowKind.CombinedCI
            and prev.label == row.label
        )
        if not shares:
            n += 1
        slots.append(n)
    n_slots = n + 1

    vals = [v for r in rows for v in (r.low, r.high, r.center)]
    if reference is not None:
        vals.append(reference)
    vmin, vmax = min(vals), max(vals)
    pad = 0.05 * (vmax - vmin) if vmax > vmin else max(abs(vmin) * 0.05, 0.5)
    vmin, vmax = vmin - pad, vmax + pad
    x0, x1 = LABEL_W, WIDTH - RIGHT_PAD
    height = TOP + n_slots * ROW_H + AXIS_H

    def sx(v):
        return x0 + (v - vmin) / (vmax - vmin) * (x1 - x0)

    def sy(slot):
        return TOP + (slot + 0.5) * ROW_H

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{height}" viewBox="0 0 {WIDTH} {height}">',
        f'<title>{escape(title)}</title>',
        '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="24" font-family="sans-serif" font-size="15" '
        f'text-anchor="middle">{escape(title)}</text>',
        f'<g class="plot" data-vmin="{vmin!r}" data-vmax="{vmax!r}" '
        f'data-x0="{x0}" data-x1="{x1}">',
    ]
    axis_y = TOP + n_slots * ROW_H
    out.append(
        f'<line class="axis" x1="{x0}" y1="{axis_y}" x2="{x1}" y2="{axis_y}" stroke="black"/>'
    )
    for tv in np.linspace(vmin, vmax, N_TICKS):
        tx = _f(sx(tv))
        out.append(
            f'<line class="tick" x1="{tx}" y1="{axis_y}" x2="{tx}" y2="{axis_y + 5}" stroke="black"/>'
        )
        out.append(
            f'<text x="{tx}" y="{axis_y + 18}" font-family="sans-serif" font-size="11" '
            f'text-anchor="middle">{tv:.3g}</text>'
        )
    if reference is not None:
        rx = _f(sx(reference))
        out.append(
            f'<line class="reference" x1="{rx}" y1="{TOP}" x2="{rx}" y2="{axis_y}" '
            'stroke="grey" stroke-dasharray="4 3"/>'
        )

    for row, slot in zip(rows, slots):
        y = _f(sy(slot))
        xl, xh, xc = _f(sx(row.low)), _f(sx(row.high)), _f(sx(row.center))
        attrs = f'data-low={quoteattr(repr(row.low))} data-high={quoteattr(repr(row.high))}'
        if row.kind is RowKind.CombinedCR:
            style = 'stroke="black" stroke-width="1.5"'
        elif row.kind is RowKind.CombinedCI:
            style = 'stroke="steelblue" stroke-width="12" stroke-opacity="0.4"'
        else:
            style = 'stroke="black" stroke-width="1.5"'
        if row.kind is not RowKind.CombinedCR:
            out.append(
                f'<text x="{x0 - 8}" y="{y}" dy="4" font-family="sans-serif" font-size="12" '
                f'text-anchor="end">{escape(row.label)}</text>'
            )
        out.append(
            f'<line class="interval" data-kind="{row.kind.value}" {attrs} '
            f'x1="{xl}" y1="{y}" x2="{xh}" y2="{y}" {style}/>'
        )
        if row.kind is RowKind.CombinedCR:
            for xe in (xl, xh):
                out.append(
                    f'<line class="cap" x1="{xe}" y1="{_f(sy(slot) - 5)}" x2="{xe}" '
                    f'y2="{_f(sy(slot) + 5)}" stroke="black" stroke-width="1.5"/>'
                )
        else:
            shape = "diamond" if row.kind is RowKind.CombinedCI else "dot"
            out.append(f'<circle class="center {shape}" cx="{xc}" cy="{y}" r="3.5" fill="black"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# serialisation

CSV_COLUMNS = (
    "measure", "region", "k", "weighting", "method", "alpha",
    "theta_hat", "se", "tau2", "se_tau2",
    "ci_low", "ci_high", "cr_low", "cr_high",
    "clamped_low", "reliability", "models", "echo",
)


def echo(theta: float, ci: Sequence[float], cr: Sequence[float]) -> str:
    """Two-decimal summary such as ``0.80 (0.74, 0.86) [0.73, 0.87]``."""
    return f"{_f(theta)} ({_f(ci[0])}, {_f(ci[1])}) [{_f(cr[0])}, {_f(cr[1])}]"


def result_to_record(r: PoolResult) -> dict:
    ci = [r.ci_low, r.ci_high]
    cr = [r.cr_low, r.cr_high]
    return {
        "measure": r.measure.tag if r.measure is not None else None,
        "region": r.region_id,
        "k": r.k,
        "weighting": r.weighting.value,
        "method": r.method.value,
        "alpha": r.alpha,
        "theta_hat": r.theta_hat,
        "se": r.se_theta,
        "tau2": r.tau2,
        "se_tau2": r.se_tau2,
        "ci": ci,
        "cr": cr,
        "clamped_low": r.clamped_low,
        "reliability": r.reliability,
        "models": list(r.model_ids),
        "echo": echo(r.theta_hat, ci, cr),
    }


def to_json(records: Iterable[dict]) -> str:
    return json.dumps(list(records), indent=2, sort_keys=True, allow_nan=False) + "\n"


def parse_json(text: str) -> list[dict]:
    return json.loads(text)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def to_csv(records: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        flat = dict(rec)
        flat["ci_low"], flat["ci_high"] = rec["ci"]
        flat["cr_low"], flat["cr_high"] = rec["cr"]
        flat["models"] = ";".join(rec.get("models", []))
        w.writerow([_cell(flat.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def serialize_results(results: Iterable[PoolResult]) -> tuple[str, str]:
    """Return ``(json_text, csv_text)`` for pooled results."""
    records = [result_to_record(r) for r in results]
    return to_json(records), to_csv(records)


SUMMARY_COLUMNS = ("measure", "region", "model", "path", "sk", "se_star", "y_hat", "se_hat", "degenerate")


def summaries_to_csv(summaries: Iterable[FittedSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for s in summaries:
        w.writerow([
            s.measure.tag, s.region_id, s.model_id, s.path.value,
            _cell(s.sk), _cell(s.se_star), _cell(s.y_hat), _cell(s.se_hat),
            _cell(s.degenerate),
        ])
    return buf.getvalue()
