"""Render evaluation reports as CSV, markdown and SVG boxplots.

Every renderer takes an optional provenance dict that is embedded in the
output (CSV comment line, markdown comment, SVG metadata), so an artifact
carries the configuration that produced it.
"""
from __future__ import annotations

import csv
import io
import json
from xml.sax.saxutils import escape

import numpy as np

from .errors import InvalidParameter

SUMMARY_COLUMNS = ("dataset", "method", "mean", "sd", "min", "q1", "median", "q3", "max",
                   "R", "fraction", "seed")


def _stamp(provenance) -> str:
    return json.dumps(provenance, sort_keys=True, separators=(",", ":")) if provenance else ""


def _num(x) -> str:
    return "" if x is None or not np.isfinite(x) else repr(float(x))


def _csv(rows, provenance) -> bytes:
    buf = io.StringIO()
    if provenance:
        buf.write(f"# config: {_stamp(provenance)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue().encode()


def long_csv(report, provenance=None) -> bytes:
    """One row per replication: dataset, method, r, E_r (empty when that run failed)."""
    rows = [("dataset", "method", "r", "E_r")]
    for e in report.entries:
        if e.skipped:
            continue
        rows += [(e.dataset, e.method, r, _num(err)) for r, err in enumerate(e.errors, start=1)]
    return _csv(rows, provenance)


def summary_csv(report, provenance=None) -> bytes:
    rows = [SUMMARY_COLUMNS]
    for e in report.entries:
        s = e.stats
        rows.append((e.dataset, e.method, *(_num(s[k]) for k in
                     ("mean", "sd", "min", "q1", "median", "q3", "max")),
                     e.R, repr(e.test_fraction), "-".join(str(x) for x in e.seed)))
    return _csv(rows, provenance)


def markdown(report, provenance=None, digits=4) -> bytes:
    """Mean error table: one row per dataset, one column per method."""
    methods = report.methods
    lines = []
    if provenance:
        lines.append(f"<!-- config: {_stamp(provenance)} -->")
    lines.append("| dataset | " + " | ".join(methods) + " |")
    lines.append("|---|" + "---|" * len(methods))
    for ds in report.datasets:
        cells = []
        for m in methods:
            try:
                e = report.entry(ds, m)
            except KeyError:
                cells.append("")
                continue
            mean = e.stats["mean"]
            cells.append("n/a" if e.skipped or not np.isfinite(mean) else f"{mean:.{digits}f}")
        lines.append(f"| {ds} | " + " | ".join(cells) + " |")
    return ("\n".join(lines) + "\n").encode()


# --- svg -------------------------------------------------------------------

_W_BOX, _GAP, _GROUP_GAP = 36, 14, 40
_TOP, _BOTTOM, _LEFT, _PLOT_H = 40, 90, 60, 300


def _f(x) -> str:
    return f"{x:.2f}"


def svg(report, provenance=None, title="Prediction error over replications") -> bytes:
    """Boxplots (min, q1, median, q3, max) per method, grouped by dataset."""
    groups = []
    for ds in report.datasets:
        boxes = [e for e in report.entries
                 if e.dataset == ds and not e.skipped and np.isfinite(e.stats["mean"])]
        if boxes:
            groups.append((ds, boxes))
    if not groups:
        raise InvalidParameter("nothing to plot: the report has no completed entries")
    hi = max(e.stats["max"] for _, boxes in groups for e in boxes)
    y_max = max(0.05, float(np.ceil(hi * 20) / 20))
    width = _LEFT + sum(len(b) * (_W_BOX + _GAP) for _, b in groups) + _GROUP_GAP * len(groups)
    height = _TOP + _PLOT_H + _BOTTOM

    def y(v):
        return _TOP + _PLOT_H * (1 - v / y_max)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
    ]
    if provenance:
        out.append(f"<metadata>{escape(_stamp(provenance))}</metadata>")
    out.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>')
    out.append(f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_f(y(0))}" stroke="black"/>')
    for t in np.linspace(0, y_max, 6):
        out.append(f'<line x1="{_LEFT - 4}" y1="{_f(y(t))}" x2="{_LEFT}" y2="{_f(y(t))}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 6}" y="{_f(y(t) + 4)}" text-anchor="end">{t:.2f}</text>')
    out.append(f'<text transform="translate(16 {_TOP + _PLOT_H / 2:.1f}) rotate(-90)" '
               f'text-anchor="middle">test error</text>')
    x = _LEFT + _GROUP_GAP / 2
    for ds, boxes in groups:
        x0 = x
        for e in boxes:
            s = e.stats
            cx = x + _W_BOX / 2
            out.append(f'<g class="box" data-dataset="{escape(ds)}" data-method="{escape(e.method)}">')
            out.append(f'<line x1="{_f(cx)}" y1="{_f(y(s["min"]))}" x2="{_f(cx)}" y2="{_f(y(s["q1"]))}" stroke="black"/>')
            out.append(f'<line x1="{_f(cx)}" y1="{_f(y(s["q3"]))}" x2="{_f(cx)}" y2="{_f(y(s["max"]))}" stroke="black"/>')
            for v in ("min", "max"):
                out.append(f'<line x1="{_f(cx - 8)}" y1="{_f(y(s[v]))}" x2="{_f(cx + 8)}" y2="{_f(y(s[v]))}" stroke="black"/>')
            out.append(f'<rect x="{_f(x)}" y="{_f(y(s["q3"]))}" width="{_W_BOX}" '
                       f'height="{_f(y(s["q1"]) - y(s["q3"]))}" fill="#cfe0f3" stroke="black"/>')
            out.append(f'<line x1="{_f(x)}" y1="{_f(y(s["median"]))}" x2="{_f(x + _W_BOX)}" '
                       f'y2="{_f(y(s["median"]))}" stroke="black" stroke-width="2"/>')
            out.append(f'<text x="{_f(cx)}" y="{_f(y(0) + 14)}" text-anchor="end" '
                       f'transform="rotate(-40 {_f(cx)} {_f(y(0) + 14)})">{escape(e.method)}</text>')
            out.append("</g>")
            x += _W_BOX + _GAP
        out.append(f'<text x="{_f((x0 + x - _GAP) / 2)}" y="{height - 10}" text-anchor="middle" '
                   f'font-weight="bold">{escape(ds)}</text>')
        x += _GROUP_GAP
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode()


def render_report(report, fmt: str, provenance=None) -> bytes:
    """``fmt`` in csv (summary), long (per-replication csv), md, svg, json."""
    if fmt == "csv":
        return summary_csv(report, provenance)
    if fmt == "long":
        return long_csv(report, provenance)
    if fmt == "md":
        return markdown(report, provenance)
    if fmt == "svg":
        return svg(report, provenance)
    if fmt == "json":
        d = report.to_dict()
        if provenance:
            d["provenance"] = provenance
        return (json.dumps(d, indent=2, sort_keys=True) + "\n").encode()
    raise InvalidParameter(f"unknown format {fmt!r}")
