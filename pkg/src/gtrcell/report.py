"""CSV rows and a small SVG line-chart writer."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import escape

SCHEMA_VERSION = 1
CSV_HEADER = ("schema_version", "swept_param", "swept_value", "method", "ase_nats", "err_or_stderr", "flags")


@dataclass(frozen=True)
class Row:
    swept_param: str
    swept_value: Optional[float]
    method: str
    ase_nats: Optional[float]
    err: Optional[float]
    flags: str = ""

    @property
    def ok(self):
        return not self.flags


def _num(x):
    if x is None or not math.isfinite(x):
        return ""
    return format(x, ".12g")


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow((SCHEMA_VERSION, r.swept_param, _num(r.swept_value), r.method,
                    _num(r.ase_nats), _num(r.err), r.flags))
    return buf.getvalue()


def write_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        out = []
        for rec in reader:
            out.append(Row(
                swept_param=rec["swept_param"],
                swept_value=float(rec["swept_value"]) if rec["swept_value"] else None,
                method=rec["method"],
                ase_nats=float(rec["ase_nats"]) if rec["ase_nats"] else None,
                err=float(rec["err_or_stderr"]) if rec["err_or_stderr"] else None,
                flags=rec["flags"],
            ))
        return out


def summary_line(r):
    where = f"{r.swept_param}={_num(r.swept_value)} " if r.swept_param else ""
    value = _num(r.ase_nats) or "n/a"
    tail = f" [{r.flags}]" if r.flags else ""
    return f"{where}{r.method}: {value} nats/s/Hz (± {_num(r.err) or 'n/a'}){tail}"


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
_W, _H = 640, 420
_L, _R, _T, _B = 70, 190, 30, 55


@dataclass(frozen=True)
class Series:
    label: str
    x: tuple
    y: tuple
    markers: bool = False


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * step:
        out.append(round(t, 12))
        t += step
    return out


def line_chart(series, title, x_label, y_label):
    pts = [(x, y) for s in series for x, y in zip(s.x, s.y) if y is not None]
    xs = [p[0] for p in pts] or [0.0, 1.0]
    ys = [p[1] for p in pts] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    pad = 0.05 * (y1 - y0 or 1.0)
    y0, y1 = y0 - pad, y1 + pad
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    pw, ph = _W - _L - _R, _H - _T - _B

    def px(x):
        return _L + (x - x0) / (x1 - x0) * pw

    def py(y):
        return _T + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_L + pw / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{_L}" y="{_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.1f}" y1="{_T + ph}" x2="{px(t):.1f}" y2="{_T + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.1f}" y="{_T + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{_L - 5}" y1="{py(t):.1f}" x2="{_L}" y2="{py(t):.1f}" stroke="black"/>')
        out.append(f'<line x1="{_L}" y1="{py(t):.1f}" x2="{_L + pw}" y2="{py(t):.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{_L - 8}" y="{py(t) + 4:.1f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{_L + pw / 2:.1f}" y="{_H - 12}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text x="16" y="{_T + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_T + ph / 2:.1f})">{escape(y_label)}</text>')

    for i, s in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        xy = [(px(x), py(y)) for x, y in zip(s.x, s.y) if y is not None]
        if s.markers:
            for cx, cy in xy:
                out.append(f'<path d="M{cx - 4:.1f},{cy:.1f} L{cx:.1f},{cy - 4:.1f} L{cx + 4:.1f},{cy:.1f} '
                           f'L{cx:.1f},{cy + 4:.1f} Z" fill="none" stroke="{color}"/>')
        elif xy:
            d = " ".join(f"{cx:.1f},{cy:.1f}" for cx, cy in xy)
            out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _T + 14 + 18 * i
        lx = _L + pw + 12
        if s.markers:
            out.append(f'<path d="M{lx + 8:.1f},{ly - 8:.1f} l4,4 l-4,4 l-4,-4 Z" fill="none" stroke="{color}"/>')
        else:
            out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{lx + 24}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series, title, x_label, y_label):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(line_chart(series, title, x_label, y_label))


def series_from_rows(rows, label_prefix=""):
    """One chart series per method present in ``rows``."""
    methods = []
    for r in rows:
        if r.method not in methods:
            methods.append(r.method)
    out = []
    for m in methods:
        sel = [r for r in rows if r.method == m]
        out.append(Series(
            label=f"{label_prefix}{m}",
            x=tuple(r.swept_value if r.swept_value is not None else 0.0 for r in sel),
            y=tuple(r.ase_nats for r in sel),
            markers=m.startswith("simulate") or m == "hybrid",
        ))
    return out
