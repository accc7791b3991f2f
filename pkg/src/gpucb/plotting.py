"""Static SVG charts drawn from primitives.

Each plot kind declares the CSV columns it needs. Output is deterministic:
coordinates are rounded to two decimals and no timestamps are written.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import ConfigurationError
from .infogain import loglog_slope

__all__ = ["PLOT_SCHEMAS", "SchemaError", "plot_csv", "render_svg"]

PLOT_SCHEMAS = {
    "regret": ("t", "R"),
    "scaling": ("T", "median_R"),
    "coverage": ("noise", "delta", "crossing_rate", "threshold"),
    "infogain": ("t", "gamma_hat", "gamma_bound"),
}

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


class SchemaError(ConfigurationError):
    """CSV columns do not match the plot kind."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


def _read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        return header, list(reader)


def _num(v):
    try:
        return float(v)
    except (TypeError, ValueError):
        return math.nan


def _fmt(v):
    return f"{v:.4g}"


class _Frame:
    """Maps data coordinates into the plotting rectangle."""

    def __init__(self, xs, ys, logx=False, logy=False):
        self.logx, self.logy = logx, logy
        tx = self._tx(np.asarray(xs, dtype=float), logx)
        ty = self._tx(np.asarray(ys, dtype=float), logy)
        tx, ty = tx[np.isfinite(tx)], ty[np.isfinite(ty)]
        self.x0, self.x1 = self._span(tx)
        self.y0, self.y1 = self._span(ty)

    @staticmethod
    def _tx(v, log):
        if not log:
            return v
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, np.log10(np.where(v > 0, v, 1.0)), np.nan)

    @staticmethod
    def _span(v):
        if v.size == 0:
            return 0.0, 1.0
        lo, hi = float(v.min()), float(v.max())
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        return lo, hi

    def px(self, x):
        x = self._tx(np.atleast_1d(np.asarray(x, dtype=float)), self.logx)
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)

    def py(self, y):
        y = self._tx(np.atleast_1d(np.asarray(y, dtype=float)), self.logy)
        return HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)

    def ticks(self, axis, n=5):
        lo, hi = (self.x0, self.x1) if axis == "x" else (self.y0, self.y1)
        log = self.logx if axis == "x" else self.logy
        vals = np.linspace(lo, hi, n)
        return [(10.0 ** v if log else v) for v in vals]


def _axes(frame, title, xlabel, ylabel):
    out = [
        f'<rect x="{LEFT}" y="{TOP}" width="{WIDTH - LEFT - RIGHT}" height="{HEIGHT - TOP - BOTTOM}" '
        'fill="none" stroke="#000" class="axes"/>',
        f'<text x="{WIDTH / 2:.2f}" y="{TOP - 14}" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="13" class="xlabel">'
        f'{escape(xlabel)}</text>',
        f'<text x="16" y="{HEIGHT / 2:.2f}" text-anchor="middle" font-size="13" class="ylabel" '
        f'transform="rotate(-90 16 {HEIGHT / 2:.2f})">{escape(ylabel)}</text>',
    ]
    for v in frame.ticks("x"):
        x = float(frame.px(v)[0])
        out.append(f'<line x1="{x:.2f}" y1="{HEIGHT - BOTTOM}" x2="{x:.2f}" y2="{HEIGHT - BOTTOM + 5}" stroke="#000"/>')
        out.append(f'<text x="{x:.2f}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle" font-size="11">{_fmt(v)}</text>')
    for v in frame.ticks("y"):
        y = float(frame.py(v)[0])
        out.append(f'<line x1="{LEFT - 5}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="#000"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{_fmt(v)}</text>')
    return out


def _polyline(frame, xs, ys, name, color):
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    keep = np.isfinite(xs) & np.isfinite(ys)
    if frame.logx:
        keep &= xs > 0
    if frame.logy:
        keep &= ys > 0
    px, py = frame.px(xs[keep]), frame.py(ys[keep])
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    return (f'<polyline class="series" data-name="{escape(name)}" fill="none" stroke="{color}" '
            f'stroke-width="1.5" points="{pts}"/>')


def _legend(names):
    out = []
    for i, name in enumerate(names):
        y = TOP + 16 + 16 * i
        out.append(f'<line x1="{LEFT + 12}" y1="{y - 4}" x2="{LEFT + 32}" y2="{y - 4}" '
                   f'stroke="{COLORS[i % len(COLORS)]}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + 38}" y="{y}" font-size="12">{escape(name)}</text>')
    return out


def _no_data():
    return [f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT / 2:.2f}" text-anchor="middle" font-size="16" '
            'class="no-data">no data</text>']


def _document(body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>', *body, "</svg>"]) + "\n"


def _col(rows, name):
    return np.array([_num(r[name]) for r in rows])


def _regret(rows):
    t, R = _col(rows, "t"), _col(rows, "R")
    frame = _Frame(t, R)
    body = _axes(frame, "Cumulative regret", "t", "R_t")
    if not rows:
        return body + _no_data()
    return body + [_polyline(frame, t, R, "R", COLORS[0])]


def _scaling(rows):
    T, R = _col(rows, "T"), _col(rows, "median_R")
    frame = _Frame(T, R, logx=True, logy=True)
    body = _axes(frame, "Regret scaling (log-log)", "T", "median R_T")
    if not rows:
        return body + _no_data()
    body.append(_polyline(frame, T, R, "median_R", COLORS[0]))
    for x, y in zip(frame.px(T), frame.py(R)):
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{COLORS[0]}"/>')
    keep = (T > 0) & (R > 0)
    if keep.sum() >= 2:
        slope = loglog_slope(T[keep], R[keep])
        body.append(f'<text x="{LEFT + 12}" y="{TOP + 20}" font-size="13" class="slope" '
                    f'data-slope="{slope!r}">fitted slope = {slope:.3f}</text>')
    return body


def _coverage(rows):
    n = len(rows)
    rate, thr = _col(rows, "crossing_rate"), _col(rows, "threshold")
    top = float(np.nanmax(np.concatenate([rate, thr]))) if n else 1.0
    frame = _Frame([0, max(n, 1)], [0.0, top * 1.1 if top > 0 else 1.0])
    body = [
        f'<rect x="{LEFT}" y="{TOP}" width="{WIDTH - LEFT - RIGHT}" height="{HEIGHT - TOP - BOTTOM}" '
        'fill="none" stroke="#000" class="axes"/>',
        f'<text x="{WIDTH / 2:.2f}" y="{TOP - 14}" text-anchor="middle" font-size="15">Crossing rates</text>',
        f'<text x="16" y="{HEIGHT / 2:.2f}" text-anchor="middle" font-size="13" class="ylabel" '
        f'transform="rotate(-90 16 {HEIGHT / 2:.2f})">crossing rate</text>',
    ]
    for v in frame.ticks("y"):
        y = float(frame.py(v)[0])
        body.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{_fmt(v)}</text>')
    if not rows:
        return body + _no_data()
    base = float(frame.py(0.0)[0])
    for i, row in enumerate(rows):
        x0, x1 = float(frame.px(i + 0.15)[0]), float(frame.px(i + 0.85)[0])
        y = float(frame.py(rate[i])[0])
        yt = float(frame.py(thr[i])[0])
        label = f"{row['noise']} d={row['delta']}"
        body.append(f'<rect class="bar" x="{x0:.2f}" y="{y:.2f}" width="{x1 - x0:.2f}" '
                    f'height="{base - y:.2f}" fill="{COLORS[0]}"/>')
        body.append(f'<line class="threshold" x1="{x0:.2f}" y1="{yt:.2f}" x2="{x1:.2f}" y2="{yt:.2f}" '
                    f'stroke="{COLORS[1]}" stroke-width="2"/>')
        body.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle" '
                    f'font-size="10">{escape(label)}</text>')
    return body


def _infogain(rows):
    t, g, b = _col(rows, "t"), _col(rows, "gamma_hat"), _col(rows, "gamma_bound")
    frame = _Frame(t, np.concatenate([g, b]) if rows else [])
    body = _axes(frame, "Information gain: greedy estimate and bound", "t", "gamma")
    if not rows:
        return body + _no_data()
    body += [_polyline(frame, t, g, "gamma_hat", COLORS[0])]
    if np.any(np.isfinite(b)):
        body.append(_polyline(frame, t, b, "gamma_bound", COLORS[1]))
        body += _legend(["gamma_hat", "gamma_bound"])
    return body


_RENDERERS = {"regret": _regret, "scaling": _scaling, "coverage": _coverage, "infogain": _infogain}


def render_svg(kind: str, header, rows) -> str:
    """SVG text for ``rows`` (dicts keyed by column) under the schema of ``kind``."""
    if kind not in PLOT_SCHEMAS:
        raise ConfigurationError(f"unknown plot kind {kind!r}; expected one of {sorted(PLOT_SCHEMAS)}")
    missing = [c for c in PLOT_SCHEMAS[kind] if c not in header]
    if missing:
        raise SchemaError(f"{kind} plot needs column(s) {', '.join(missing)}", missing)
    return _document(_RENDERERS[kind](rows))


def plot_csv(kind: str, csv_path, svg_path) -> Path:
    """Render ``csv_path`` to ``svg_path``; returns the output path."""
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise ConfigurationError(f"CSV file not found: {csv_path}")
    header, rows = _read_csv(csv_path)
    svg = render_svg(kind, header, rows)
    svg_path = Path(svg_path)
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    svg_path.write_text(svg)
    return svg_path
