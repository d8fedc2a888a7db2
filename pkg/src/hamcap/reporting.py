"""Deterministic JSON/CSV/SVG emission shared by the CLI.

All floats are rounded to 12 significant digits before serialization and
JSON keys are sorted, so identical queries produce byte-identical artifacts.
Infinities serialize as the strings "inf" / "-inf".
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from typing import Iterable

import numpy as np


def fmt_float(x: float):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return float(f"{x:.12g}")
    return x


def canonical(obj):
    """Recursively normalize floats and numpy scalars for stable output."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [canonical(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return fmt_float(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    return obj


def dump_json(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=2) + "\n"


def dump_csv(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _csv_cell(v):
    v = canonical(v)
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


class OutputDir:
    """Collects emitted files and writes a manifest listing them."""

    def __init__(self, path, query: dict):
        self.path = path
        self.query = query
        self.files = []
        if path is not None:
            os.makedirs(path, exist_ok=True)

    def write(self, name: str, text: str):
        if self.path is None:
            return None
        full = os.path.join(self.path, name)
        with open(full, "w") as fh:
            fh.write(text)
        self.files.append(name)
        return full

    def finish(self):
        if self.path is None:
            return
        manifest = {"files": sorted(self.files), "query": self.query}
        with open(os.path.join(self.path, "manifest.json"), "w") as fh:
            fh.write(dump_json(manifest))


# -- SVG line plots ------------------------------------------------------------

_W, _H = 640, 420
_MARGIN = 48


def _path(points):
    return " ".join(f"{x:.6g},{y:.6g}" for x, y in points)


def svg_line_plot(curves, title: str = "", tangents=()) -> str:
    """Minimal deterministic SVG: labeled polyline curves plus dashed tangents.

    ``curves`` is a list of (label, color, xs, ys); ``tangents`` a list of
    (x0, y0, slope) drawn as dashed chords across the plot width.
    """
    xs_all = np.concatenate([np.asarray(xs, dtype=float) for _, _, xs, _ in curves])
    ys_all = np.concatenate([np.asarray(ys, dtype=float) for _, _, _, ys in curves])
    for x0, y0, slope in tangents:
        span = (xs_all.max() - xs_all.min()) or 1.0
        ys_all = np.append(ys_all, [y0 - slope * span / 4, y0 + slope * span / 4])
    x_lo, x_hi = float(xs_all.min()), float(xs_all.max())
    y_lo, y_hi = float(ys_all.min()), float(ys_all.max())
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def to_px(x, y):
        px = _MARGIN + (x - x_lo) / (x_hi - x_lo) * (_W - 2 * _MARGIN)
        py = _H - _MARGIN - (y - y_lo) / (y_hi - y_lo) * (_H - 2 * _MARGIN)
        return px, py

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    # axes at x=0 / y=0 when inside range
    if x_lo < 0 < x_hi:
        a = to_px(0, y_lo)
        b = to_px(0, y_hi)
        parts.append(f'<line x1="{a[0]:.6g}" y1="{a[1]:.6g}" x2="{b[0]:.6g}" '
                     f'y2="{b[1]:.6g}" stroke="#bbbbbb"/>')
    if y_lo < 0 < y_hi:
        a = to_px(x_lo, 0)
        b = to_px(x_hi, 0)
        parts.append(f'<line x1="{a[0]:.6g}" y1="{a[1]:.6g}" x2="{b[0]:.6g}" '
                     f'y2="{b[1]:.6g}" stroke="#bbbbbb"/>')
    for x0, y0, slope in tangents:
        y_at = lambda x: y0 + slope * (x - x0)  # noqa: E731
        a = to_px(x_lo, y_at(x_lo))
        b = to_px(x_hi, y_at(x_hi))
        parts.append(f'<line x1="{a[0]:.6g}" y1="{a[1]:.6g}" x2="{b[0]:.6g}" '
                     f'y2="{b[1]:.6g}" stroke="#888888" stroke-dasharray="6,4"/>')
    for label, color, xs, ys in curves:
        pts = [to_px(x, y) for x, y in zip(xs, ys)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{_path(pts)}"/>')
    legend_y = 20
    for label, color, _, _ in curves:
        parts.append(f'<text x="{_MARGIN}" y="{legend_y}" fill="{color}" '
                     f'font-size="13" font-family="monospace">{label}</text>')
        legend_y += 16
    if title:
        parts.append(f'<text x="{_W - _MARGIN}" y="20" text-anchor="end" '
                     f'font-size="13" font-family="monospace">{title}</text>')
    parts.append(f'<text x="{_MARGIN}" y="{_H - 8}" font-size="11" '
                 f'font-family="monospace">x: [{x_lo:.6g}, {x_hi:.6g}]  '
                 f'y: [{y_lo:.6g}, {y_hi:.6g}]</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def profile_plot_svg(profile, scale: float, ell: int, title: str = "") -> str:
    """Plot H(p0) = f(p0/scale) and its p0-derivative with slope-ell tangents
    at the radial roots of f'(r) = scale * ell."""
    from .profiles import solve_slope

    lo, hi = profile.domain()
    rs = np.linspace(lo, hi, 801)
    xs = scale * rs
    f = profile.value(rs)
    fp = profile.slope(rs) / scale
    tangents = []
    if ell != 0:
        for root in solve_slope(profile, scale * ell):
            tangents.append((scale * root.r, profile.value(root.r), float(ell)))
    return svg_line_plot(
        curves=[("H(p0)", "#1f77b4", xs, f), ("dH/dp0", "#d62728", xs, fp)],
        title=title,
        tangents=tangents,
    )
