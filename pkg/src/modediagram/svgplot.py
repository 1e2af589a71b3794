"""Minimal deterministic SVG scatter plots for the mode diagram."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["diagram_svg", "residuals_svg", "nice_ticks"]

WIDTH, HEIGHT = 800, 600
MARGIN = {"left": 80, "right": 30, "top": 40, "bottom": 60}
CURVE_SAMPLES = 256


def nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(count - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    if v != 0 and (abs(v) >= 1e4 or abs(v) < 1e-3):
        return f"{v:.2e}"
    return f"{v:.4g}"


class _Canvas:
    def __init__(self, xlim, ylim, title, xlabel, ylabel):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
            f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        ]
        self._axes(xlabel, ylabel)

    def px(self, x):
        w = WIDTH - MARGIN["left"] - MARGIN["right"]
        return MARGIN["left"] + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * w

    def py(self, y):
        h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        return HEIGHT - MARGIN["bottom"] - (np.asarray(y) - self.y0) / (self.y1 - self.y0) * h

    def _axes(self, xlabel, ylabel):
        left, right = MARGIN["left"], WIDTH - MARGIN["right"]
        top, bottom = MARGIN["top"], HEIGHT - MARGIN["bottom"]
        p = self.parts
        p.append(f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
                 'fill="none" stroke="black"/>')
        for t in nice_ticks(self.x0, self.x1):
            x = _fmt(self.px(t))
            p.append(f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom + 5}" stroke="black"/>')
            p.append(f'<text x="{x}" y="{bottom + 18}" text-anchor="middle">{_label(t)}</text>')
        for t in nice_ticks(self.y0, self.y1):
            y = _fmt(self.py(t))
            p.append(f'<line x1="{left - 5}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>')
            p.append(f'<text x="{left - 8}" y="{y}" text-anchor="end" dominant-baseline="middle">'
                     f'{_label(t)}</text>')
        p.append(f'<text x="{(left + right) / 2}" y="{HEIGHT - 15}" text-anchor="middle">'
                 f'{escape(xlabel)}</text>')
        p.append(f'<text x="18" y="{(top + bottom) / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {(top + bottom) / 2})">{escape(ylabel)}</text>')

    def points(self, x, y, color, r=2.5):
        xs, ys = self.px(x), self.py(y)
        self.parts.append(f'<g fill="{color}" fill-opacity="0.7">')
        self.parts.extend(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="{r}"/>' for a, b in zip(xs, ys))
        self.parts.append("</g>")

    def polyline(self, x, y, color, dash=None):
        xs, ys = self.px(x), self.py(y)
        keep = np.isfinite(xs) & np.isfinite(ys)
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(xs[keep], ys[keep]))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{extra}/>')

    def clip_open(self):
        left, top = MARGIN["left"], MARGIN["top"]
        w = WIDTH - MARGIN["left"] - MARGIN["right"]
        h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        self.parts.append(f'<clipPath id="plot"><rect x="{left}" y="{top}" width="{w}" height="{h}"/></clipPath>')
        self.parts.append('<g clip-path="url(#plot)">')

    def clip_close(self):
        self.parts.append("</g>")

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _pad(lo, hi, frac=0.04):
    span = hi - lo if hi > lo else max(abs(hi), 1.0)
    return lo - frac * span, hi + frac * span


def diagram_svg(density, delta, is_mode, threshold, title="Mode diagram") -> str:
    """Scatter of (density, delta) with the threshold curve overlaid.

    ``threshold`` maps positive densities to the curve value.
    """
    density = np.asarray(density, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    is_mode = np.asarray(is_mode, dtype=bool)
    xlim = _pad(0.0, float(density.max()))
    ylim = _pad(0.0, float(delta.max()))
    c = _Canvas(xlim, ylim, title, "estimated density", "distance to nearest higher-density point")
    c.clip_open()
    lo = max(float(density.min()), 1e-300)
    u = np.geomspace(lo, float(density.max()), CURVE_SAMPLES)
    c.polyline(u, threshold(u), "#d62728")
    c.points(density[~is_mode], delta[~is_mode], "#1f77b4")
    c.points(density[is_mode], delta[is_mode], "#d62728", r=5)
    c.clip_close()
    return c.render()


def residuals_svg(log_density, residual, is_mode, margin, title="Robust regression residuals") -> str:
    """Log-density against log-scale residuals with the ``M * s`` cut line."""
    x = np.asarray(log_density, dtype=np.float64)
    r = np.asarray(residual, dtype=np.float64)
    is_mode = np.asarray(is_mode, dtype=bool)
    xlim = _pad(float(x.min()), float(x.max()))
    ylim = _pad(min(float(r.min()), 0.0), max(float(r.max()), margin))
    c = _Canvas(xlim, ylim, title, "log density", "residual of log distance")
    c.clip_open()
    c.polyline(np.array(xlim), np.array([0.0, 0.0]), "#7f7f7f", dash="4 3")
    c.polyline(np.array(xlim), np.array([margin, margin]), "#d62728")
    c.points(x[~is_mode], r[~is_mode], "#1f77b4")
    c.points(x[is_mode], r[is_mode], "#d62728", r=5)
    c.clip_close()
    return c.render()
