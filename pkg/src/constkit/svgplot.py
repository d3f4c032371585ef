"""Minimal deterministic SVG charts: scatter, SER curves, power CDF."""

from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 30, 50

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39"]


def _f(x: float) -> str:
    return f"{x:.2f}"


class _Axes:
    def __init__(self, xlim, ylim, logy: bool = False):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.logy = logy
        self.pw = WIDTH - LEFT - RIGHT
        self.ph = HEIGHT - TOP - BOTTOM

    def px(self, x: float) -> float:
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y: float) -> float:
        if self.logy:
            y0, y1, y = math.log10(self.y0), math.log10(self.y1), math.log10(y)
        else:
            y0, y1 = self.y0, self.y1
        return TOP + (1.0 - (y - y0) / (y1 - y0)) * self.ph


def _frame(ax: _Axes, title: str, xlabel: str, ylabel: str, xticks, yticks) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{ax.pw}" height="{ax.ph}" fill="none" stroke="black"/>',
    ]
    for t in xticks:
        x = _f(ax.px(t))
        out.append(f'<line x1="{x}" y1="{TOP + ax.ph}" x2="{x}" y2="{TOP + ax.ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{TOP + ax.ph + 16}" text-anchor="middle">{t:g}</text>')
    for t in yticks:
        y = _f(ax.py(t))
        out.append(f'<line x1="{LEFT - 4}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y}" text-anchor="end" dominant-baseline="middle">{t:g}</text>')
    out.append(f'<text x="{LEFT + ax.pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{TOP + ax.ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ax.ph / 2:.1f})">{escape(ylabel)}</text>')
    return out


def _legend(labels: Sequence[str]) -> list[str]:
    out = []
    for i, lab in enumerate(labels):
        y = TOP + 10 + 16 * i
        x = WIDTH - RIGHT + 10
        out.append(f'<line x1="{x}" y1="{y}" x2="{x + 18}" y2="{y}" stroke="{PALETTE[i % len(PALETTE)]}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{x + 22}" y="{y}" dominant-baseline="middle">{escape(lab)}</text>')
    return out


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    span = hi - lo
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw))
    start = math.ceil(lo / step) * step
    return [round(start + k * step, 10) for k in range(int((hi - start) / step + 1e-9) + 1)]


def scatter_svg(points: np.ndarray, title: str = "Constellation") -> str:
    """One ``<circle>`` per point on equal axes."""
    lim = max(1.0, float(np.max(np.abs(np.concatenate([points.real, points.imag]))))) * 1.15
    ax = _Axes((-lim, lim), (-lim, lim))
    ticks = _ticks(-lim, lim, 4)
    out = _frame(ax, title, "In-phase", "Quadrature", ticks, ticks)
    for z in points:
        out.append(f'<circle cx="{_f(ax.px(z.real))}" cy="{_f(ax.py(z.imag))}" r="4" fill="{PALETTE[0]}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def ser_curves_svg(series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
                   title: str = "SER versus SNR") -> str:
    """One ``<polyline>`` per series on a log SER axis; zero SER points are dropped."""
    xs = [x for snr, _ in series.values() for x in snr]
    pos = [s for _, sers in series.values() for s in sers if s > 0]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1
    ymin = 10 ** math.floor(math.log10(min(pos))) if pos else 1e-6
    ax = _Axes((x0, x1), (ymin, 1.0), logy=True)
    yticks = [10.0 ** k for k in range(int(round(math.log10(ymin))), 1)]
    out = _frame(ax, title, "SNR (dB)", "SER", _ticks(x0, x1), yticks)
    for i, (label, (snr, sers)) in enumerate(series.items()):
        pts = " ".join(f"{_f(ax.px(x))},{_f(ax.py(s))}" for x, s in zip(snr, sers) if s > 0)
        out.append(f'<polyline fill="none" stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="1.5" '
                   f'points="{pts}"><title>{escape(label)}</title></polyline>')
    out.extend(_legend(list(series)))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cdf_steps(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted values and the empirical CDF at each."""
    v, counts = np.unique(values, return_counts=True)
    return v, np.cumsum(counts) / values.size


def power_cdf_svg(series: Mapping[str, tuple[np.ndarray, np.ndarray]],
                  xlim: tuple[float, float] = (-20.0, 8.0),
                  title: str = "CDF of instantaneous power") -> str:
    """Step polylines of the power CDF; input values are in dB re average power."""
    ax = _Axes(xlim, (0.0, 1.0))
    out = _frame(ax, title, "Instantaneous power / average power (dB)", "CDF",
                 _ticks(*xlim), [0, 0.2, 0.4, 0.6, 0.8, 1.0])
    for i, (label, (v, F)) in enumerate(series.items()):
        coords = [(xlim[0], 0.0)]
        prev = 0.0
        for x, f in zip(v, F):
            x = min(max(float(x), xlim[0]), xlim[1])
            coords += [(x, prev), (x, float(f))]
            prev = float(f)
        coords.append((xlim[1], prev))
        pts = " ".join(f"{_f(ax.px(x))},{_f(ax.py(y))}" for x, y in coords)
        out.append(f'<polyline fill="none" stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="1.5" '
                   f'points="{pts}"><title>{escape(label)}</title></polyline>')
    out.extend(_legend(list(series)))
    out.append("</svg>")
    return "\n".join(out) + "\n"
