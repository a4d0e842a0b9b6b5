"""Minimal static SVG charts: histogram with density overlays, and boxplots.

Output contains no timestamps or random ids, so it is byte-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from html import escape
from typing import Optional, Sequence

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 20, 36, 48
PALETTE = ("#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b9770e")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** np.floor(np.log10(raw))
    step = mag * min((1, 2, 2.5, 5, 10), key=lambda s: abs(s * mag - raw))
    start = np.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * span:
        ticks.append(round(float(t), 12))
        t += step
    return ticks


@dataclass
class Axes:
    x0: float
    x1: float
    y0: float
    y1: float
    left: float = MARGIN_L
    top: float = MARGIN_T
    width: float = WIDTH - MARGIN_L - MARGIN_R
    height: float = HEIGHT - MARGIN_T - MARGIN_B
    parts: list = field(default_factory=list)

    def px(self, x: float) -> float:
        return self.left + (x - self.x0) / (self.x1 - self.x0) * self.width

    def py(self, y: float) -> float:
        return self.top + self.height - (y - self.y0) / (self.y1 - self.y0) * self.height

    def frame(self, title: str, xlabel: str, ylabel: str, *, x_ticks: bool = True) -> None:
        l, t, w, h = self.left, self.top, self.width, self.height
        self.parts.append(
            f'<rect x="{_fmt(l)}" y="{_fmt(t)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            'fill="none" stroke="#333"/>'
        )
        for xt in _nice_ticks(self.x0, self.x1) if x_ticks else ():
            x = self.px(xt)
            self.parts.append(f'<line x1="{_fmt(x)}" y1="{_fmt(t + h)}" x2="{_fmt(x)}" y2="{_fmt(t + h + 5)}" stroke="#333"/>')
            self.parts.append(
                f'<text x="{_fmt(x)}" y="{_fmt(t + h + 18)}" font-size="11" text-anchor="middle">{xt:g}</text>'
            )
        for yt in _nice_ticks(self.y0, self.y1):
            y = self.py(yt)
            self.parts.append(f'<line x1="{_fmt(l - 5)}" y1="{_fmt(y)}" x2="{_fmt(l)}" y2="{_fmt(y)}" stroke="#333"/>')
            self.parts.append(
                f'<text x="{_fmt(l - 8)}" y="{_fmt(y + 4)}" font-size="11" text-anchor="end">{yt:g}</text>'
            )
        self.parts.append(
            f'<text x="{_fmt(l + w / 2)}" y="{_fmt(t - 14)}" font-size="14" text-anchor="middle">{escape(title)}</text>'
        )
        self.parts.append(
            f'<text x="{_fmt(l + w / 2)}" y="{_fmt(t + h + 38)}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>'
        )
        cy = t + h / 2
        self.parts.append(
            f'<text x="16" y="{_fmt(cy)}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 16 {_fmt(cy)})">{escape(ylabel)}</text>'
        )

    def polyline(self, xs: Sequence[float], ys: Sequence[float], color: str, width: float = 1.8) -> None:
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(min(y, self.y1)))}" for x, y in zip(xs, ys))
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>')

    def legend(self, entries: Sequence[tuple[str, str]]) -> None:
        x = self.left + self.width - 190
        for i, (label, color) in enumerate(entries):
            y = self.top + 14 + 16 * i
            self.parts.append(f'<rect x="{_fmt(x)}" y="{_fmt(y - 8)}" width="14" height="8" fill="{color}"/>')
            self.parts.append(f'<text x="{_fmt(x + 20)}" y="{_fmt(y)}" font-size="11">{escape(label)}</text>')


def _document(parts: Sequence[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">'
    )
    body = "\n".join(parts)
    return f'<?xml version="1.0" encoding="UTF-8"?>\n{head}\n<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n'


@dataclass
class Curve:
    x: np.ndarray
    y: np.ndarray
    label: str
    color: Optional[str] = None


@dataclass
class Histogram:
    edges: np.ndarray
    heights: np.ndarray
    label: str
    color: str = "#aab7b8"


def overlay_svg(
    histograms: Sequence[Histogram],
    curves: Sequence[Curve],
    *,
    title: str,
    xlabel: str = "eigenvalue",
    ylabel: str = "density",
    y_cap: Optional[float] = None,
) -> str:
    """Density-scale histogram bars with analytic density curves on top.

    ``y_cap`` clips the vertical range; densities with an integrable
    singularity at the lower edge would otherwise flatten the picture.
    """
    xs = [h.edges for h in histograms] + [c.x for c in curves]
    x0 = min(float(np.min(v)) for v in xs)
    x1 = max(float(np.max(v)) for v in xs)
    ymax = 0.0
    for h in histograms:
        ymax = max(ymax, float(np.max(h.heights)) if h.heights.size else 0.0)
    for c in curves:
        finite = c.y[np.isfinite(c.y)]
        if finite.size:
            ymax = max(ymax, float(np.max(finite)))
    if y_cap is not None:
        ymax = min(ymax, y_cap)
    ymax = ymax * 1.05 if ymax > 0 else 1.0
    if x1 <= x0:
        x1 = x0 + 1.0
    ax = Axes(x0, x1, 0.0, ymax)
    for h in histograms:
        opacity = 0.55 if len(histograms) > 1 else 0.9
        for lo, hi, v in zip(h.edges[:-1], h.edges[1:], h.heights):
            if v <= 0:
                continue
            top = ax.py(min(v, ymax))
            ax.parts.append(
                f'<rect x="{_fmt(ax.px(lo))}" y="{_fmt(top)}" width="{_fmt(ax.px(hi) - ax.px(lo))}" '
                f'height="{_fmt(ax.py(0.0) - top)}" fill="{h.color}" fill-opacity="{opacity}" stroke="white" stroke-width="0.3"/>'
            )
    for i, c in enumerate(curves):
        c.color = c.color or PALETTE[i % len(PALETTE)]
        ax.polyline(c.x, c.y, c.color)
    ax.frame(title, xlabel, ylabel)
    ax.legend([(h.label, h.color) for h in histograms] + [(c.label, c.color) for c in curves])
    return _document(ax.parts)


@dataclass
class BoxGroup:
    label: str
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: Sequence[float] = ()
    reference: Optional[float] = None


def boxplot_svg(groups: Sequence[BoxGroup], *, title: str, xlabel: str = "p") -> str:
    """Tukey boxplots side by side; each group may carry a dashed reference level."""
    lows = [g.whisker_low for g in groups] + [v for g in groups for v in g.outliers]
    highs = [g.whisker_high for g in groups] + [v for g in groups for v in g.outliers]
    refs = [g.reference for g in groups if g.reference is not None]
    lows.extend(refs)
    highs.extend(refs)
    lo, hi = min(lows), max(highs)
    pad = 0.08 * (hi - lo) if hi > lo else 0.5
    ax = Axes(0.0, float(len(groups)), lo - pad, hi + pad)
    slot = ax.width / len(groups)
    for i, g in enumerate(groups):
        cx = ax.left + slot * (i + 0.5)
        half = min(slot * 0.25, 40)
        ax.parts.append(
            f'<line x1="{_fmt(cx)}" y1="{_fmt(ax.py(g.whisker_low))}" x2="{_fmt(cx)}" '
            f'y2="{_fmt(ax.py(g.whisker_high))}" stroke="#333"/>'
        )
        for w in (g.whisker_low, g.whisker_high):
            ax.parts.append(
                f'<line x1="{_fmt(cx - half / 2)}" y1="{_fmt(ax.py(w))}" x2="{_fmt(cx + half / 2)}" '
                f'y2="{_fmt(ax.py(w))}" stroke="#333"/>'
            )
        top, bot = ax.py(g.q3), ax.py(g.q1)
        ax.parts.append(
            f'<rect x="{_fmt(cx - half)}" y="{_fmt(top)}" width="{_fmt(2 * half)}" height="{_fmt(bot - top)}" '
            'fill="#d6eaf8" stroke="#333"/>'
        )
        ax.parts.append(
            f'<line x1="{_fmt(cx - half)}" y1="{_fmt(ax.py(g.median))}" x2="{_fmt(cx + half)}" '
            f'y2="{_fmt(ax.py(g.median))}" stroke="#c0392b" stroke-width="2"/>'
        )
        if g.reference is not None:
            ry = _fmt(ax.py(g.reference))
            ax.parts.append(
                f'<line x1="{_fmt(cx - slot / 2 + 4)}" y1="{ry}" x2="{_fmt(cx + slot / 2 - 4)}" y2="{ry}" '
                'stroke="#1e8449" stroke-width="1.5" stroke-dasharray="6 4"/>'
            )
        for v in g.outliers:
            ax.parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(ax.py(v))}" r="2.5" fill="none" stroke="#333"/>')
        ax.parts.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(ax.top + ax.height + 18)}" font-size="11" '
            f'text-anchor="middle">{escape(g.label)}</text>'
        )
    # the group labels replace numeric x ticks
    ax.frame(title, xlabel, "largest eigenvalue", x_ticks=False)
    return _document(ax.parts)

