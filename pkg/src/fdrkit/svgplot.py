"""Minimal dependency-free SVG line charts (FDR curves and DET plots)."""

from __future__ import annotations

import math
from statistics import NormalDist
from typing import Callable, Mapping, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=70, right=150, top=30, bottom=55)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")

_STD = NormalDist()
# Clamp so rates of exactly 0 or 1 stay on the probit axis.
_PROBIT_EPS = 1e-7


def probit(p: float) -> float:
    return _STD.inv_cdf(min(max(p, _PROBIT_EPS), 1 - _PROBIT_EPS))


def _n(v: float) -> str:
    return f"{v:.2f}"


def line_chart(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    *,
    title: str,
    xlabel: str,
    ylabel: str,
    xticks: Sequence[tuple[float, str]] | None = None,
    yticks: Sequence[tuple[float, str]] | None = None,
    xmap: Callable[[float], float] = float,
    ymap: Callable[[float], float] = float,
    xlim: tuple[float, float] | None = None,
    ylim: tuple[float, float] | None = None,
    markers: bool = True,
) -> str:
    """Render named ``(xs, ys)`` series. ``xmap``/``ymap`` warp the axes."""
    pts = {k: ([xmap(x) for x in xs], [ymap(y) for y in ys]) for k, (xs, ys) in series.items()}
    allx = [x for xs, _ in pts.values() for x in xs]
    ally = [y for _, ys in pts.values() for y in ys]
    x0, x1 = (xmap(xlim[0]), xmap(xlim[1])) if xlim else (min(allx, default=0), max(allx, default=1))
    y0, y1 = (ymap(ylim[0]), ymap(ylim[1])) if ylim else (min(ally, default=0), max(ally, default=1))
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.05, y1 + 0.05
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN["top"] + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2 - MARGIN["right"] / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    for v, text in xticks or []:
        x = sx(xmap(v))
        if MARGIN["left"] - 0.5 <= x <= MARGIN["left"] + pw + 0.5:
            out.append(f'<line x1="{_n(x)}" y1="{MARGIN["top"]}" x2="{_n(x)}" y2="{MARGIN["top"] + ph}" stroke="#ddd"/>')
            out.append(f'<text x="{_n(x)}" y="{MARGIN["top"] + ph + 16}" text-anchor="middle">{escape(text)}</text>')
    for v, text in yticks or []:
        y = sy(ymap(v))
        if MARGIN["top"] - 0.5 <= y <= MARGIN["top"] + ph + 0.5:
            out.append(f'<line x1="{MARGIN["left"]}" y1="{_n(y)}" x2="{MARGIN["left"] + pw}" y2="{_n(y)}" stroke="#ddd"/>')
            out.append(f'<text x="{MARGIN["left"] - 6}" y="{_n(y + 4)}" text-anchor="end">{escape(text)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    cy = MARGIN["top"] + ph / 2
    out.append(f'<text x="16" y="{cy}" text-anchor="middle" transform="rotate(-90 16 {cy})">{escape(ylabel)}</text>')
    for i, (name, (xs, ys)) in enumerate(pts.items()):
        color = PALETTE[i % len(PALETTE)]
        path = " ".join(f"{_n(sx(x))},{_n(sy(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        if markers:
            out.extend(f'<circle cx="{_n(sx(x))}" cy="{_n(sy(y))}" r="3" fill="{color}"/>' for x, y in zip(xs, ys))
        ly = MARGIN["top"] + 16 + 18 * i
        lx = MARGIN["left"] + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def fdr_chart(curves: Mapping, title: str = "FDR over operating points") -> str:
    """FDR against x for labelled :class:`~fdrkit.fdr.FdrCurve` objects."""
    xs = sorted({p.exponent for c in curves.values() for p in c.points})
    lo = min((p.fdr for c in curves.values() for p in c.points), default=0.0)
    ymin = math.floor(min(lo, 0.9) * 20) / 20
    return line_chart(
        {k: (c.exponents, c.values) for k, c in curves.items()},
        title=title, xlabel="FMR = 10^-x", ylabel="FDR",
        xticks=[(x, f"10^-{x:g}") for x in xs],
        yticks=[(v / 20, f"{v / 20:.2f}") for v in range(int(ymin * 20), 21)],
        ylim=(ymin, 1.0),
    )


MAX_DET_POINTS = 2000
_DET_TICKS = [(p, f"{p:g}") for p in (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.2, 0.5, 0.8, 0.95)]


def det_chart(series: Mapping[str, tuple], title: str = "DET") -> str:
    """DET plot on normal-deviate axes; ``series[d] = (taus, fmr, fnmr)``."""
    data = {}
    for d, (_, fm, fn) in series.items():
        keep = [(a, b) for a, b in zip(fm.tolist(), fn.tolist()) if 0 < a < 1 and 0 < b < 1]
        if len(keep) > MAX_DET_POINTS:
            step = len(keep) / MAX_DET_POINTS
            keep = [keep[int(i * step)] for i in range(MAX_DET_POINTS)] + [keep[-1]]
        data[d] = ([a for a, _ in keep], [b for _, b in keep])
    return line_chart(
        data, title=title, xlabel="FMR", ylabel="FNMR",
        xticks=_DET_TICKS, yticks=_DET_TICKS, xmap=probit, ymap=probit,
        xlim=(1e-6, 0.95), ylim=(1e-4, 0.95), markers=False,
    )
