"""Minimal standalone SVG line charts (no plotting dependency).

Fixed 800x600 canvas, two polyline series: the swept values and a
horizontal benchmark reference. Output bytes are deterministic for a
given input, which keeps chart files diffable across reruns.
"""

from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN_LEFT, MARGIN_RIGHT = 90, 40
MARGIN_TOP, MARGIN_BOTTOM = 60, 70
N_TICKS = 5

SERIES_COLOR = "#1f77b4"
BENCHMARK_COLOR = "#d62728"


def _fmt(v):
    return format(float(v), ".2f")


def _ticks(lo, hi):
    return np.linspace(lo, hi, N_TICKS)


def line_chart(xs, ys, benchmark, title="", xlabel="", ylabel="",
               series_label="sweep", benchmark_label="benchmark"):
    """SVG document with the (xs, ys) polyline and a horizontal benchmark line."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size == 0:
        raise ValueError("xs and ys must be nonempty and equally long")
    benchmark = float(benchmark)

    x_lo, x_hi = float(xs.min()), float(xs.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_lo = min(float(ys.min()), benchmark)
    y_hi = max(float(ys.max()), benchmark)
    pad = (y_hi - y_lo) * 0.08 or 0.05
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x):
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.0f}" y="30" text-anchor="middle" font-family="sans-serif" '
            f'font-size="18">{title}</text>'
        )

    axis_y = MARGIN_TOP + plot_h
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{axis_y}" x2="{MARGIN_LEFT + plot_w}" y2="{axis_y}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{axis_y}" stroke="black"/>'
    )
    for t in _ticks(x_lo, x_hi):
        parts.append(f'<line x1="{_fmt(px(t))}" y1="{axis_y}" x2="{_fmt(px(t))}" y2="{axis_y + 6}" stroke="black"/>')
        parts.append(
            f'<text x="{_fmt(px(t))}" y="{axis_y + 22}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="12">{format(t, ".4g")}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        parts.append(f'<line x1="{MARGIN_LEFT - 6}" y1="{_fmt(py(t))}" x2="{MARGIN_LEFT}" y2="{_fmt(py(t))}" stroke="black"/>')
        parts.append(
            f'<text x="{MARGIN_LEFT - 10}" y="{_fmt(py(t) + 4)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="12">{format(t, ".4g")}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{MARGIN_LEFT + plot_w / 2:.0f}" y="{HEIGHT - 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{xlabel}</text>'
        )
    if ylabel:
        cx, cy = 24, MARGIN_TOP + plot_h / 2
        parts.append(
            f'<text x="{cx}" y="{cy:.0f}" text-anchor="middle" font-family="sans-serif" font-size="14" '
            f'transform="rotate(-90 {cx} {cy:.0f})">{ylabel}</text>'
        )

    bench_y = _fmt(py(benchmark))
    parts.append(
        f'<polyline fill="none" stroke="{BENCHMARK_COLOR}" stroke-width="2" '
        f'points="{_fmt(MARGIN_LEFT)},{bench_y} {_fmt(MARGIN_LEFT + plot_w)},{bench_y}"/>'
    )
    pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
    parts.append(f'<polyline fill="none" stroke="{SERIES_COLOR}" stroke-width="2" points="{pts}"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="{SERIES_COLOR}"/>')

    lx = MARGIN_LEFT + plot_w - 170
    parts.append(f'<line x1="{lx}" y1="{MARGIN_TOP + 10}" x2="{lx + 28}" y2="{MARGIN_TOP + 10}" stroke="{SERIES_COLOR}" stroke-width="2"/>')
    parts.append(
        f'<text x="{lx + 34}" y="{MARGIN_TOP + 14}" font-family="sans-serif" font-size="12">{series_label}</text>'
    )
    parts.append(f'<line x1="{lx}" y1="{MARGIN_TOP + 28}" x2="{lx + 28}" y2="{MARGIN_TOP + 28}" stroke="{BENCHMARK_COLOR}" stroke-width="2"/>')
    parts.append(
        f'<text x="{lx + 34}" y="{MARGIN_TOP + 32}" font-family="sans-serif" font-size="12">{benchmark_label}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
