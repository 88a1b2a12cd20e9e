"""Minimal SVG rendering of mean ranks with comparison intervals.

One row per approach (sorted by mean rank), a dot at the mean rank, a
horizontal bar for the interval, and a shaded band over the best approach's
interval: anything crossing the band is indistinguishable from the best.
"""

from __future__ import annotations

from .evaluate import McbResult

_ROW = 24
_LEFT = 170
_PLOT_W = 430
_PAD = 16


def render_rank_plot(result: McbResult, path) -> None:
    order = sorted(range(len(result.labels)), key=lambda i: result.mean_ranks[i])
    intervals = result.intervals
    lo = min(intervals[:, 0].min(), 1.0)
    hi = max(intervals[:, 1].max(), float(len(result.labels)))
    span = max(hi - lo, 1e-9)

    def x(v: float) -> float:
        return _LEFT + (v - lo) / span * _PLOT_W

    height = _PAD * 2 + _ROW * len(order) + 20
    width = _LEFT + _PLOT_W + _PAD
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    band_lo, band_hi = intervals[result.best]
    parts.append(
        f'<rect x="{x(band_lo):.1f}" y="{_PAD}" width="{x(band_hi) - x(band_lo):.1f}" '
        f'height="{_ROW * len(order)}" fill="#d9d9d9"/>'
    )
    for row, i in enumerate(order):
        cy = _PAD + _ROW * row + _ROW / 2
        a, b = intervals[i]
        parts.append(
            f'<line x1="{x(a):.1f}" y1="{cy:.1f}" x2="{x(b):.1f}" y2="{cy:.1f}" '
            f'stroke="#444" stroke-width="1.5"/>'
        )
        parts.append(f'<circle cx="{x(result.mean_ranks[i]):.1f}" cy="{cy:.1f}" r="3.5" fill="#1f5fa8"/>')
        parts.append(
            f'<text x="{_LEFT - 8}" y="{cy + 4:.1f}" text-anchor="end">'
            f"{_esc(result.labels[i])} - {result.mean_ranks[i]:.2f}</text>"
        )
    axis_y = _PAD + _ROW * len(order) + 14
    parts.append(
        f'<text x="{_LEFT + _PLOT_W / 2:.1f}" y="{axis_y}" text-anchor="middle">'
        f"mean rank (alpha={result.alpha:g})</text>"
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
