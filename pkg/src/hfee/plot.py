"""Minimal SVG box plot of cross-validated R^2 groups.

Values below -0.5 are squeezed into a band between two gray lines so that a
few strongly negative folds do not flatten the rest of the figure.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

COMPRESS_FROM = -0.5
COMPRESS_TO = -8.5
BAND_HEIGHT = 0.25  # display units the compressed range occupies
Y_TOP = 1.0

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 20, 20, 60


def display_value(v: float) -> float:
    """Map an R^2 value onto the display axis (identity above -0.5)."""
    if v >= COMPRESS_FROM:
        return v
    frac = (COMPRESS_FROM - max(v, COMPRESS_TO)) / (COMPRESS_FROM - COMPRESS_TO)
    return COMPRESS_FROM - BAND_HEIGHT * frac


Y_BOTTOM = COMPRESS_FROM - BAND_HEIGHT


def _y(v: float) -> float:
    span = Y_TOP - Y_BOTTOM
    d = min(display_value(v), Y_TOP)
    return MARGIN_T + (Y_TOP - d) / span * (HEIGHT - MARGIN_T - MARGIN_B)


def boxplot_svg(reports) -> str:
    reports = list(reports)
    n = max(len(reports), 1)
    slot = (WIDTH - MARGIN_L - MARGIN_R) / n
    half = slot * 0.25
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    for tick in (1.0, 0.5, 0.0, -0.5):
        y = _y(tick)
        out.append(f'<line x1="{x0}" x2="{x1}" y1="{y:.2f}" y2="{y:.2f}" stroke="#eeeeee"/>')
        out.append(f'<text x="{x0 - 6}" y="{y + 4:.2f}" text-anchor="end">{tick:g}</text>')
    for v in (COMPRESS_FROM, COMPRESS_TO):
        y = _y(v)
        out.append(
            f'<line class="band" x1="{x0}" x2="{x1}" y1="{y:.2f}" y2="{y:.2f}" stroke="gray"/>'
        )
    out.append(f'<text x="{x0 - 6}" y="{_y(COMPRESS_TO) + 4:.2f}" text-anchor="end">{COMPRESS_TO:g}</text>')

    for i, r in enumerate(reports):
        cx = MARGIN_L + slot * (i + 0.5)
        label = escape(f"{r.config.scenario.value} / {r.config.subset.value}")
        out.append(f'<text x="{cx:.2f}" y="{HEIGHT - MARGIN_B + 18}" text-anchor="middle">{label}</text>')
        b = r.box
        if b is None:
            continue
        yq1, yq3, ymed = _y(b.q1), _y(b.q3), _y(b.median)
        ylo, yhi = _y(b.whisker_low), _y(b.whisker_high)
        out += [
            f'<line class="whisker" x1="{cx:.2f}" x2="{cx:.2f}" y1="{yq3:.2f}" y2="{yhi:.2f}" stroke="black" stroke-dasharray="4 2"/>',
            f'<line class="whisker" x1="{cx:.2f}" x2="{cx:.2f}" y1="{yq1:.2f}" y2="{ylo:.2f}" stroke="black" stroke-dasharray="4 2"/>',
            f'<line x1="{cx - half / 2:.2f}" x2="{cx + half / 2:.2f}" y1="{yhi:.2f}" y2="{yhi:.2f}" stroke="black"/>',
            f'<line x1="{cx - half / 2:.2f}" x2="{cx + half / 2:.2f}" y1="{ylo:.2f}" y2="{ylo:.2f}" stroke="black"/>',
            f'<rect class="box" x="{cx - half:.2f}" y="{yq3:.2f}" width="{2 * half:.2f}" '
            f'height="{max(yq1 - yq3, 0.5):.2f}" fill="none" stroke="blue"/>',
            f'<line class="median" x1="{cx - half:.2f}" x2="{cx + half:.2f}" y1="{ymed:.2f}" y2="{ymed:.2f}" stroke="red" stroke-width="2"/>',
            f'<circle class="mean" cx="{cx:.2f}" cy="{_y(b.mean):.2f}" r="3" fill="black"/>',
        ]
        for v in b.outliers:
            y = _y(v)
            out.append(
                f'<path class="outlier" d="M{cx - 4:.2f},{y:.2f}h8M{cx:.2f},{y - 4:.2f}v8" stroke="red"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_boxplot(reports, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(boxplot_svg(reports), encoding="utf-8", newline="\n")
    return path
