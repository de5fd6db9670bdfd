"""Hand-rolled SVG heatmap for a correlation matrix.

Cells are colored on a symmetric [-1, 1] diverging scale (blue through
white to red); each defined cell carries its value as a text label in
exactly the same shortest round-trip form the CSV files use, so the two
artifacts can be cross-checked by eye. Undefined cells are gray and
unlabeled.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .serialize import fmt_float
from .stats.correlation import CorrelationMatrix

__all__ = ["svg_heatmap"]

_CELL_W = 112
_CELL_H = 26
_LEFT = 220
_TOP = 170
_NEGATIVE = (33, 102, 172)
_POSITIVE = (178, 24, 43)
_WHITE = (255, 255, 255)
_MISSING = "#d6d6d6"


def _blend(a, b, t: float) -> str:
    channels = tuple(round(a[i] + (b[i] - a[i]) * t) for i in range(3))
    return "#{:02x}{:02x}{:02x}".format(*channels)


def _cell_color(value: float) -> str:
    clamped = max(-1.0, min(1.0, value))
    if clamped >= 0:
        return _blend(_WHITE, _POSITIVE, clamped)
    return _blend(_WHITE, _NEGATIVE, -clamped)


def _text_color(value: float) -> str:
    return "#ffffff" if abs(value) > 0.65 else "#1a1a1a"


def svg_heatmap(
    corr: CorrelationMatrix,
    title: str = "",
    digest: str | None = None,
    version: str | None = None,
) -> str:
    names = corr.names
    n = len(names)
    width = _LEFT + n * _CELL_W + 20
    height = _TOP + n * _CELL_H + 30
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if digest is not None:
        parts.append(f"<!-- qsimval {version} config={digest} -->")
    parts += [
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        '<style>text{font-family:Helvetica,Arial,sans-serif;}</style>',
    ]
    if title:
        parts.append(
            f'<text x="{_LEFT}" y="28" font-size="16" fill="#1a1a1a">{escape(title)}</text>'
        )
    for j, name in enumerate(names):
        x = _LEFT + j * _CELL_W + _CELL_W / 2
        parts.append(
            f'<text x="{x}" y="{_TOP - 8}" font-size="10" fill="#1a1a1a" '
            f'text-anchor="start" transform="rotate(-55 {x} {_TOP - 8})">{escape(name)}</text>'
        )
    for i, name in enumerate(names):
        y = _TOP + i * _CELL_H + _CELL_H / 2 + 3
        parts.append(
            f'<text x="{_LEFT - 8}" y="{y}" font-size="10" fill="#1a1a1a" '
            f'text-anchor="end">{escape(name)}</text>'
        )
    for i in range(n):
        for j in range(n):
            x = _LEFT + j * _CELL_W
            y = _TOP + i * _CELL_H
            value = corr.values[i, j]
            if math.isnan(value):
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{_CELL_W}" height="{_CELL_H}" '
                    f'fill="{_MISSING}" stroke="#ffffff"/>'
                )
                continue
            parts.append(
                f'<rect x="{x}" y="{y}" width="{_CELL_W}" height="{_CELL_H}" '
                f'fill="{_cell_color(float(value))}" stroke="#ffffff"/>'
            )
            parts.append(
                f'<text x="{x + _CELL_W / 2}" y="{y + _CELL_H / 2 + 3}" font-size="9" '
                f'fill="{_text_color(float(value))}" text-anchor="middle">'
                f"{escape(fmt_float(value))}</text>"
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
