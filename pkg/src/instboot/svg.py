"""Standalone SVG simplex plots.

Corners: D bottom-left, C bottom-right, CM top.  Arrows show drift
direction with length proportional to drift magnitude, capped at a
fraction of the lattice spacing.  Stable rest points are filled black
circles, all other rest points open circles.
"""

from __future__ import annotations

import math
import os
from typing import Sequence

import numpy as np

from .simplex import FixedPoint, GradientField, Stability

SIZE = 600.0
MARGIN = 50.0


def corners(size: float = SIZE, margin: float = MARGIN) -> np.ndarray:
    """Canvas coordinates of the D, C and CM corners (rows)."""
    side = size - 2 * margin
    height = side * math.sqrt(3) / 2
    return np.array(
        [
            [margin, margin + height],
            [margin + side, margin + height],
            [margin + side / 2, margin],
        ]
    )


def to_canvas(x, size: float = SIZE, margin: float = MARGIN) -> np.ndarray:
    return np.asarray(x, dtype=float) @ corners(size, margin)


def _f(v: float) -> str:
    return f"{v:.3f}"


def simplex_svg(
    field: GradientField,
    fixed_points: Sequence[FixedPoint] = (),
    size: float = SIZE,
    title: str | None = None,
) -> str:
    cs = corners(size)
    side = size - 2 * MARGIN
    height = side * math.sqrt(3) / 2
    canvas_h = height + 2 * MARGIN

    starts = to_canvas(field.points, size)
    dirs = field.vectors @ cs  # drift sums to zero, so the translation drops out
    mag = np.hypot(dirs[:, 0], dirs[:, 1])
    top = mag.max() if len(mag) and mag.max() > 0 else 1.0
    cap = 0.8 * side / max(int(math.isqrt(2 * len(field.points))), 2)
    lengths = cap * mag / top
    unit = np.divide(dirs, mag[:, None], out=np.zeros_like(dirs), where=mag[:, None] > 0)
    ends = starts + unit * lengths[:, None]

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(size)}" height="{_f(canvas_h)}" '
        f'viewBox="0 0 {_f(size)} {_f(canvas_h)}">',
        "<defs>",
        '<marker id="head" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="4" '
        'markerHeight="4" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#444"/></marker>',
        "</defs>",
    ]
    if title:
        out.append(f'<title>{_escape(title)}</title>')
    poly = " ".join(f"{_f(x)},{_f(y)}" for x, y in cs)
    out.append(f'<polygon class="frame" points="{poly}" fill="none" stroke="black" stroke-width="1.5"/>')
    for (x1, y1), (x2, y2) in zip(starts, ends):
        out.append(
            f'<line class="arrow" x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            'stroke="#444" stroke-width="1" marker-end="url(#head)"/>'
        )
    for fp in fixed_points:
        cx, cy = to_canvas(fp.location, size)
        stable = fp.stability is Stability.STABLE
        fill = "black" if stable else "white"
        out.append(
            f'<circle class="fixed-point {fp.stability.value}" cx="{_f(cx)}" cy="{_f(cy)}" r="6" '
            f'fill="{fill}" stroke="black" stroke-width="1.5"/>'
        )
    offsets = [(-22, 18), (8, 18), (-10, -12)]
    for (x, y), (dx, dy), name in zip(cs, offsets, ("D", "C", "CM")):
        out.append(
            f'<text class="corner" x="{_f(x + dx)}" y="{_f(y + dy)}" font-family="sans-serif" '
            f'font-size="16">{name}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_simplex(
    field: GradientField,
    fixed_points: Sequence[FixedPoint],
    out_path: str | os.PathLike,
    title: str | None = None,
) -> str:
    """Write the SVG to ``out_path`` and return the path."""
    text = simplex_svg(field, fixed_points, title=title)
    try:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write SVG to {out_path}: {exc.strerror}") from exc
    return str(out_path)
