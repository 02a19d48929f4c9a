"""Isoline extraction from SIP rasters via marching squares.

A gamma-isoline bounds the region where the field value is strictly
greater than gamma.  Contours are traced on the piecewise-linear
interpolation between raster cell centers; saddle cells are disambiguated
by the cell-center average.
"""

from __future__ import annotations

import numpy as np

from .sip import Raster

__all__ = ["extract_isolines", "isolines_svg", "DEFAULT_LEVELS"]

DEFAULT_LEVELS = (0.1, 0.3, 0.5, 0.7, 0.9)


def _segments_for_level(values: np.ndarray, xs: np.ndarray, ys: np.ndarray, level: float):
    """Yield ((x1, y1), (x2, y2)) contour segments of {value > level}."""
    h, w = values.shape
    above = values > level
    segs = []

    def interp(vx0, vy0, v0, vx1, vy1, v1):
        t = (level - v0) / (v1 - v0)
        return (vx0 + t * (vx1 - vx0), vy0 + t * (vy1 - vy0))

    for i in range(h - 1):
        y0, y1 = ys[i], ys[i + 1]
        for j in range(w - 1):
            m = (
                int(above[i, j])
                | int(above[i, j + 1]) << 1
                | int(above[i + 1, j + 1]) << 2
                | int(above[i + 1, j]) << 3
            )
            if m == 0 or m == 15:
                continue
            x0, x1 = xs[j], xs[j + 1]
            v00, v01 = values[i, j], values[i, j + 1]
            v11, v10 = values[i + 1, j + 1], values[i + 1, j]
            # Edges oriented bottom->top / left->right so adjacent cells
            # compute bitwise-identical crossing points.
            eb = lambda: interp(x0, y0, v00, x1, y0, v01)
            er = lambda: interp(x1, y0, v01, x1, y1, v11)
            et = lambda: interp(x0, y1, v10, x1, y1, v11)
            el = lambda: interp(x0, y0, v00, x0, y1, v10)
            if m == 1:
                segs.append((el(), eb()))
            elif m == 2:
                segs.append((eb(), er()))
            elif m == 3:
                segs.append((el(), er()))
            elif m == 4:
                segs.append((er(), et()))
            elif m == 5:
                center = 0.25 * (v00 + v01 + v11 + v10)
                if center > level:
                    segs.append((el(), et()))
                    segs.append((eb(), er()))
                else:
                    segs.append((el(), eb()))
                    segs.append((er(), et()))
            elif m == 6:
                segs.append((eb(), et()))
            elif m == 7:
                segs.append((el(), et()))
            elif m == 8:
                segs.append((et(), el()))
            elif m == 9:
                segs.append((eb(), et()))
            elif m == 10:
                center = 0.25 * (v00 + v01 + v11 + v10)
                if center > level:
                    segs.append((et(), er()))
                    segs.append((el(), eb()))
                else:
                    segs.append((eb(), er()))
                    segs.append((et(), el()))
            elif m == 11:
                segs.append((et(), er()))
            elif m == 12:
                segs.append((er(), el()))
            elif m == 13:
                segs.append((eb(), er()))
            elif m == 14:
                segs.append((el(), eb()))
    return segs


def _chain(segments) -> list[np.ndarray]:
    """Stitch segments into polylines by matching shared endpoints."""
    adjacency: dict[tuple, list[int]] = {}
    for idx, (a, b) in enumerate(segments):
        adjacency.setdefault(a, []).append(idx)
        adjacency.setdefault(b, []).append(idx)
    used = [False] * len(segments)
    polylines = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        a, b = segments[start]
        chain = [a, b]
        # Extend forward from b, then backward from a.
        for endpoint, append in ((b, True), (a, False)):
            current = endpoint
            while True:
                nxt = None
                for idx in adjacency.get(current, ()):
                    if not used[idx]:
                        nxt = idx
                        break
                if nxt is None:
                    break
                used[nxt] = True
                p, q = segments[nxt]
                current = q if p == current else p
                if append:
                    chain.append(current)
                else:
                    chain.insert(0, current)
        polylines.append(np.asarray(chain))
    return polylines


def extract_isolines(raster: Raster, levels=DEFAULT_LEVELS) -> dict[float, list[np.ndarray]]:
    """Contours per level; each contour is an (m, 2) polyline (closed loops
    repeat their first point as last)."""
    levels = tuple(float(v) for v in levels)
    for level in levels:
        if not (0.0 < level < 1.0):
            raise ValueError(f"isoline level {level} outside (0, 1)")
    xs, ys = raster.cell_centers()
    out = {}
    for level in levels:
        segs = _segments_for_level(raster.values, xs, ys, level)
        out[level] = _chain(segs)
    return out


def isolines_svg(contours: dict[float, list[np.ndarray]], bounds) -> str:
    """Minimal SVG rendering; viewBox equals the raster bounds (y flipped
    into SVG's downward axis)."""
    x0, y0, x1, y1 = (float(v) for v in bounds)
    w, h = x1 - x0, y1 - y0
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:g} {y0:g} {w:g} {h:g}">',
    ]
    stroke_w = max(w, h) / 400.0
    for level in sorted(contours):
        lines.append(f'<g data-level="{level:g}" fill="none" stroke="black" stroke-width="{stroke_w:g}">')
        for poly in contours[level]:
            if len(poly) < 2:
                continue
            pts = " ".join(f"{p[0]:.8g},{(y0 + y1 - p[1]):.8g}" for p in poly)
            lines.append(f'<polyline points="{pts}"/>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
