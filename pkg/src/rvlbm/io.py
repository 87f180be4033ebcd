"""CSV and SVG output.

Floats are written with ``repr`` so files round-trip exactly and do not
depend on the locale. SVG files embed everything they draw.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

OUTPUT_ENV = "RVLBM_OUTPUT_DIR"


def output_dir(explicit=None) -> Path:
    """``explicit`` if given, else ``$RVLBM_OUTPUT_DIR``, else the working directory."""
    path = Path(explicit or os.environ.get(OUTPUT_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# -- SVG ---------------------------------------------------------------------

_W, _H = 420, 420
_MARGIN = 60


def _colour(t: float) -> str:
    # white -> dark blue
    t = min(max(t, 0.0), 1.0)
    r = int(round(255 * (1 - 0.85 * t)))
    g = int(round(255 * (1 - 0.7 * t)))
    b = int(round(255 - 90 * t))
    return f"#{r:02x}{g:02x}{b:02x}"


def _axes(x_axis, y_axis, xlabel, ylabel, title):
    x0, x1 = float(x_axis[0]), float(x_axis[-1])
    y0, y1 = float(y_axis[0]), float(y_axis[-1])
    parts = [
        f'<rect x="{_MARGIN}" y="{_MARGIN // 2}" width="{_W}" height="{_H}" '
        'fill="none" stroke="black"/>',
        f'<text x="{_MARGIN + _W / 2}" y="{_MARGIN // 2 - 8}" text-anchor="middle" '
        f'font-size="14">{escape(title)}</text>',
        f'<text x="{_MARGIN + _W / 2}" y="{_MARGIN // 2 + _H + 40}" text-anchor="middle" '
        f'font-size="13">{escape(xlabel)}</text>',
        f'<text x="16" y="{_MARGIN // 2 + _H / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {_MARGIN // 2 + _H / 2})">{escape(ylabel)}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        px = _MARGIN + frac * _W
        py = _MARGIN // 2 + _H - frac * _H
        parts.append(f'<text x="{px:.1f}" y="{_MARGIN // 2 + _H + 16}" text-anchor="middle" '
                     f'font-size="11">{xv:.2f}</text>')
        parts.append(f'<text x="{_MARGIN - 6}" y="{py + 4:.1f}" text-anchor="end" '
                     f'font-size="11">{yv:.2f}</text>')
    return parts


def heatmap_svg(path, x_axis, y_axis, values, title="", xlabel="Vx / λ", ylabel="Vy / λ",
                vmin=None, vmax=None) -> Path:
    """Cell grid ``values[iy, ix]`` drawn with y increasing upwards.

    Boolean grids are drawn as filled cells on white. Real grids use a white
    to blue ramp between ``vmin`` and ``vmax``, with non-finite cells in red.
    Runs of equal cells along x are merged into one rectangle.
    """
    values = np.asarray(values)
    ny, nx = values.shape
    cw, ch = _W / nx, _H / ny
    if values.dtype == bool:
        def fill(v):
            return "#3060a0" if v else None
    else:
        finite = values[np.isfinite(values)]
        lo = vmin if vmin is not None else (float(finite.min()) if finite.size else 0.0)
        hi = vmax if vmax is not None else (float(finite.max()) if finite.size else 1.0)
        span = hi - lo if hi > lo else 1.0

        def fill(v):
            return _colour((v - lo) / span) if np.isfinite(v) else "#d04040"
    cells = []
    for iy in range(ny):
        row = [fill(v) for v in values[iy]]
        ix = 0
        while ix < nx:
            start, colour = ix, row[ix]
            while ix < nx and row[ix] == colour:
                ix += 1
            if colour is None:
                continue
            x = _MARGIN + start * cw
            y = _MARGIN // 2 + (ny - 1 - iy) * ch
            cells.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{(ix - start) * cw:.2f}" '
                         f'height="{ch:.2f}" fill="{colour}"/>')
    body = cells + _axes(x_axis, y_axis, xlabel, ylabel, title)
    return _write_svg(path, body)


def _write_svg(path, body) -> Path:
    width, height = _W + _MARGIN + 20, _H + _MARGIN + 30
    text = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n'
            + "\n".join(body) + "\n</svg>\n")
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
