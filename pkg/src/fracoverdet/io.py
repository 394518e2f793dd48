"""Deterministic CSV/JSON writers and static SVG plots."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .fracsolver import Field
from .geometry.domains import Domain
from .neumann import NeumannTrace


def fmt(x) -> str:
    """Shortest round-trip decimal form."""
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_field_csv(path, u: Field) -> None:
    X = u.grid.nodes
    header = ["x", "u"] if X.shape[1] == 1 else ["x", "y", "u"]
    write_csv(path, header, (tuple(x) + (v,) for x, v in zip(X, u.values)))


def write_trace_csv(path, tr: NeumannTrace) -> None:
    S = tr.surface
    rows = ((a,) + tuple(p) + (v,) for a, p, v in zip(S.arclength, S.points, tr.values))
    write_csv(path, ["arclength", "x", "y", "Ns"], rows)


# ---------------------------------------------------------------------------
# svg


def _colour(v: float) -> str:
    # blue to yellow ramp
    v = min(max(v, 0.0), 1.0)
    r, g, b = int(40 + 215 * v), int(40 + 190 * v), int(160 - 120 * v)
    return f"#{r:02x}{g:02x}{b:02x}"


def _frame(lo, hi, size=480):
    span = max(hi[0] - lo[0], hi[1] - lo[1])
    k = size / span

    def tx(p):
        return (p[0] - lo[0]) * k, size - (p[1] - lo[1]) * k

    return tx, k, size


def _boundary_path(d: Domain, tx) -> str:
    pts = d.boundary_samples(256)[0]
    return " ".join(f"{a:.2f},{b:.2f}" for a, b in map(tx, pts))


def field_svg(u: Field) -> str:
    d = u.grid.domain
    X = u.grid.nodes
    if d.n == 1:
        return series_svg(X[:, 0], u.values, "u")
    lo, hi = d.bbox()
    tx, k, size = _frame(lo, hi)
    vmax = float(u.values.max()) or 1.0
    cell = u.h * k
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">']
    for x, v in zip(X, u.values):
        a, b = tx(x)
        out.append(f'<rect x="{a - cell / 2:.2f}" y="{b - cell / 2:.2f}" width="{cell:.2f}" '
                   f'height="{cell:.2f}" fill="{_colour(v / vmax)}"/>')
    out.append(f'<polygon points="{_boundary_path(d, tx)}" fill="none" stroke="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def trace_svg(d: Domain, tr: NeumannTrace) -> str:
    S = tr.surface
    P = np.vstack([S.points, d.boundary_samples(64)[0]])
    lo, hi = P.min(axis=0), P.max(axis=0)
    tx, k, size = _frame(lo, hi)
    v = tr.values
    span = float(v.max() - v.min()) or 1.0
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<polygon points="{_boundary_path(d, tx)}" fill="#dddddd" stroke="black"/>']
    for p, val in zip(S.points, v):
        a, b = tx(p)
        out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{_colour((val - v.min()) / span)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def series_svg(x, y, label: str = "") -> str:
    x, y = np.asarray(x, float), np.asarray(y, float)
    w, h = 480, 240
    xs = (x - x.min()) / (np.ptp(x) or 1.0) * (w - 20) + 10
    ys = h - 10 - (y - y.min()) / (np.ptp(y) or 1.0) * (h - 20)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">\n'
            f'<polyline points="{pts}" fill="none" stroke="black"/>\n'
            f'<text x="10" y="14">{label}</text>\n</svg>\n')


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
