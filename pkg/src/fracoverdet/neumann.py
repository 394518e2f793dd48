"""Nonlocal normal derivative N_s u at exterior points, its sampled Lipschitz
seminorm on outer parallel surfaces, and directional derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import FracParams, kernel_constant
from .errors import PreconditionError
from .fracsolver import Field
from .geometry.domains import Domain, as_points
from .geometry.measures import ParallelSurface, direction, parallel_surface

CHUNK = 256


def _exterior(d: Domain, pts: np.ndarray) -> None:
    if np.any(d.signed_distance(pts) <= 0):
        raise PreconditionError("evaluation points must lie outside the closure of the domain")


def _kernel_sums(u: Field, pts: np.ndarray, power: float, weights=None) -> np.ndarray:
    """sum_j u_j w(x - y_j) |x - y_j|^{-power} for every row x of pts."""
    Y = u.grid.nodes
    out = np.empty(pts.shape[0])
    for i0 in range(0, pts.shape[0], CHUNK):
        X = pts[i0:i0 + CHUNK]
        diff = X[:, None, :] - Y[None, :, :]
        r2 = (diff**2).sum(-1)
        k = r2 ** (-power / 2)
        if weights is not None:
            k = k * (diff @ weights)
        out[i0:i0 + CHUNK] = k @ u.values
    return out


def nonlocal_neumann(u: Field, d: Domain, p: FracParams, x):
    """-c_{n,s} h^n sum_y u(y) / |x - y|^{n+2s}."""
    pts, single = as_points(x, d.n)
    _exterior(d, pts)
    v = -kernel_constant(p) * u.h**d.n * _kernel_sums(u, pts, d.n + 2 * p.s)
    return float(v[0]) if single else v


def neumann_directional_derivative(u: Field, d: Domain, p: FracParams, x, omega):
    """c_{n,s}(n+2s) h^n sum_y u(y) ((x - y).omega) / |x - y|^{n+2s+2}."""
    pts, single = as_points(x, d.n)
    _exterior(d, pts)
    w = direction(omega)
    n, s = d.n, p.s
    v = kernel_constant(p) * (n + 2 * s) * u.h**n * _kernel_sums(u, pts, n + 2 * s + 2, w)
    return float(v[0]) if single else v


def lipschitz_seminorm(points: np.ndarray, values: np.ndarray):
    """Exact maximum of |v_i - v_j| / |x_i - x_j| over distinct pairs."""
    best, pair = 0.0, (0, 0)
    for i in range(points.shape[0] - 1):
        dist = np.linalg.norm(points[i + 1:] - points[i], axis=1)
        q = np.abs(values[i + 1:] - values[i]) / dist
        j = int(np.argmax(q))
        if q[j] > best:
            best, pair = float(q[j]), (i, i + 1 + j)
    return best, pair


@dataclass
class NeumannTrace:
    surface: ParallelSurface
    values: np.ndarray
    seminorm: float
    pair: tuple

    @property
    def mean(self) -> float:
        return float(self.values.mean())


def neumann_trace(u: Field, d: Domain, p: FracParams, t: float, m: int = 128) -> NeumannTrace:
    if t < 4 * u.h:
        raise PreconditionError(f"trace offset t={t} must be at least 4h = {4 * u.h}")
    surf = parallel_surface(d, t, m)
    vals = nonlocal_neumann(u, d, p, surf.points)
    sem, pair = lipschitz_seminorm(surf.points, vals)
    return NeumannTrace(surf, vals, sem, pair)
