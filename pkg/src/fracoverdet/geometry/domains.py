"""Domain primitives with exact signed distance queries.

Every domain exposes a signed distance (negative inside), support points,
boundary and offset-curve sampling, and a few scalar summaries. Domains are
frozen dataclasses, hence hashable, so grid-based measures can be cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import cKDTree
from scipy.special import ellipe

from ..errors import GeometryError, PreconditionError, SpecError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def as_points(x, n: int) -> Tuple[np.ndarray, bool]:
    """Return ``x`` as an (N, n) float array and whether it was a single point."""
    a = np.asarray(x, dtype=float)
    if n == 1:
        if a.ndim == 0:
            return a.reshape(1, 1), True
        return a.reshape(-1, 1), False
    if a.ndim == 1:
        if a.shape[0] != n:
            raise PreconditionError(f"expected a point in R^{n}")
        return a.reshape(1, n), True
    if a.shape[-1] != n:
        raise PreconditionError(f"expected points in R^{n}")
    return a.reshape(-1, n), False


def _finish(v: np.ndarray, single: bool):
    return float(v[0]) if single else v


def golden_max(f, lo: np.ndarray, hi: np.ndarray, iters: int = 48) -> np.ndarray:
    """Vectorized golden-section search for the maximizer of f on [lo, hi]."""
    a, b = np.array(lo, dtype=float), np.array(hi, dtype=float)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        a2 = np.where(left, a, c)
        b2 = np.where(left, d, b)
        x = np.where(left, b2 - GOLDEN * (b2 - a2), a2 + GOLDEN * (b2 - a2))
        fx = f(x)
        c, d, fc, fd = (
            np.where(left, x, d), np.where(left, c, x),
            np.where(left, fx, fd), np.where(left, fc, fx),
        )
        a, b = a2, b2
    return 0.5 * (a + b)


class Domain:
    """Base class. Subclasses provide ``signed_distance`` and geometry summaries."""

    n: int = 2
    kind: str = ""

    # -- queries -------------------------------------------------------
    def signed_distance(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def sd(self, x):
        pts, single = as_points(x, self.n)
        return _finish(self.signed_distance(pts), single)

    def contains(self, x):
        pts, single = as_points(x, self.n)
        v = self.signed_distance(pts) < 0
        return bool(v[0]) if single else v

    def max_boundary_distance(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def support_points(self, nu) -> np.ndarray:  # pragma: no cover
        """Extreme points of the closure in direction ``nu`` (endpoints of the face)."""
        raise NotImplementedError

    def support(self, nu) -> float:
        nu = np.asarray(nu, dtype=float).reshape(self.n)
        return float(np.max(self.support_points(nu) @ nu))

    def boundary_samples(self, m: int):
        """m boundary points with outward unit normals, in traversal order."""
        pts, nrm, _ = self.offset_curve(0.0, m)
        return pts, nrm

    def offset_curve(self, t: float, m: int):  # pragma: no cover
        """m points of {dist = t} equally spaced in arclength, normals, arclengths."""
        raise NotImplementedError

    # -- summaries -----------------------------------------------------
    @property
    def center(self) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def bbox(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.n == 1:
            lo, hi = -self.support([-1.0]), self.support([1.0])
            return np.array([lo]), np.array([hi])
        lo = np.array([-self.support([-1.0, 0.0]), -self.support([0.0, -1.0])])
        hi = np.array([self.support([1.0, 0.0]), self.support([0.0, 1.0])])
        return lo, hi

    is_convex: bool = True

    def transformed(self, angle: float = 0.0, shift=(0.0, 0.0), scale: float = 1.0) -> "Domain":
        """Image under x -> scale * R(angle) x + shift (angle in radians)."""
        raise NotImplementedError  # pragma: no cover


# ---------------------------------------------------------------------------
# 1D


@dataclass(frozen=True)
class Interval(Domain):
    a: float
    b: float
    n = 1
    kind = "interval"

    def __post_init__(self):
        if not self.b > self.a:
            raise PreconditionError("interval needs a < b")

    def signed_distance(self, x):
        x = x[:, 0]
        return np.maximum(self.a - x, x - self.b)

    def max_boundary_distance(self, x):
        x = x[:, 0]
        return np.maximum(np.abs(x - self.a), np.abs(x - self.b))

    def support_points(self, nu):
        nu = float(np.asarray(nu, dtype=float).reshape(-1)[0])
        return np.array([[self.b if nu > 0 else self.a]])

    def offset_curve(self, t, m=2):
        pts = np.array([[self.a - t], [self.b + t]])
        return pts, np.array([[-1.0], [1.0]]), np.array([0.0, 1.0])

    @property
    def center(self):
        return np.array([0.5 * (self.a + self.b)])

    diam = property(lambda self: self.b - self.a)
    area = property(lambda self: self.b - self.a)
    perimeter = property(lambda self: 2.0)
    inradius = property(lambda self: 0.5 * (self.b - self.a))

    def transformed(self, angle=0.0, shift=(0.0,), scale=1.0):
        if angle != 0.0:
            raise PreconditionError("intervals only admit translations and dilations")
        sh = float(np.asarray(shift, dtype=float).reshape(-1)[0])
        return Interval(scale * self.a + sh, scale * self.b + sh)

    @property
    def spec(self):
        return f"interval:a={self.a!r},b={self.b!r}"


# ---------------------------------------------------------------------------
# smooth closed curves


class SmoothCurveDomain(Domain):
    """Domains bounded by a smooth closed curve theta -> gamma(theta), CCW."""

    n = 2
    _samples = 512

    def gamma(self, th):  # pragma: no cover
        raise NotImplementedError

    def dgamma(self, th):  # pragma: no cover
        raise NotImplementedError

    def normal(self, th):
        d = self.dgamma(th)
        nrm = np.stack([d[..., 1], -d[..., 0]], axis=-1)
        return nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)

    def inside_mask(self, x):  # pragma: no cover
        raise NotImplementedError

    @cached_property
    def _sample_table(self):
        th = np.linspace(0.0, 2 * np.pi, 1024, endpoint=False)
        P = self.gamma(th)
        return th, P, cKDTree(P)

    def boundary_distance(self, x: np.ndarray, chunk: int = 65536) -> np.ndarray:
        """Unsigned distance to the curve: nearest samples from a KD-tree, then
        golden refinement in the best basin and in a competing one, if any."""
        th, P, tree = self._sample_table
        M = th.size
        step = 2 * np.pi / M
        out = np.empty(x.shape[0])
        for i0 in range(0, x.shape[0], chunk):
            X = x[i0:i0 + chunk]
            dist, idx = tree.query(X, k=8)
            k1 = idx[:, 0]
            gap = np.abs((idx - k1[:, None] + M // 2) % M - M // 2)
            far = gap > 2
            has2 = far.any(axis=1)
            k2 = np.where(has2, idx[np.arange(X.shape[0]), np.argmax(far, axis=1)], k1)
            best = dist[:, 0] ** 2
            best = np.minimum(best, self._refine(X, th[k1], step))
            if has2.any():
                sub = np.flatnonzero(has2)
                best[sub] = np.minimum(best[sub], self._refine(X[sub], th[k2[sub]], step))
            out[i0:i0 + chunk] = np.sqrt(best)
        return out

    def _refine(self, X, c, step):
        """Squared distance from X to the curve near parameters c (within +-step)."""

        def negd(t):
            return -((self.gamma(t) - X) ** 2).sum(-1)

        return -negd(golden_max(negd, c - step, c + step, iters=38))

    def signed_distance(self, x):
        d = self.boundary_distance(x)
        return np.where(self.inside_mask(x), -d, d)

    def max_boundary_distance(self, x, chunk: int = 1024):
        th = np.linspace(0.0, 2 * np.pi, 1024, endpoint=False)
        P = self.gamma(th)
        step = th[1] - th[0]
        out = np.empty(x.shape[0])
        for i0 in range(0, x.shape[0], chunk):
            X = x[i0:i0 + chunk]
            D = ((X[:, None, :] - P[None, :, :]) ** 2).sum(-1)
            c = th[np.argmax(D, axis=1)]

            def d2(t, X=X):
                return ((self.gamma(t) - X) ** 2).sum(-1)

            tt = golden_max(d2, c - step, c + step)
            out[i0:i0 + chunk] = np.sqrt(np.maximum(d2(tt), D.max(axis=1)))
        return out

    def support_points(self, nu):
        nu = np.asarray(nu, dtype=float).reshape(2)
        th = np.linspace(0.0, 2 * np.pi, 2048, endpoint=False)
        v = self.gamma(th) @ nu
        c = np.array([th[np.argmax(v)]])
        step = th[1] - th[0]
        tt = golden_max(lambda t: self.gamma(t) @ nu, c - step, c + step, iters=60)
        return self.gamma(tt).reshape(1, 2)

    def offset_curve(self, t, m):
        fine = max(16 * m, 4096)
        th = np.linspace(0.0, 2 * np.pi, fine + 1)
        P = self.gamma(th) + t * self.normal(th)
        seg = np.linalg.norm(np.diff(P, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        target = np.arange(m) * (s[-1] / m)
        tq = np.interp(target, s, th)
        pts = self.gamma(tq) + t * self.normal(tq)
        return pts, self.normal(tq), target

    @cached_property
    def perimeter(self) -> float:
        th = np.linspace(0.0, 2 * np.pi, 8192, endpoint=False)
        return float(np.linalg.norm(self.dgamma(th), axis=1).mean() * 2 * np.pi)

    @cached_property
    def diam(self) -> float:
        th = np.linspace(0.0, 2 * np.pi, 720, endpoint=False)
        P = self.gamma(th)
        D = ((P[:, None, :] - P[None, :, :]) ** 2).sum(-1)
        i, j = np.unravel_index(np.argmax(D), D.shape)
        res = minimize(
            lambda v: -float(((self.gamma(v[0]) - self.gamma(v[1])) ** 2).sum()),
            np.array([th[i], th[j]]), method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 2000},
        )
        return float(math.sqrt(max(-res.fun, D[i, j])))

    @cached_property
    def inradius(self) -> float:
        res = minimize(
            lambda v: float(self.signed_distance(v.reshape(1, 2))[0]),
            np.asarray(self.center, dtype=float), method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000},
        )
        return float(-res.fun)


@dataclass(frozen=True)
class Disk(SmoothCurveDomain):
    cx: float = 0.0
    cy: float = 0.0
    R: float = 1.0
    kind = "disk"

    def __post_init__(self):
        if not self.R > 0:
            raise PreconditionError("disk radius must be positive")

    @property
    def center(self):
        return np.array([self.cx, self.cy])

    def gamma(self, th):
        th = np.asarray(th, dtype=float)
        return np.stack([self.cx + self.R * np.cos(th), self.cy + self.R * np.sin(th)], axis=-1)

    def dgamma(self, th):
        th = np.asarray(th, dtype=float)
        return np.stack([-self.R * np.sin(th), self.R * np.cos(th)], axis=-1)

    def signed_distance(self, x):
        return np.hypot(x[:, 0] - self.cx, x[:, 1] - self.cy) - self.R

    def inside_mask(self, x):
        return self.signed_distance(x) < 0

    def max_boundary_distance(self, x):
        return np.hypot(x[:, 0] - self.cx, x[:, 1] - self.cy) + self.R

    def support_points(self, nu):
        nu = np.asarray(nu, dtype=float).reshape(2)
        return (self.center + self.R * nu / np.linalg.norm(nu)).reshape(1, 2)

    diam = property(lambda self: 2 * self.R)
    area = property(lambda self: math.pi * self.R**2)
    perimeter = property(lambda self: 2 * math.pi * self.R)
    inradius = property(lambda self: self.R)

    def transformed(self, angle=0.0, shift=(0.0, 0.0), scale=1.0):
        c = scale * rotation(angle) @ self.center + np.asarray(shift, dtype=float)
        return Disk(float(c[0]), float(c[1]), scale * self.R)

    @property
    def spec(self):
        return f"disk:cx={self.cx!r},cy={self.cy!r},R={self.R!r}"


def _ellipse_distance_q1(y0, y1, e0, e1, iters: int = 80):
    """Distance from first-quadrant points to the ellipse with semi-axes e0 >= e1.

    Root of the secular function F(s) = (r0 z0 / (s + r0))^2 + (z1 / (s + 1))^2 - 1
    on Eberly's bracket; F is convex and decreasing there, so Newton steps from
    the left end increase monotonically to the root. Steps leaving the bracket
    fall back to bisection. The stopping test allows a few ulps, since the
    iterates can cycle between two neighbouring floats at the root.
    """
    out = np.empty_like(y0)
    pos1 = y1 > 0
    both = pos1 & (y0 > 0)
    if both.any():
        a0, a1 = y0[both], y1[both]
        z0, z1 = a0 / e0, a1 / e1
        g = z0 * z0 + z1 * z1 - 1.0
        r0 = (e0 / e1) ** 2
        n0 = r0 * z0
        lo = z1 - 1.0
        hi = np.where(g < 0, 0.0, np.hypot(n0, z1) - 1.0)
        s = lo.copy()
        # z1 below rounding puts the start on the pole; the bracket recovers
        with np.errstate(divide="ignore", invalid="ignore"):
            for _ in range(iters):
                q0, q1 = n0 / (s + r0), z1 / (s + 1.0)
                F = q0 * q0 + q1 * q1 - 1.0
                dF = -2.0 * (q0 * q0 / (s + r0) + q1 * q1 / (s + 1.0))
                lo = np.where(F > 0, s, lo)
                hi = np.where(F > 0, hi, s)
                new = s - F / dF
                bad = ~((new >= lo) & (new <= hi))
                new = np.where(bad, 0.5 * (lo + hi), new)
                done = (np.abs(F) <= 4e-15) | (np.abs(new - s) <= 4e-15 * np.maximum(1.0, np.abs(s)))
                s = new
                if done.all():
                    break
        x0 = r0 * a0 / (s + r0)
        x1 = a1 / (s + 1.0)
        out[both] = np.hypot(x0 - a0, x1 - a1)
    axis1 = pos1 & ~both
    out[axis1] = np.abs(y1[axis1] - e1)
    axis0 = ~pos1
    if axis0.any():
        a0 = y0[axis0]
        numer = e0 * a0
        denom = e0 * e0 - e1 * e1
        inner = numer < denom
        xde = np.where(inner, numer / np.where(denom > 0, denom, 1.0), 1.0)
        xde = np.clip(xde, -1.0, 1.0)
        x0 = e0 * xde
        x1 = e1 * np.sqrt(1.0 - xde * xde)
        out[axis0] = np.where(inner, np.hypot(x0 - a0, x1), np.abs(a0 - e0))
    return out


@dataclass(frozen=True)
class Ellipse(SmoothCurveDomain):
    a: float = 1.0
    b: float = 1.0
    cx: float = 0.0
    cy: float = 0.0
    angle: float = 0.0  # radians
    kind = "ellipse"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise PreconditionError("ellipse semi-axes must be positive")

    @property
    def center(self):
        return np.array([self.cx, self.cy])

    @cached_property
    def _rot(self):
        return rotation(self.angle)

    def _local(self, x):
        return (x - self.center) @ self._rot

    def gamma(self, th):
        th = np.asarray(th, dtype=float)
        loc = np.stack([self.a * np.cos(th), self.b * np.sin(th)], axis=-1)
        return loc @ self._rot.T + self.center

    def dgamma(self, th):
        th = np.asarray(th, dtype=float)
        loc = np.stack([-self.a * np.sin(th), self.b * np.cos(th)], axis=-1)
        return loc @ self._rot.T

    def inside_mask(self, x):
        y = self._local(x)
        return (y[:, 0] / self.a) ** 2 + (y[:, 1] / self.b) ** 2 < 1.0

    def boundary_distance(self, x, chunk=None):
        y = np.abs(self._local(x))
        if self.a >= self.b:
            return _ellipse_distance_q1(y[:, 0], y[:, 1], self.a, self.b)
        return _ellipse_distance_q1(y[:, 1], y[:, 0], self.b, self.a)

    def support_points(self, nu):
        nu = np.asarray(nu, dtype=float).reshape(2)
        v = self._rot.T @ nu
        q = np.array([self.a**2 * v[0], self.b**2 * v[1]])
        q = q / math.sqrt(self.a**2 * v[0] ** 2 + self.b**2 * v[1] ** 2)
        return (self._rot @ q + self.center).reshape(1, 2)

    diam = property(lambda self: 2 * max(self.a, self.b))
    area = property(lambda self: math.pi * self.a * self.b)
    inradius = property(lambda self: min(self.a, self.b))

    @property
    def perimeter(self):
        big, small = max(self.a, self.b), min(self.a, self.b)
        return float(4 * big * ellipe(1.0 - (small / big) ** 2))

    def transformed(self, angle=0.0, shift=(0.0, 0.0), scale=1.0):
        c = scale * rotation(angle) @ self.center + np.asarray(shift, dtype=float)
        return Ellipse(scale * self.a, scale * self.b, float(c[0]), float(c[1]), self.angle + angle)

    @property
    def spec(self):
        return (f"ellipse:a={self.a!r},b={self.b!r},cx={self.cx!r},cy={self.cy!r},"
                f"angle={math.degrees(self.angle)!r}")


@dataclass(frozen=True)
class PerturbedDisk(SmoothCurveDomain):
    """Radial profile r(theta) = R (1 + eps cos(k (theta - phase)))."""

    R: float = 1.0
    eps: float = 0.0
    k: int = 2
    cx: float = 0.0
    cy: float = 0.0
    phase: float = 0.0  # radians
    kind = "pdisk"

    def __post_init__(self):
        if not self.R > 0:
            raise PreconditionError("radius must be positive")
        if not (0.0 <= self.eps < 1.0):
            raise PreconditionError("perturbation amplitude must lie in [0, 1)")
        if int(self.k) != self.k or self.k < 1:
            raise PreconditionError("k must be a positive integer")

    @property
    def center(self):
        return np.array([self.cx, self.cy])

    def radius(self, th):
        return self.R * (1.0 + self.eps * np.cos(self.k * (np.asarray(th, dtype=float) - self.phase)))

    def _dr(self, th):
        return -self.R * self.eps * self.k * np.sin(self.k * (np.asarray(th, dtype=float) - self.phase))

    def _ddr(self, th):
        return -self.R * self.eps * self.k**2 * np.cos(self.k * (np.asarray(th, dtype=float) - self.phase))

    def gamma(self, th):
        th = np.asarray(th, dtype=float)
        r = self.radius(th)
        return np.stack([self.cx + r * np.cos(th), self.cy + r * np.sin(th)], axis=-1)

    def dgamma(self, th):
        th = np.asarray(th, dtype=float)
        r, dr = self.radius(th), self._dr(th)
        return np.stack([dr * np.cos(th) - r * np.sin(th), dr * np.sin(th) + r * np.cos(th)], axis=-1)

    def _refine(self, X, c, step):
        # safeguarded Newton on (gamma - x) . gamma' = 0
        lo, hi = c - step, c + step
        t = c.copy()
        dx, dy = X[:, 0] - self.cx, X[:, 1] - self.cy
        best = np.full(t.shape, np.inf)
        for _ in range(7):
            u = self.k * (t - self.phase)
            cu, su = np.cos(u), np.sin(u)
            ct, st = np.cos(t), np.sin(t)
            r = self.R * (1 + self.eps * cu)
            r1 = -self.R * self.eps * self.k * su
            r2 = -self.R * self.eps * self.k**2 * cu
            px, py = r * ct - dx, r * st - dy
            g1x, g1y = r1 * ct - r * st, r1 * st + r * ct
            g2x = r2 * ct - 2 * r1 * st - r * ct
            g2y = r2 * st + 2 * r1 * ct - r * st
            best = np.minimum(best, px * px + py * py)
            g = px * g1x + py * g1y
            gp = g1x * g1x + g1y * g1y + px * g2x + py * g2y
            gp = np.maximum(gp, 0.05 * (g1x * g1x + g1y * g1y))
            t = np.clip(t - g / gp, lo, hi)
        px = self.radius(t) * np.cos(t) - dx
        py = self.radius(t) * np.sin(t) - dy
        return np.minimum(best, px * px + py * py)

    def curvature(self, th):
        r, dr, ddr = self.radius(th), self._dr(th), self._ddr(th)
        return (r * r + 2 * dr * dr - r * ddr) / (r * r + dr * dr) ** 1.5

    def inside_mask(self, x):
        dx, dy = x[:, 0] - self.cx, x[:, 1] - self.cy
        return np.hypot(dx, dy) < self.radius(np.arctan2(dy, dx))

    @property
    def is_convex(self):
        th = np.linspace(0.0, 2 * np.pi, 8192, endpoint=False)
        return bool(self.curvature(th).min() >= 0.0)

    @property
    def area(self):
        return math.pi * self.R**2 * (1.0 + 0.5 * self.eps**2)

    def transformed(self, angle=0.0, shift=(0.0, 0.0), scale=1.0):
        c = scale * rotation(angle) @ self.center + np.asarray(shift, dtype=float)
        return PerturbedDisk(scale * self.R, self.eps, self.k, float(c[0]), float(c[1]), self.phase + angle)

    @property
    def spec(self):
        return (f"pdisk:R={self.R!r},eps={self.eps!r},k={self.k!r},cx={self.cx!r},"
                f"cy={self.cy!r},phase={math.degrees(self.phase)!r}")


# ---------------------------------------------------------------------------
# convex polygons


class PolygonDomain(Domain):
    n = 2

    @property
    def vertices(self) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    @cached_property
    def _edges(self):
        V = self.vertices
        W = np.roll(V, -1, axis=0)
        E = W - V
        L = np.linalg.norm(E, axis=1)
        N = np.stack([E[:, 1], -E[:, 0]], axis=1) / L[:, None]
        return V, W, E, L, N

    def _validate(self):
        V = self.vertices
        if V.shape[0] < 3:
            raise PreconditionError("a polygon needs at least 3 vertices")
        E = np.roll(V, -1, axis=0) - V
        cross = E[:, 0] * np.roll(E, -1, axis=0)[:, 1] - E[:, 1] * np.roll(E, -1, axis=0)[:, 0]
        if not np.all(cross > 0):
            raise PreconditionError("polygon must be strictly convex with counter-clockwise vertices")

    def signed_distance(self, x):
        V, W, E, L, N = self._edges
        best = np.full(x.shape[0], np.inf)
        inside = np.ones(x.shape[0], dtype=bool)
        for i in range(V.shape[0]):
            rel = x - V[i]
            tt = np.clip(rel @ E[i] / L[i] ** 2, 0.0, 1.0)
            d = np.linalg.norm(rel - tt[:, None] * E[i], axis=1)
            best = np.minimum(best, d)
            inside &= rel @ N[i] < 0
        return np.where(inside, -best, best)

    def max_boundary_distance(self, x):
        V = self.vertices
        return np.sqrt(((x[:, None, :] - V[None, :, :]) ** 2).sum(-1)).max(axis=1)

    def support_points(self, nu):
        nu = np.asarray(nu, dtype=float).reshape(2)
        V = self.vertices
        h = V @ nu
        top = h.max()
        scale = max(1.0, float(np.abs(V).max()))
        return V[h >= top - 1e-12 * scale]

    def offset_curve(self, t, m):
        V, W, E, L, N = self._edges
        k = V.shape[0]
        ang = np.arctan2(N[:, 1], N[:, 0])
        turn = np.mod(np.roll(ang, -1) - ang, 2 * np.pi)  # exterior angle at W[i]
        pieces = np.empty(2 * k)
        pieces[0::2] = L
        pieces[1::2] = t * turn
        cum = np.concatenate([[0.0], np.cumsum(pieces)])
        total = cum[-1]
        s = np.arange(m) * (total / m)
        if t == 0.0:
            # sample edges only, away from the corners
            s = (np.arange(m) + 0.5) * (total / m)
        idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, 2 * k - 1)
        loc = s - cum[idx]
        pts = np.empty((m, 2))
        nrm = np.empty((m, 2))
        for j in range(m):
            p = idx[j]
            i = p // 2
            if p % 2 == 0:
                nrm[j] = N[i]
                pts[j] = V[i] + (loc[j] / L[i]) * E[i] + t * N[i]
            else:
                a = ang[i] + (loc[j] / t if t > 0 else 0.0)
                nrm[j] = (math.cos(a), math.sin(a))
                pts[j] = W[i] + t * nrm[j]
        return pts, nrm, s

    @property
    def area(self):
        V = self.vertices
        x, y = V[:, 0], V[:, 1]
        return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def perimeter(self):
        return float(self._edges[3].sum())

    @property
    def diam(self):
        V = self.vertices
        return float(np.sqrt(((V[:, None, :] - V[None, :, :]) ** 2).sum(-1)).max())

    @cached_property
    def inradius(self):
        # Chebyshev centre: maximise r subject to N_i . x + r <= N_i . V_i
        V, W, E, L, N = self._edges
        A = np.hstack([N, np.ones((N.shape[0], 1))])
        b = np.einsum("ij,ij->i", N, V)
        res = linprog([0.0, 0.0, -1.0], A_ub=A, b_ub=b, bounds=[(None, None)] * 3)
        return float(res.x[2])

    @property
    def center(self):
        V = self.vertices
        x, y = V[:, 0], V[:, 1]
        cr = x * np.roll(y, -1) - np.roll(x, -1) * y
        A = 0.5 * cr.sum()
        return np.array([((x + np.roll(x, -1)) * cr).sum(), ((y + np.roll(y, -1)) * cr).sum()]) / (6 * A)


@dataclass(frozen=True)
class ConvexPolygon(PolygonDomain):
    verts: Tuple[Tuple[float, float], ...] = ()
    kind = "polygon"

    def __post_init__(self):
        V = np.asarray(self.verts, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2:
            raise PreconditionError("polygon vertices must be 2D points")
        # accept clockwise input
        x, y = V[:, 0], V[:, 1]
        if np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) < 0:
            object.__setattr__(self, "verts", tuple(map(tuple, V[::-1].tolist())))
        else:
            object.__setattr__(self, "verts", tuple(map(tuple, V.tolist())))
        self._validate()

    @cached_property
    def vertices(self):
        return np.asarray(self.verts, dtype=float)

    def transformed(self, angle=0.0, shift=(0.0, 0.0), scale=1.0):
        V = scale * self.vertices @ rotation(angle).T + np.asarray(shift, dtype=float)
        return ConvexPolygon(tuple(map(tuple, V.tolist())))

    @property
    def spec(self):
        return "polygon:v=" + ";".join(f"{x!r} {y!r}" for x, y in self.verts)


@dataclass(frozen=True)
class Rectangle(PolygonDomain):
    w: float = 1.0
    h: float = 1.0
    cx: float = 0.0
    cy: float = 0.0
    angle: float = 0.0  # radians
    kind = "rectangle"

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise PreconditionError("rectangle sides must be positive")

    @cached_property
    def vertices(self):
        hw, hh = self.w / 2, self.h / 2
        loc = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
        return loc @ rotation(self.angle).T + np.array([self.cx, self.cy])

    @property
    def center(self):
        return np.array([self.cx, self.cy])

    @property
    def area(self):
        return self.w * self.h

    @property
    def perimeter(self):
        return 2 * (self.w + self.h)

    @property
    def diam(self):
        return math.hypot(self.w, self.h)

    @property
    def inradius(self):
        return min(self.w, self.h) / 2

    def transformed(self, angle=0.0, shift=(0.0, 0.0), scale=1.0):
        c = scale * rotation(angle) @ self.center + np.asarray(shift, dtype=float)
        return Rectangle(scale * self.w, scale * self.h, float(c[0]), float(c[1]), self.angle + angle)

    @property
    def spec(self):
        tail = f"cx={self.cx!r},cy={self.cy!r},angle={math.degrees(self.angle)!r}"
        if self.w == self.h:
            return f"square:w={self.w!r},{tail}"
        return f"rect:w={self.w!r},h={self.h!r},{tail}"


def square(w: float = 1.0, cx: float = 0.0, cy: float = 0.0, angle: float = 0.0) -> Rectangle:
    return Rectangle(w, w, cx, cy, angle)


# ---------------------------------------------------------------------------
# mini-language

_KEYS = {
    "interval": ({"a", "b"}, set()),
    "disk": ({"R"}, {"cx", "cy"}),
    "ellipse": ({"a", "b"}, {"cx", "cy", "angle"}),
    "pdisk": ({"R", "eps", "k"}, {"cx", "cy", "phase"}),
    "square": ({"w"}, {"cx", "cy", "angle"}),
    "rect": ({"w", "h"}, {"cx", "cy", "angle"}),
    "polygon": ({"v"}, set()),
}
_ALIASES = {"rectangle": "rect", "perturbed_disk": "pdisk", "convex_polygon": "polygon"}


def _num(key: str, text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise SpecError(f"value of {key!r} is not a number: {text!r}") from None
    if not math.isfinite(v):
        raise SpecError(f"value of {key!r} must be finite")
    return v


def parse_domain(text: str) -> Domain:
    """Parse ``kind:key=value,...``; angles are given in degrees."""
    if not isinstance(text, str) or ":" not in text:
        raise SpecError(f"domain spec must look like kind:key=value,..., got {text!r}")
    kind, _, body = text.strip().partition(":")
    kind = _ALIASES.get(kind.strip(), kind.strip())
    if kind not in _KEYS:
        raise SpecError(f"unknown domain kind {kind!r}")
    required, optional = _KEYS[kind]
    vals = {}
    for item in filter(None, (p.strip() for p in body.split(","))):
        if "=" not in item:
            raise SpecError(f"malformed entry {item!r}")
        k, _, v = item.partition("=")
        k = k.strip()
        if k not in required | optional:
            raise SpecError(f"unknown key {k!r} for {kind}")
        if k in vals:
            raise SpecError(f"duplicate key {k!r}")
        vals[k] = v.strip()
    missing = required - vals.keys()
    if missing:
        raise SpecError(f"missing keys for {kind}: {', '.join(sorted(missing))}")

    try:
        if kind == "polygon":
            pts = []
            for pair in filter(None, (q.strip() for q in vals["v"].split(";"))):
                xy = pair.split()
                if len(xy) != 2:
                    raise SpecError(f"polygon vertex must be 'x y', got {pair!r}")
                pts.append((_num("v", xy[0]), _num("v", xy[1])))
            return ConvexPolygon(tuple(pts))
        f = {k: _num(k, v) for k, v in vals.items()}
        cx, cy = f.get("cx", 0.0), f.get("cy", 0.0)
        if kind == "interval":
            return Interval(f["a"], f["b"])
        if kind == "disk":
            return Disk(cx, cy, f["R"])
        if kind == "ellipse":
            return Ellipse(f["a"], f["b"], cx, cy, math.radians(f.get("angle", 0.0)))
        if kind == "pdisk":
            if f["k"] != int(f["k"]):
                raise SpecError("k must be an integer")
            return PerturbedDisk(f["R"], f["eps"], int(f["k"]), cx, cy, math.radians(f.get("phase", 0.0)))
        if kind == "square":
            return Rectangle(f["w"], f["w"], cx, cy, math.radians(f.get("angle", 0.0)))
        return Rectangle(f["w"], f["h"], cx, cy, math.radians(f.get("angle", 0.0)))
    except PreconditionError as exc:
        raise SpecError(str(exc)) from None


def require_2d(d: Domain, what: str) -> None:
    if d.n != 2:
        raise PreconditionError(f"{what} is only defined for planar domains")


def no_interior_sphere(d: Domain) -> GeometryError:
    return GeometryError(f"no interior sphere condition for {d.kind} (corners)")
