"""Distance queries, parallel surfaces, reach, tube and curvature measures,
reflections, symmetric differences and the deficit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from ..errors import GeometryError, PreconditionError
from .domains import (
    Disk,
    Domain,
    Ellipse,
    Interval,
    PerturbedDisk,
    PolygonDomain,
    as_points,
    golden_max,
    no_interior_sphere,
    require_2d,
)

TOL_GEOM = 1e-9  # relative to diam
MEASURE_RTOL = 5e-3


def tol_geom(d: Domain) -> float:
    return TOL_GEOM * d.diam


def direction(v) -> np.ndarray:
    """Normalize a vector to a unit direction."""
    w = np.atleast_1d(np.asarray(v, dtype=float)).reshape(-1)
    nrm = float(np.linalg.norm(w))
    if not nrm > 0 or not math.isfinite(nrm):
        raise PreconditionError("direction must be a nonzero finite vector")
    return w / nrm


def distance_to_set(d: Domain, x):
    pts, single = as_points(x, d.n)
    v = np.maximum(d.signed_distance(pts), 0.0)
    return float(v[0]) if single else v


def distance_to_boundary(d: Domain, x):
    pts, single = as_points(x, d.n)
    v = np.abs(d.signed_distance(pts))
    return float(v[0]) if single else v


def reflect(x, omega, lam: float) -> np.ndarray:
    """Reflection across the hyperplane {y . omega = lam}."""
    w = direction(omega)
    a = np.asarray(x, dtype=float)
    pts = a.reshape(-1, w.size)
    out = pts + 2.0 * (lam - pts @ w)[:, None] * w[None, :]
    return out.reshape(a.shape)


def sd_gradient(d: Domain, x: np.ndarray, step: float | None = None) -> np.ndarray:
    """Central-difference gradient of the signed distance (unit normal off the medial axis)."""
    step = step or 1e-6 * d.diam
    g = np.empty_like(x)
    for i in range(d.n):
        e = np.zeros(d.n)
        e[i] = step
        g[:, i] = (d.signed_distance(x + e) - d.signed_distance(x - e)) / (2 * step)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# parallel surfaces and reach


@dataclass(frozen=True)
class ParallelSurface:
    t: float
    points: np.ndarray
    normals: np.ndarray
    arclength: np.ndarray
    spacing: float


def parallel_surface(d: Domain, t: float, m: int = 128) -> ParallelSurface:
    if not t > 0:
        raise PreconditionError("offset t must be positive")
    if m < 16:
        raise PreconditionError(f"m too small: need at least 16 samples, got {m}")
    pts, nrm, s = d.offset_curve(t, m)
    if d.n == 1:
        return ParallelSurface(t, pts, nrm, s, float(pts[1, 0] - pts[0, 0]))
    gaps = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
    err = np.abs(d.signed_distance(pts) - t).max()
    if err > max(1e3 * tol_geom(d), 1e-9 * t):
        raise GeometryError(f"offset t={t} is not below the reach (distance defect {err:.3g})")
    return ParallelSurface(t, pts, nrm, s, float(gaps.max()))


def estimate_reach(d: Domain, r_test: float, m: int = 256, k: int = 12) -> bool:
    """Sampled reach test along outward normal rays.

    For every sampled boundary point b with normal v and tau < r_test the point
    b + tau v must keep b as its projection, i.e. dist(b + tau v) = tau.
    """
    if not r_test > 0:
        raise PreconditionError("r_test must be positive")
    if d.is_convex:
        return True
    b, nu = d.boundary_samples(m)
    taus = r_test * np.arange(1, k + 1) / k * (1.0 - 1e-9)
    z = (b[:, None, :] + taus[None, :, None] * nu[:, None, :]).reshape(-1, d.n)
    defect = np.abs(d.signed_distance(z) - np.tile(taus, b.shape[0]))
    return bool(defect.max() <= 10 * tol_geom(d))


@lru_cache(maxsize=64)
def certified_reach(d: Domain, m: int = 512) -> float:
    """Largest r (bisection) for which estimate_reach passes; inf for convex sets."""
    if d.is_convex:
        return math.inf
    lo, hi = 0.0, d.diam
    if estimate_reach(d, hi, m):
        return hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if estimate_reach(d, mid, m):
            lo = mid
        else:
            hi = mid
    if lo <= 0:
        raise GeometryError("could not certify a positive reach")
    return lo


def capped_reach(d: Domain, cap: float = 10.0) -> Tuple[float, bool]:
    r = certified_reach(d)
    if math.isinf(r):
        return cap * d.diam, True
    return r, False


@dataclass(frozen=True)
class FedererReport:
    r: float
    max_violation: float
    pairs: int

    @property
    def ok(self) -> bool:
        return self.max_violation <= 0.0


def interior_samples(d: Domain, count: int) -> np.ndarray:
    lo, hi = d.bbox()
    per = max(4, int(math.ceil(count ** (1.0 / d.n) * 1.5)))
    axes = [np.linspace(lo[i], hi[i], per + 2)[1:-1] for i in range(d.n)]
    P = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    P = P[d.signed_distance(P) < 0]
    if P.shape[0] > count:
        P = P[np.linspace(0, P.shape[0] - 1, count).astype(int)]
    return P


def federer_check(d: Domain, r: float, m: int = 200) -> FedererReport:
    """max over sampled pairs of v.(y-x) - |y-x|^2/(2r); nonpositive means no violation."""
    if not r > 0:
        raise PreconditionError("r must be positive")
    if not estimate_reach(d, r):
        raise PreconditionError(f"reach is not certified at r={r}")
    b, nu = d.boundary_samples(m)
    Y = np.vstack([interior_samples(d, m), b])
    diff = Y[None, :, :] - b[:, None, :]
    lhs = np.einsum("ijk,ik->ij", diff, nu)
    rhs = (diff**2).sum(-1) / (2 * r) if math.isfinite(r) else 0.0
    return FedererReport(float(r), float((lhs - rhs).max()), int(lhs.size))


def interior_sphere_radius(d: Domain) -> float:
    if isinstance(d, Interval):
        return d.inradius
    if isinstance(d, Disk):
        return d.R
    if isinstance(d, Ellipse):
        return min(d.a, d.b) ** 2 / max(d.a, d.b)
    if isinstance(d, PerturbedDisk):
        th = np.linspace(0.0, 2 * np.pi, 8192, endpoint=False)
        kap = d.curvature(th)
        c = np.array([th[np.argmax(kap)]])
        step = th[1] - th[0]
        tt = golden_max(d.curvature, c - step, c + step, iters=60)
        kmax = max(float(d.curvature(tt)[0]), float(kap.max()))
        return min(1.0 / kmax, d.inradius)
    if isinstance(d, PolygonDomain):
        raise no_interior_sphere(d)
    raise GeometryError(f"interior sphere radius not available for {d.kind}")


# ---------------------------------------------------------------------------
# grid measures


@lru_cache(maxsize=24)
def _sd_grid(d: Domain, cells: int, pad_frac: float):
    lo, hi = d.bbox()
    pad = pad_frac * d.diam
    lo, hi = lo - pad, hi + pad
    h = float((hi - lo).max()) / cells
    counts = np.ceil((hi - lo) / h).astype(int)
    axes = [lo[i] + (np.arange(counts[i]) + 0.5) * h for i in range(d.n)]
    P = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    sd = d.signed_distance(P)
    P.setflags(write=False)
    sd.setflags(write=False)
    return h, P, sd


def _cover(sd: np.ndarray, h: float) -> np.ndarray:
    """Fraction of a cell lying in {sd < 0}, from the centre value."""
    return np.clip(0.5 - sd / h, 0.0, 1.0)


GRID_LEVELS = (320, 640)
PAD = 0.2


def measure_with_error(d: Domain, quantity, levels=GRID_LEVELS) -> Tuple[float, float]:
    """Evaluate ``quantity(h, P, sd)`` on two nested grids: (fine value, |fine - coarse|)."""
    vals = [quantity(*_sd_grid(d, c, PAD)) for c in levels]
    return float(vals[-1]), float(abs(vals[-1] - vals[-2]))


def half_tube_measure(d: Domain, gamma: float, with_error: bool = False):
    """|{x in Omega : dist(x, boundary) <= gamma}|."""
    if not gamma > 0:
        raise PreconditionError("gamma must be positive")
    if isinstance(d, Interval):
        v = min(2 * gamma, d.b - d.a)
        return (v, 0.0) if with_error else v
    if gamma >= d.inradius:
        return (d.area, 0.0) if with_error else d.area

    def q(h, P, sd):
        return d.area - h * h * _cover(sd + gamma, h).sum()

    v, err = measure_with_error(d, q)
    v = max(v, 0.0)
    return (v, err) if with_error else v


@dataclass(frozen=True)
class SteinerFit:
    phi: float
    r0: float
    residual: float
    error: float


def steiner_fit(d: Domain, rtol: float = 1e-2) -> SteinerFit:
    require_2d(d, "curvature measure")
    reach = certified_reach(d)
    r0 = min(0.05 * d.diam, reach / 4)
    radii = np.array([r0, 2 * r0, 3 * r0])

    def grow(r):
        def q(h, P, sd):
            return h * h * _cover(sd - r, h).sum()
        return measure_with_error(d, q)

    meas = [grow(r) for r in radii]
    A = np.array([m[0] for m in meas])
    y = A - d.area - math.pi * radii**2
    phi = float((y @ radii) / (2 * radii @ radii))
    resid = float(np.abs(y - 2 * phi * radii).max() / (2 * phi * radii.min()))
    err = float(max(m[1] for m in meas) / (2 * r0))
    if not phi > 0 or resid > rtol:
        raise GeometryError(f"Steiner fit failed (relative residual {resid:.3g})")
    return SteinerFit(phi, float(r0), resid, err)


def curvature_measure(d: Domain) -> float:
    """Phi_1 from a Steiner polynomial fit of the outer parallel body area."""
    return steiner_fit(d).phi


def symmetric_difference_measure(d: Domain, omega, lam: float, with_error: bool = False):
    w = direction(omega)
    if isinstance(d, Interval):
        c = 2 * lam * w[0]  # reflection x -> c - x
        a2, b2 = c - d.b, c - d.a
        inter = max(0.0, min(d.b, b2) - max(d.a, a2))
        v = 2 * (d.area - inter)
        return (v, 0.0) if with_error else v

    def q(h, P, sd):
        keep = sd < 0.5 * h
        Pk = P[keep]
        c1 = _cover(sd[keep], h)
        c2 = _cover(d.signed_distance(reflect(Pk, w, lam)), h)
        return 2 * (d.area - h * h * np.minimum(c1, c2).sum())

    v, err = measure_with_error(d, q)
    v = max(v, 0.0)
    return (v, err) if with_error else v


# ---------------------------------------------------------------------------
# deficit


def _deficit_objective(d: Domain, X: np.ndarray) -> np.ndarray:
    sd = d.signed_distance(X)
    val = d.max_boundary_distance(X) + sd
    return np.where(sd < 0, val, np.inf)


def deficit_center(d: Domain, rel_step: float = 1e-5) -> Tuple[float, np.ndarray]:
    """Minimize R(x) - r(x) over x in Omega: coarse grid then pattern search."""
    lo, hi = d.bbox()
    axes = [np.linspace(lo[i], hi[i], 19)[1:-1] for i in range(d.n)]
    P = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    P = np.vstack([P, d.center.reshape(1, -1)])
    f = _deficit_objective(d, P)
    order = np.argsort(f)[:3]
    if d.n == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        s2 = 1 / math.sqrt(2)
        dirs = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [s2, s2], [-s2, -s2], [s2, -s2], [-s2, s2]])
    best_val, best_x = math.inf, None
    for k in order:
        x, fx = P[k].copy(), float(f[k])
        step = d.diam / 16
        while step > rel_step * d.diam:
            cand = x + step * dirs
            fc = _deficit_objective(d, cand)
            j = int(np.argmin(fc))
            if fc[j] < fx:
                x, fx = cand[j], float(fc[j])
            else:
                step *= 0.5
        if fx < best_val:
            best_val, best_x = fx, x
    return max(best_val, 0.0), best_x


def deficit(d: Domain) -> float:
    """rho(Omega) = inf over centres of circumradius minus inradius."""
    return deficit_center(d)[0]
