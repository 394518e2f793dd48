"""Moving-plane machinery on the outer parallel set G = {dist(., Omega) < t}.

Reflections across hyperplanes orthogonal to omega preserve every line
parallel to omega, so the containment conditions defining the critical
values split into one-dimensional conditions on the chords G cap l. On each
chord family the conditions are decided exactly from the interval endpoints.
The closed-set condition also sees the extreme faces of the closure of G in
the directions orthogonal to omega, which contribute their largest
omega-coordinate to the closed critical value.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .constants import FracParams, kernel_constant
from .errors import PreconditionError
from .fracsolver import Field
from .geometry.domains import Domain, golden_max
from .geometry.measures import (
    capped_reach,
    certified_reach,
    direction,
    interior_samples,
    reflect,
    sd_gradient,
    symmetric_difference_measure,
)
from .neumann import neumann_trace

TOL_MP = 1e-4  # relative to diam
N_LINES = 400
ANGLE_TOL = 0.02


def default_tol(d: Domain) -> float:
    return TOL_MP * d.diam


def _check_t(d: Domain, t: float) -> None:
    if not t > 0:
        raise PreconditionError("offset t must be positive")
    r = certified_reach(d)
    if t >= r:
        raise PreconditionError(f"t={t} is not below the certified reach {r:.6g}")


def perp(w: np.ndarray) -> np.ndarray:
    return np.array([-w[1], w[0]])


# ---------------------------------------------------------------------------
# chords


def _bisect(d: Domain, t: float, base, dirv, a, b, iters: int = 48):
    """Roots of sd(base + s dirv) - t between a (inside G) and b (outside)."""
    for _ in range(iters):
        m = 0.5 * (a + b)
        inside = d.signed_distance(base + m[:, None] * dirv) < t
        a = np.where(inside, m, a)
        b = np.where(inside, b, m)
    return 0.5 * (a + b)


def chords(d: Domain, t: float, bases: np.ndarray, dirv: np.ndarray, lo: float, hi: float,
           samples: int = 256) -> List[np.ndarray]:
    """Intervals of {s : dist(base + s dirv, Omega) < t} for every base point."""
    L = bases.shape[0]
    if d.is_convex:
        # sd is convex along a line: locate the minimum, then the two crossings
        def neg(s):
            return -d.signed_distance(bases + s[:, None] * dirv)

        smin = golden_max(neg, np.full(L, lo), np.full(L, hi), iters=56)
        hit = d.signed_distance(bases + smin[:, None] * dirv) < t
        out = [np.empty((0, 2)) for _ in range(L)]
        idx = np.flatnonzero(hit)
        if idx.size:
            B = bases[idx]
            left = _bisect(d, t, B, dirv, smin[idx], np.full(idx.size, lo))
            right = _bisect(d, t, B, dirv, smin[idx], np.full(idx.size, hi))
            for k, i in enumerate(idx):
                out[i] = np.array([[left[k], right[k]]])
        return out

    s = np.linspace(lo, hi, samples)
    Z = bases[:, None, :] + s[None, :, None] * dirv
    inside = (d.signed_distance(Z.reshape(-1, 2)) < t).reshape(L, samples)
    flips = np.argwhere(inside[:, 1:] != inside[:, :-1])
    rows, cols = flips[:, 0], flips[:, 1]
    a = np.where(inside[rows, cols], s[cols], s[cols + 1])
    b = np.where(inside[rows, cols], s[cols + 1], s[cols])
    roots = _bisect(d, t, bases[rows], dirv, a, b) if rows.size else np.empty(0)
    out = []
    for i in range(L):
        r = np.sort(roots[rows == i])
        out.append(r.reshape(-1, 2) if r.size % 2 == 0 else np.empty((0, 2)))
    return out


def _contained(alpha, beta, iv, closed_left, closed_right) -> bool:
    """Is the interval with ends alpha <= beta inside the union of open intervals iv?"""
    for a, b in iv:
        okl = a < alpha if closed_left else a <= alpha
        okr = beta < b if closed_right else beta <= b
        if okl and okr:
            return True
    return False


def _violates(iv: np.ndarray, mu: float, closed: bool) -> Optional[float]:
    """Return a point of the chord below mu witnessing a violation, or None."""
    for a, b in iv:
        if b <= mu:
            continue
        if a < mu:
            # (mu, b) or (mu, b] reflects to (2mu - b, mu) or [2mu - b, mu)
            alpha, beta = 2 * mu - b, mu
            if not _contained(alpha, beta, iv, closed, False):
                return alpha
        else:
            alpha, beta = 2 * mu - b, 2 * mu - a
            if not _contained(alpha, beta, iv, closed, closed):
                return alpha
    return None


def line_critical(iv: np.ndarray, closed: bool) -> Tuple[float, Optional[float]]:
    """Supremum of the violating mu on one line and the touching coordinate there."""
    if iv.shape[0] == 0:
        return -math.inf, None
    ends = iv.ravel()
    cand = np.unique(np.concatenate([ends, 0.5 * (ends[:, None] + ends[None, :]).ravel()]))[::-1]
    for k, c in enumerate(cand):
        if _violates(iv, float(c), closed) is not None:
            return float(c), _touch(iv, float(c))
        if k + 1 < len(cand):
            mid = 0.5 * (c + cand[k + 1])
            if _violates(iv, float(mid), closed) is not None:
                return float(c), _touch(iv, float(c))
    return -math.inf, None


def _touch(iv: np.ndarray, mu: float) -> Optional[float]:
    """Chord endpoint below mu met by a reflected endpoint at mu."""
    best = None
    for e in iv.ravel():
        if e < mu - 1e-12 * max(1.0, abs(mu)):
            r = 2 * mu - e
            if np.any(np.isclose(iv.ravel(), r, rtol=0, atol=1e-9 * max(1.0, abs(r)))):
                best = e if best is None else min(best, e)
    return best


@dataclass
class Scan:
    omega: np.ndarray
    t: float
    p: np.ndarray
    intervals: List[np.ndarray]
    p_range: Tuple[float, float]
    q_range: Tuple[float, float]


def scan(d: Domain, t: float, omega, n_lines: int = N_LINES) -> Scan:
    w = direction(omega)
    if d.n == 1:
        iv = np.array([[w[0] * (d.a - t), w[0] * (d.b + t)]])
        iv.sort(axis=1)
        return Scan(w, t, np.zeros(1), [iv], (0.0, 0.0), (float(iv[0, 0]), float(iv[0, 1])))
    v = perp(w)
    p_hi = d.support(v) + t
    p_lo = -d.support(-v) - t
    pad = 0.01 * d.diam
    q_lo, q_hi = -d.support(-w) - t - pad, d.support(w) + t + pad
    p = p_lo + (p_hi - p_lo) * (np.arange(n_lines) + 0.5) / n_lines
    ivs = chords(d, t, p[:, None] * v, w, q_lo, q_hi)
    return Scan(w, t, p, ivs, (p_lo, p_hi), (q_lo, q_hi))


def _sups(d: Domain, sc: Scan, modes=(True, False), zoom: int = 2) -> Dict[bool, Tuple[float, float]]:
    """Max of the per-line critical values for each mode (closed/open), refined by
    batched zooms around the best lines; one chord evaluation per zoom stage."""
    best = {}
    for closed in modes:
        vals = np.array([line_critical(iv, closed)[0] for iv in sc.intervals])
        k = int(np.argmax(vals))
        best[closed] = (float(vals[k]), float(sc.p[k]))
    if d.n == 1:
        return best
    v = perp(sc.omega)
    half = sc.p[1] - sc.p[0]
    for _ in range(zoom):
        live = [c for c in modes if math.isfinite(best[c][0])]
        if not live:
            break
        grids = []
        for c in live:
            lo = max(sc.p_range[0], best[c][1] - half)
            hi = min(sc.p_range[1], best[c][1] + half)
            grids.append(np.linspace(lo, hi, 65)[1:-1])
        ps = np.concatenate(grids)
        ivs = chords(d, sc.t, ps[:, None] * v, sc.omega, *sc.q_range)
        for c in live:
            vs = np.array([line_critical(iv, c)[0] for iv in ivs])
            j = int(np.argmax(vs))
            if vs[j] > best[c][0]:
                best[c] = (float(vs[j]), float(ps[j]))
        half = 2 * half / 64
    return best


def face_value(d: Domain, t: float, omega) -> float:
    """Largest omega-coordinate on the extreme faces of the closure of G orthogonal to omega."""
    w = direction(omega)
    if d.n == 1:
        return -math.inf
    v = perp(w)
    vals = []
    for nu in (v, -v):
        pts = d.support_points(nu) + t * nu
        vals.append(float((pts @ w).max()))
    return max(vals)


def critical_value(d: Domain, t: float, omega, tol_mp: Optional[float] = None,
                   n_lines: int = N_LINES) -> float:
    """lambda_star for the closed reflected set."""
    _check_t(d, t)
    sc = scan(d, t, omega, n_lines)
    lam = _sups(d, sc, (True,))[True][0]
    return max(lam, face_value(d, t, sc.omega))


def classical_critical_value(d: Domain, t: float, omega, tol_mp: Optional[float] = None,
                             n_lines: int = N_LINES) -> float:
    """lambda_hat for the open reflected cap."""
    _check_t(d, t)
    sc = scan(d, t, omega, n_lines)
    return _sups(d, sc, (False,))[False][0]


def critical_pair(d: Domain, t: float, omega, n_lines: int = N_LINES) -> Tuple[float, float]:
    """(lambda_star, lambda_hat) from a single chord scan."""
    _check_t(d, t)
    sc = scan(d, t, omega, n_lines)
    sup = _sups(d, sc)
    return max(sup[True][0], face_value(d, t, sc.omega)), sup[False][0]


# ---------------------------------------------------------------------------
# classification, inclusion, one-direction estimate


@dataclass(frozen=True)
class Touching:
    case: str  # InteriorTouching | NonTransversal | Both | Undetermined
    interior_point: Optional[Tuple[float, ...]] = None
    plane_point: Optional[Tuple[float, ...]] = None


def classify_touching(d: Domain, t: float, omega, lam_star: float,
                      tol_touch: Optional[float] = None, n_lines: int = N_LINES,
                      sc: Optional[Scan] = None) -> Touching:
    w = direction(omega)
    tol_touch = tol_touch or 3 * default_tol(d)
    sc = sc if sc is not None else scan(d, t, w, n_lines)
    interior = None
    if d.n == 1:
        a, b = sc.intervals[0][0]
        if abs(0.5 * (a + b) - lam_star) <= tol_touch:
            interior = (float(a * w[0]),)
        return Touching("InteriorTouching" if interior else "Undetermined", interior, None)

    v = perp(w)
    span = sc.p_range[1] - sc.p_range[0]
    for p, iv in zip(sc.p, sc.intervals):
        if min(p - sc.p_range[0], sc.p_range[1] - p) < 0.02 * span:
            continue
        val, q = line_critical(iv, closed=True)
        if q is not None and val >= lam_star - tol_touch and q < lam_star - tol_touch:
            interior = tuple(float(c) for c in p * v + q * w)
            break

    plane = None
    base = lam_star * w
    cr = chords(d, t, base[None, :], v, sc.p_range[0] - 0.01 * d.diam, sc.p_range[1] + 0.01 * d.diam)[0]
    if cr.size:
        pts = base + cr.ravel()[:, None] * v
        nrm = sd_gradient(d, pts)
        tang = np.abs(nrm @ w) <= math.sin(ANGLE_TOL)
        if tang.any():
            plane = tuple(float(c) for c in pts[np.argmax(tang)])

    if interior and plane:
        return Touching("Both", interior, plane)
    if interior:
        return Touching("InteriorTouching", interior, None)
    if plane:
        return Touching("NonTransversal", None, plane)
    return Touching("Undetermined")


@dataclass(frozen=True)
class InclusionReport:
    samples: int
    violating_fraction: float
    max_depth: float

    @property
    def ok(self) -> bool:
        return self.violating_fraction == 0.0


def check_inclusion(d: Domain, t: float, omega, lam_star: float, count: int = 40000,
                    tol: Optional[float] = None) -> InclusionReport:
    """Reflect grid samples of Omega on the cap side of T_star and test membership in Omega."""
    _check_t(d, t)
    w = direction(omega)
    tol = 1e-9 * d.diam if tol is None else tol
    P = interior_samples(d, count)
    cap = P[P @ w > lam_star]
    if cap.shape[0] == 0:
        return InclusionReport(0, 0.0, 0.0)
    depth = d.signed_distance(reflect(cap, w, lam_star))
    bad = depth > tol
    return InclusionReport(int(cap.shape[0]), float(bad.mean()), float(max(depth.max(), 0.0)))


def onedir_rhs_factor(d: Domain, p: FracParams) -> float:
    r, _ = capped_reach(d)
    n, s = p.n, p.s
    return (d.diam + r) ** (n + 2 * s + 2) / (kernel_constant(p) * (n + 2 * s))


def quantitative_onedir(u: Field, d: Domain, p: FracParams, omega, lam_star: float, t: float,
                        m: int = 128, seminorm: Optional[float] = None) -> Tuple[float, float]:
    """Both sides of the one-direction estimate:
    lhs = int over Omega minus Omega^star of dist(x, T_star) u, rhs = K [N_s u]."""
    w = direction(omega)
    X = u.grid.nodes
    outside = d.signed_distance(reflect(X, w, lam_star)) >= 0
    lhs = u.h**d.n * float(np.sum(np.abs(X[outside] @ w - lam_star) * u.values[outside]))
    if seminorm is None:
        seminorm = neumann_trace(u, d, p, t, m).seminorm
    return lhs, onedir_rhs_factor(d, p) * seminorm


def onedir_grid_tolerance(u: Field) -> float:
    """lhs mass attributable to one boundary layer of cells."""
    d = u.grid.domain
    return d.perimeter * u.h * d.diam * float(u.values.max()) if d.n == 2 else u.h * d.diam * float(u.values.max())


# ---------------------------------------------------------------------------
# per-direction summary


@dataclass
class MovingPlaneResult:
    omega: Tuple[float, ...]
    t: float
    lam_star: float
    lam_hat: float
    case: str
    case_point: Optional[Tuple[float, ...]]
    sym_diff: float
    inclusion_ok: bool
    inclusion_depth: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "MovingPlaneResult":
        obj = dict(obj)
        obj["omega"] = tuple(obj["omega"])
        if obj.get("case_point") is not None:
            obj["case_point"] = tuple(obj["case_point"])
        return cls(**obj)


def analyze_direction(d: Domain, t: float, omega, n_lines: int = N_LINES) -> MovingPlaneResult:
    _check_t(d, t)
    w = direction(omega)
    sc = scan(d, t, w, n_lines)
    sup = _sups(d, sc)
    lam = max(sup[True][0], face_value(d, t, w))
    lam_hat = sup[False][0]
    tc = classify_touching(d, t, w, lam, sc=sc)
    inc = check_inclusion(d, t, w, lam)
    point = tc.interior_point or tc.plane_point
    return MovingPlaneResult(
        tuple(float(c) for c in w), float(t), float(lam), float(lam_hat), tc.case, point,
        float(symmetric_difference_measure(d, w, lam)), inc.ok, inc.max_depth,
    )


def direction_fan(k: int = 16) -> np.ndarray:
    a = 2 * np.pi * np.arange(k) / k
    return np.stack([np.cos(a), np.sin(a)], axis=1)
