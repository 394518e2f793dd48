"""Collocation discretization of the fractional Laplacian on a uniform grid
with zero exterior data, torsion and semilinear solves, energy and pointwise
lower-bound checks.

The operator at node x_i is

    c_{n,s} [ sum_{j != i} h^n (u_i - u_j) / |x_i - x_j|^{n+2s} + u_i T ]

with midpoint weights on every lattice cell. Summing the kernel over the whole
punctured lattice gives the constant diagonal h^{-2s} Z_n(s), where Z_n is an
Epstein zeta value; the cells outside Omega contribute only to the diagonal
since u vanishes there. The singular cell is treated by a second-order Taylor
expansion, which adds a discrete Laplacian term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.fft import irfftn, next_fast_len, rfftn
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse.linalg import LinearOperator, cg
from scipy.special import zeta

from .constants import FracParams, ball_constant, kernel_constant
from .errors import ConvergenceError, PreconditionError, SpecError
from .geometry.domains import Domain, as_points

DENSE_LIMIT = 6000


def lattice_zeta(n: int, s: float) -> float:
    """Z_n(s) = sum over nonzero k in Z^n of |k|^{-n-2s}."""
    if n == 1:
        return 2.0 * float(zeta(1 + 2 * s))
    z = 1.0 + s
    beta = 4.0**-z * (float(zeta(z, 0.25)) - float(zeta(z, 0.75)))
    return 4.0 * float(zeta(z)) * beta


def sphere_area(n: int) -> float:
    """Measure of the unit sphere S^{n-1} (2 points for n = 1)."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def taylor_weight(n: int, s: float) -> float:
    """Singular-cell coefficient in lattice units (multiply by h^{-2s})."""
    return sphere_area(n) * 0.5 ** (2 - 2 * s) / ((2 - 2 * s) * 2 * n)


# ---------------------------------------------------------------------------
# grids and fields


@dataclass(eq=False)
class Grid:
    domain: Domain
    h: float
    anchor: np.ndarray
    lo: np.ndarray  # lattice index of the first box cell per axis
    mask: np.ndarray  # interior nodes within the index box
    index: np.ndarray  # (N, n) absolute lattice indices, lexicographic
    nodes: np.ndarray  # (N, n) coordinates
    _ops: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def node_count(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def shape(self):
        return self.mask.shape

    @property
    def bbox(self):
        lo = self.anchor + self.lo * self.h
        return lo, lo + (np.array(self.mask.shape) - 1) * self.h


def build_grid(d: Domain, h: float, strict: bool = True) -> Grid:
    """Lattice anchor + h Z^n restricted to Omega, anchored at the domain centre.

    With ``strict`` the spacing must not exceed a quarter of the inradius.
    """
    if not h > 0:
        raise PreconditionError("grid spacing must be positive")
    if strict and h > d.inradius / 4 * (1 + 1e-12):
        raise PreconditionError(f"h={h} exceeds inradius/4 = {d.inradius / 4}")
    anchor = np.asarray(d.center, dtype=float).reshape(d.n)
    blo, bhi = d.bbox()
    lo = np.floor((blo - anchor) / h).astype(int) - 1
    hi = np.ceil((bhi - anchor) / h).astype(int) + 1
    axes = [anchor[i] + np.arange(lo[i], hi[i] + 1) * h for i in range(d.n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    P = np.stack([m.ravel() for m in mesh], axis=1)
    mask = (d.signed_distance(P) < 0).reshape(mesh[0].shape)
    idx = np.argwhere(mask)
    if idx.shape[0] < 8:
        raise PreconditionError(f"h too coarse: only {idx.shape[0]} interior nodes")
    nodes = anchor + (idx + lo) * h
    return Grid(d, float(h), anchor, lo, mask, idx + lo, nodes)


@dataclass
class Field:
    grid: Grid
    values: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.shape[0] != self.grid.node_count:
            raise PreconditionError("field size does not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise PreconditionError("field values must be finite")

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(grid, fn(grid.nodes))

    @property
    def h(self) -> float:
        return self.grid.h

    def box_values(self) -> np.ndarray:
        out = np.zeros(self.grid.shape)
        out[self.grid.mask] = self.values
        return out


# ---------------------------------------------------------------------------
# operators


class _OperatorBase:
    h: float
    s: float
    n: int
    c_ns: float
    diag: float
    alpha: float
    truncation_radius = math.inf

    def matvec(self, u: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def solve(self, b: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError


@dataclass(eq=False)
class OperatorMatrix(_OperatorBase):
    """Dense symmetric M-matrix of the discrete fractional Laplacian."""

    matrix: np.ndarray
    h: float
    s: float
    n: int
    c_ns: float
    diag: float
    alpha: float
    _chol: Optional[tuple] = field(default=None, repr=False)

    def matvec(self, u):
        return self.matrix @ u

    def factor(self):
        if self._chol is None:
            try:
                self._chol = cho_factor(self.matrix, lower=True, check_finite=False)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError(f"Cholesky factorization failed: {exc}") from None
        return self._chol

    def solve(self, b):
        return cho_solve(self.factor(), b, check_finite=False)


def _neighbour_pairs(index: np.ndarray, mask: np.ndarray, lo: np.ndarray):
    """Index pairs (i, j) of lattice nearest neighbours that are both nodes."""
    pos = -np.ones(mask.shape, dtype=int)
    pos[mask] = np.arange(index.shape[0])
    rel = index - lo
    pairs = []
    for ax in range(index.shape[1]):
        shifted = rel.copy()
        shifted[:, ax] += 1
        ok = shifted[:, ax] < mask.shape[ax]
        j = np.full(index.shape[0], -1)
        j[ok] = pos[tuple(shifted[ok].T)]
        keep = j >= 0
        pairs.append(np.stack([np.flatnonzero(keep), j[keep]], axis=1))
    return np.vstack(pairs)


def assemble_operator(d: Domain, g: Grid, p: FracParams) -> OperatorMatrix:
    """Dense assembly (N^2 memory)."""
    if p.n != d.n or g.domain is not d and g.domain != d:
        raise PreconditionError("grid, domain and parameters must agree")
    key = ("dense", p)
    if key in g._ops:
        return g._ops[key]
    n, s, h = p.n, p.s, g.h
    c = kernel_constant(p)
    K = g.index.astype(float)
    r2 = np.zeros((K.shape[0], K.shape[0]))
    for ax in range(n):
        diff = K[:, ax][:, None] - K[:, ax][None, :]
        r2 += diff * diff
    np.fill_diagonal(r2, 1.0)
    A = -(r2 ** (-(n + 2 * s) / 2))
    a = taylor_weight(n, s)
    Z = lattice_zeta(n, s)
    pairs = _neighbour_pairs(g.index, g.mask, g.lo)
    A[pairs[:, 0], pairs[:, 1]] -= a
    A[pairs[:, 1], pairs[:, 0]] -= a
    np.fill_diagonal(A, Z + 2 * n * a)
    scale = c * h ** (-2 * s)
    A *= scale
    op = OperatorMatrix(A, h, s, n, c, scale * (Z + 2 * n * a), scale * a)
    g._ops[key] = op
    return op


@dataclass(eq=False)
class FFTOperator(_OperatorBase):
    """Matrix-free version of the same operator: the off-diagonal kernel sum is a
    lattice convolution evaluated by FFT; solves use conjugate gradients."""

    grid: Grid
    h: float
    s: float
    n: int
    c_ns: float
    diag: float
    alpha: float
    rtol: float = 1e-11

    def __post_init__(self):
        shape = self.grid.shape
        ext = tuple(next_fast_len(2 * m) for m in shape)
        offs = [np.minimum(np.arange(e), e - np.arange(e)).astype(float) for e in ext]
        mesh = np.meshgrid(*offs, indexing="ij")
        r2 = sum(m * m for m in mesh)
        r2.flat[0] = 1.0
        ker = r2 ** (-(self.n + 2 * self.s) / 2)
        ker.flat[0] = 0.0
        self._ext = ext
        self._khat = rfftn(ker)
        self._scale = self.c_ns * self.h ** (-2 * self.s)
        self.iterations = []

    def _box(self, u):
        b = np.zeros(self.grid.shape)
        b[self.grid.mask] = u
        return b

    def matvec(self, u):
        box = self._box(u)
        conv = irfftn(rfftn(box, self._ext) * self._khat, self._ext)
        conv = conv[tuple(slice(0, m) for m in self.grid.shape)]
        nb = np.zeros_like(box)
        for ax in range(self.n):
            nb += np.roll(box, 1, axis=ax) + np.roll(box, -1, axis=ax)
        out = self.diag * u - self._scale * conv[self.grid.mask] - self.alpha * nb[self.grid.mask]
        return out

    def solve(self, b):
        N = self.grid.node_count
        op = LinearOperator((N, N), matvec=self.matvec, dtype=float)
        count = [0]

        def cb(_):
            count[0] += 1

        x, info = cg(op, b, rtol=self.rtol, atol=0.0, maxiter=5000, callback=cb)
        if info != 0:
            raise ConvergenceError(f"conjugate gradients did not converge (info={info})")
        self.iterations.append(count[0])
        return x


def fft_operator(d: Domain, g: Grid, p: FracParams) -> FFTOperator:
    key = ("fft", p)
    if key in g._ops:
        return g._ops[key]
    c = kernel_constant(p)
    a = taylor_weight(p.n, p.s)
    Z = lattice_zeta(p.n, p.s)
    scale = c * g.h ** (-2 * p.s)
    op = FFTOperator(g, g.h, p.s, p.n, c, scale * (Z + 2 * p.n * a), scale * a)
    g._ops[key] = op
    return op


def get_operator(d: Domain, g: Grid, p: FracParams, method: str = "auto") -> _OperatorBase:
    if method == "auto":
        method = "dense" if g.node_count <= DENSE_LIMIT else "fft"
    if method == "dense":
        return assemble_operator(d, g, p)
    if method == "fft":
        return fft_operator(d, g, p)
    raise PreconditionError(f"unknown solver method {method!r}")


# ---------------------------------------------------------------------------
# solves


def solve_torsion(d: Domain, g: Grid, p: FracParams, method: str = "auto") -> Field:
    op = get_operator(d, g, p, method)
    u = op.solve(np.ones(g.node_count))
    return Field(g, u, {"method": type(op).__name__, "positive": bool(np.all(u > 0))})


@dataclass(frozen=True)
class Nonlinearity:
    """f(u) = a + b u, with f(0) = a and Lipschitz constant |b|."""

    a: float
    b: float = 0.0

    def __call__(self, u):
        return self.a + self.b * np.asarray(u, dtype=float)

    @property
    def f0(self) -> float:
        return self.a

    def lipschitz(self, u_sup: float = math.inf) -> float:
        return abs(self.b)

    def c01_norm(self, u_sup: float) -> float:
        """sup |f| + Lip(f) on [0, u_sup]."""
        return max(abs(self.a), abs(self.a + self.b * u_sup)) + abs(self.b)

    @property
    def spec(self) -> str:
        return f"affine:a={self.a!r},b={self.b!r}"


def parse_nonlinearity(text: str) -> Nonlinearity:
    kind, _, body = text.strip().partition(":")
    if kind != "affine":
        raise SpecError(f"unknown nonlinearity {kind!r} (only affine:a=..,b=.. is supported)")
    vals = {}
    for item in filter(None, (q.strip() for q in body.split(","))):
        k, eq, v = item.partition("=")
        if not eq or k.strip() not in ("a", "b") or k.strip() in vals:
            raise SpecError(f"malformed nonlinearity entry {item!r}")
        try:
            vals[k.strip()] = float(v)
        except ValueError:
            raise SpecError(f"value of {k!r} is not a number") from None
    if "a" not in vals:
        raise SpecError("nonlinearity needs a=")
    return Nonlinearity(vals["a"], vals.get("b", 0.0))


def inverse_norm_estimate(op: _OperatorBase, N: int, iters: int = 30) -> float:
    """Power iteration on A^{-1}; returns the estimate of ||A^{-1}|| = 1/lambda_1."""
    v = np.ones(N) / math.sqrt(N)
    mu = 0.0
    for _ in range(iters):
        w = op.solve(v)
        mu = float(v @ w)
        v = w / np.linalg.norm(w)
    return mu


def principal_eigenvalue(op: _OperatorBase, N: int, iters: int = 30) -> float:
    return 1.0 / inverse_norm_estimate(op, N, iters)


def solve_semilinear(
    d: Domain,
    g: Grid,
    p: FracParams,
    f,
    lipschitz: Optional[float] = None,
    theta: Optional[float] = None,
    u0: Optional[np.ndarray] = None,
    tol: float = 1e-10,
    kmax: int = 500,
    method: str = "auto",
) -> Field:
    """Damped Picard iteration u <- (1 - theta) u + theta A^{-1} f(u)."""
    op = get_operator(d, g, p, method)
    N = g.node_count
    L = lipschitz if lipschitz is not None else f.lipschitz()
    if theta is None:
        theta = min(1.0, 1.0 / (1.0 + L * inverse_norm_estimate(op, N)))
    if not 0 < theta <= 1:
        raise PreconditionError("damping must lie in (0, 1]")
    u = op.solve(np.ones(N)) if u0 is None else np.array(u0, dtype=float)
    history, energies = [], []
    for k in range(kmax):
        v = op.solve(np.asarray(f(u), dtype=float))
        new = (1 - theta) * u + theta * v
        upd = float(np.max(np.abs(new - u)))
        u = new
        history.append(upd)
        energies.append(_energy(op, u, g))
        if not math.isfinite(upd) or upd > 1e150:
            raise ConvergenceError("Picard iteration diverged", history)
        if upd <= tol:
            return Field(g, u, {
                "iterations": k + 1, "theta": theta, "history": history, "energies": energies,
                "positive": bool(np.all(u > 0)), "method": type(op).__name__,
            })
    raise ConvergenceError(f"Picard iteration did not converge in {kmax} steps", history)


def exact_ball_solution(center, R: float, p: FracParams, x):
    """gamma_{n,s} (R^2 - |x - center|^2)_+^s."""
    if not R > 0:
        raise PreconditionError("radius must be positive")
    pts, single = as_points(x, p.n)
    c = np.asarray(center, dtype=float).reshape(1, p.n)
    q = np.maximum(R * R - ((pts - c) ** 2).sum(axis=1), 0.0)
    v = ball_constant(p) * q**p.s
    return float(v[0]) if single else v


def _energy(op, u, g) -> float:
    hn = g.h ** g.n
    return 0.5 * hn * float(u @ op.matvec(u)) - hn * float(u.sum())


def energy(u: Field, p: FracParams, method: str = "auto") -> float:
    """Discrete J(u) = 1/2 h^n u.Au - h^n sum u."""
    op = get_operator(u.grid.domain, u.grid, p, method)
    return _energy(op, u.values, u.grid)


# ---------------------------------------------------------------------------
# lower bounds


@dataclass(frozen=True)
class LowerBoundReport:
    mode: str
    min_slack: float
    violating_fraction: float
    band: float
    ok: bool


def error_band(h: float, s: float, c_eps: float = 1.0) -> float:
    """Discretization band eps(h) = c h^s used to tolerate pointwise violations."""
    return c_eps * h**s


def lower_bound_values(u: Field, p: FracParams, mode: str, r_sphere=None, cprime=None) -> np.ndarray:
    d = u.grid.domain
    dist = np.abs(d.signed_distance(u.grid.nodes))
    if mode == "weak":
        return ball_constant(p) * dist ** (2 * p.s)
    if mode == "sphere":
        if r_sphere is None:
            from .geometry.measures import interior_sphere_radius
            r_sphere = interior_sphere_radius(d)
        return ball_constant(p) * r_sphere**p.s * dist**p.s
    if mode == "cprime":
        if cprime is None:
            raise PreconditionError("cprime mode needs the constant C'")
        return cprime * dist ** (2 * p.s)
    raise PreconditionError(f"unknown lower-bound mode {mode!r}")


def verify_lower_bound(
    u: Field, d: Domain, p: FracParams, mode: str = "weak",
    r_sphere=None, cprime=None, c_eps: float = 1.0,
) -> LowerBoundReport:
    bound = lower_bound_values(u, p, mode, r_sphere, cprime)
    slack = u.values - bound
    band = error_band(u.grid.h, p.s, c_eps)
    return LowerBoundReport(
        mode, float(slack.min()), float(np.mean(slack < 0)), band, bool(slack.min() >= -band)
    )


def boundary_exponent(u: Field, width: float) -> float:
    """Least-squares slope of log u against log dist(x, boundary) on nodes within ``width``."""
    d = u.grid.domain
    dist = np.abs(d.signed_distance(u.grid.nodes))
    sel = (dist < width) & (u.values > 0)
    if sel.sum() < 3:
        raise PreconditionError("not enough nodes near the boundary for a fit")
    return float(np.polyfit(np.log(dist[sel]), np.log(u.values[sel]), 1)[0])
