"""Full stability verifications: deficit against the Neumann-trace seminorm with
the explicit constants, approximate-symmetry centre checks, tube bounds and
empirical exponent studies."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .constants import (
    FracParams,
    GeomSummary,
    VARIANTS,
    cprime_constant,
    stability_constants,
)
from .errors import GeometryError, PreconditionError
from .fracsolver import Nonlinearity, build_grid, solve_semilinear, solve_torsion
from .geometry.domains import Domain, PolygonDomain, no_interior_sphere
from .geometry.measures import (
    capped_reach,
    certified_reach,
    curvature_measure,
    deficit,
    half_tube_measure,
    interior_sphere_radius,
    symmetric_difference_measure,
)
from .movingplane import critical_value, default_tol, direction_fan
from .neumann import neumann_trace

GEOM_TOL = 1e-5  # relative to diam, budget for deficit and geometric measures


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:  # pragma: no cover - uninstalled checkout
        return "0+unknown"


def geom_summary(d: Domain, variant: Optional[str] = None) -> GeomSummary:
    """Geometric inputs of the constants; only what the variant needs is computed."""
    r, capped = capped_reach(d)
    r_sphere = phi = None
    if variant in (None, "T13", "T14"):
        try:
            r_sphere = interior_sphere_radius(d)
        except GeometryError:
            if variant is not None:
                raise
    if variant in ("T15", "T16") and d.n == 2:
        phi = curvature_measure(d)
    return GeomSummary(d.n, d.diam, r, d.area, r_sphere, phi, capped)


def center_of_symmetry(d: Domain, t: float, tol_mp: Optional[float] = None) -> np.ndarray:
    """Point whose i-th coordinate is the critical value in direction e_i."""
    eye = np.eye(d.n)
    return np.array([critical_value(d, t, eye[i], tol_mp) for i in range(d.n)])


def margin_status(margin: float, eps_total: float) -> str:
    if margin >= 0:
        return "pass"
    if margin >= -eps_total:
        return "inconclusive"
    return "violation"


@dataclass
class StabilityReport:
    variant: str
    domain: str
    s: float
    t: float
    h: float
    m: int
    rho: float
    seminorm: float
    constant: float
    exponent: float
    lhs: float
    rhs: float
    margin: float
    eps_total: float
    status: str
    center: List[float]
    lambda_bound_checks: List[dict] = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    caveats: List[str] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status != "violation"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> "StabilityReport":
        return cls(**obj)


def _solve(d: Domain, p: FracParams, h: float, f: Optional[Nonlinearity], strict: bool = True):
    g = build_grid(d, h, strict=strict)
    if f is None:
        return solve_torsion(d, g, p)
    return solve_semilinear(d, g, p, f)


def _check_variant(d: Domain, p: FracParams, variant: str, f) -> None:
    if variant not in VARIANTS:
        raise PreconditionError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if d.n != p.n:
        raise PreconditionError("domain and parameter dimensions differ")
    p.check_stability_range()
    if variant in ("T15", "T16") and d.n < 2:
        raise PreconditionError("positive-reach theorems need n >= 2")
    if variant in ("T13", "T14") and isinstance(d, PolygonDomain):
        raise no_interior_sphere(d)
    if variant in ("T14", "T16"):
        if f is None:
            raise PreconditionError(f"{variant} needs a nonlinearity f")
        if f.f0 < 0:
            raise PreconditionError("f(0) must be nonnegative")
    elif f is not None:
        raise PreconditionError(f"{variant} is the torsion variant; drop f or use T14/T16")


def weighted_integral(u, p: FracParams) -> float:
    X = u.grid.nodes
    w = 1.0 / (1.0 + np.linalg.norm(X, axis=1) ** (p.n + 2 * p.s))
    return u.h**p.n * float(np.sum(u.values * w))


def verify_theorem(
    d: Domain,
    p: FracParams,
    t: float,
    h: float,
    m: int = 128,
    variant: str = "T13",
    f: Optional[Nonlinearity] = None,
    n_dirs: int = 16,
    C_ns: float = 1.0,
) -> StabilityReport:
    _check_variant(d, p, variant, f)
    if t >= certified_reach(d):
        raise PreconditionError("t must be below the certified reach")
    g = geom_summary(d, variant)

    u = _solve(d, p, h, f)
    tr = neumann_trace(u, d, p, t, m)
    sem = tr.seminorm

    caveats = []
    cprime = None
    if variant in ("T14", "T16"):
        usup = float(u.values.max())
        cprime = cprime_constant(f.f0, f.c01_norm(usup), usup, weighted_integral(u, p), g, p, C_ns)
        caveats.append(f"C_ns = {C_ns!r} in C' is a placeholder for an unspecified constant")
    if g.reach_capped:
        caveats.append(f"convex domain: r_Omega replaced by {g.r_reach!r} (10 diam)")
    cs = stability_constants(g, p, variant, cprime)
    e = cs.exponent

    # coarse companion for the discretization budget
    try:
        uc = _solve(d, p, 2 * h, f, strict=False)
        sem_c = neumann_trace(uc, d, p, t, m).seminorm
        coarse = {"h": 2 * h, "m": m}
    except PreconditionError:
        sem_c = neumann_trace(u, d, p, t, max(16, m // 2)).seminorm
        coarse = {"h": h, "m": max(16, m // 2)}
    eps_total = cs.C * abs(sem**e - sem_c**e) + GEOM_TOL * d.diam

    rho = deficit(d)
    rhs = cs.C * sem**e
    margin = rhs - rho

    center = center_of_symmetry(d, t)
    checks = []
    if d.n == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        dirs = direction_fan(n_dirs)
    for w in dirs:
        lam = critical_value(d, t, w)
        off = abs(lam - float(center @ w))
        row = {
            "omega": [float(c) for c in w],
            "lam_star": lam,
            "offset": off,
            "offset_bound": cs.Cflat * sem**e,
        }
        row["offset_ok"] = bool(off <= row["offset_bound"] + default_tol(d))
        if d.n == 2:
            sd = symmetric_difference_measure(d, w, lam)
            row.update(sym_diff=sd, sym_diff_bound=cs.Csharp * sem**e)
            row["sym_diff_ok"] = bool(sd <= row["sym_diff_bound"])
        checks.append(row)

    return StabilityReport(
        variant=variant,
        domain=d.spec,
        s=p.s,
        t=float(t),
        h=float(h),
        m=int(m),
        rho=float(rho),
        seminorm=float(sem),
        constant=cs.C,
        exponent=e,
        lhs=float(rho),
        rhs=float(rhs),
        margin=float(margin),
        eps_total=float(eps_total),
        status=margin_status(margin, eps_total),
        center=[float(c) for c in center],
        lambda_bound_checks=checks,
        constants={
            "C1": cs.C1, "C2": cs.C2, "Csharp": cs.Csharp, "Cflat": cs.Cflat,
            "gamma0": cs.gamma0, "cprime": cprime, "r_reach": g.r_reach,
            "r_sphere": g.r_sphere, "phi_curv": g.phi_curv, **cs.extras,
        },
        caveats=caveats,
        provenance={
            "version": _version(),
            "nodes": u.grid.node_count,
            "solver": u.info.get("method"),
            "trace_samples": m,
            "coarse": coarse,
            "seminorm_coarse": float(sem_c),
            "tol_mp": default_tol(d),
            "nonlinearity": f.spec if f is not None else None,
            "sampled_seminorm": True,
        },
    )


# ---------------------------------------------------------------------------
# empirical exponent


@dataclass
class ScalingStudy:
    variant: str
    rows: List[dict]
    slope: float
    exponent: float

    @property
    def passed(self) -> bool:
        return self.slope >= self.exponent


def deficit_scaling_study(
    family: Sequence[Domain], p: FracParams, t: float, h: float, m: int = 128, variant: str = "T13"
) -> ScalingStudy:
    """Slope of log rho against log seminorm across a family shrinking to a ball."""
    if len(family) < 3:
        raise PreconditionError("scaling study needs at least 3 domains")
    if variant not in VARIANTS:
        raise PreconditionError(f"unknown variant {variant!r}")
    p.check_stability_range()
    e = 1.0 / (2 + p.s) if variant in ("T13", "T14") else 1.0 / (2 + 2 * p.s)
    rows = []
    for d in family:
        u = _solve(d, p, h, None)
        sem = neumann_trace(u, d, p, t, m).seminorm
        rows.append({"domain": d.spec, "rho": deficit(d), "seminorm": sem})
    rho = np.array([r["rho"] for r in rows])
    sem = np.array([r["seminorm"] for r in rows])
    if np.any(rho <= GEOM_TOL * max(dd.diam for dd in family)) or np.any(sem <= 0):
        raise PreconditionError("degenerate family: deficit or seminorm vanishes")
    x = np.log(sem)
    if np.ptp(x) < 1e-12:
        raise PreconditionError("degenerate family: seminorm does not vary")
    slope = float(np.polyfit(x, np.log(rho), 1)[0])
    return ScalingStudy(variant, rows, slope, e)


# ---------------------------------------------------------------------------
# tube bounds


def convex_tube_bound(d: Domain, gamma: float) -> float:
    """gamma Per(Omega), the half-tube bound for convex domains."""
    return gamma * d.perimeter


def reach_tube_bound(gamma: float, r: float, phi: float, n: int = 2) -> float:
    """gamma (1 + 2 gamma / r)^{n-1} Phi."""
    return gamma * (1 + 2 * gamma / r) ** (n - 1) * phi


@dataclass(frozen=True)
class TubeRow:
    gamma: float
    measure: float
    error: float
    bound_convex: Optional[float]
    bound_reach: float
    bound_reach_perimeter: float

    @property
    def ok_convex(self) -> Optional[bool]:
        return None if self.bound_convex is None else bool(self.measure <= self.bound_convex + self.error)

    @property
    def ok_reach(self) -> bool:
        return bool(self.measure <= self.bound_reach + self.error)

    @property
    def ok_reach_perimeter(self) -> bool:
        return bool(self.measure <= self.bound_reach_perimeter + self.error)


def gamma_sweep(d: Domain, k: int = 7) -> np.ndarray:
    return np.geomspace(0.01, 1.0, k) * d.inradius


def tube_checks(d: Domain, gammas=None) -> List[TubeRow]:
    """Half-tube measures against both tube bounds.

    bound_reach uses the Steiner coefficient Phi_1 (half the perimeter for convex
    sets); bound_reach_perimeter uses the limit of the parallel-curve length, i.e.
    2 Phi_1.
    """
    if d.n != 2:
        raise PreconditionError("tube checks are implemented for planar domains")
    gammas = gamma_sweep(d) if gammas is None else np.asarray(gammas, dtype=float)
    phi = curvature_measure(d)
    r, _ = capped_reach(d)
    rows = []
    for gm in gammas:
        v, err = half_tube_measure(d, float(gm), with_error=True)
        rows.append(TubeRow(
            float(gm), float(v), float(err),
            convex_tube_bound(d, gm) if d.is_convex else None,
            reach_tube_bound(gm, r, phi, d.n),
            reach_tube_bound(gm, r, 2 * phi, d.n),
        ))
    return rows
