"""Closed-form constants: kernel normalization, ball constant, C' and the
stability constants of the interior-sphere (T13/T14) and positive-reach
(T15/T16) theorems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import PreconditionError

VARIANTS = ("T13", "T14", "T15", "T16")

# r_Omega stand-in for convex domains, in units of the diameter
CONVEX_REACH_CAP = 10.0


@dataclass(frozen=True)
class FracParams:
    n: int
    s: float

    def __post_init__(self):
        if self.n not in (1, 2):
            raise PreconditionError(f"dimension must be 1 or 2, got {self.n}")
        if not (0.0 < self.s < 1.0):
            raise PreconditionError(f"fractional order must lie in (0,1), got {self.s}")

    def check_stability_range(self) -> None:
        if self.n == 1 and self.s < 0.5:
            raise PreconditionError("stability theorems need n >= 2 or n = 1 and s >= 1/2")


@dataclass(frozen=True)
class GeomSummary:
    n: int
    diam: float
    r_reach: float
    area: float
    r_sphere: Optional[float] = None
    phi_curv: Optional[float] = None
    reach_capped: bool = False

    def __post_init__(self):
        for name in ("diam", "r_reach", "area"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise PreconditionError(f"{name} must be positive and finite, got {v}")
        for name in ("r_sphere", "phi_curv"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise PreconditionError(f"{name} must be positive and finite, got {v}")
        if self.r_sphere is not None and self.r_sphere > self.diam / 2 * (1 + 1e-12):
            raise PreconditionError("interior sphere radius exceeds diam/2")

    @property
    def unit_ball_vol(self) -> float:
        return unit_ball_volume(self.n)


@dataclass(frozen=True)
class ConstantSet:
    variant: str
    C: float
    C1: float
    C2: float
    Csharp: float
    Cflat: float
    exponent: float
    gamma0: float
    extras: dict = field(default_factory=dict)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def _check_s(p: FracParams) -> None:
    if not (0.0 < p.s < 1.0):
        raise PreconditionError(f"fractional order must lie in (0,1), got {p.s}")


def kernel_constant(p: FracParams) -> float:
    """c_{n,s} = s(1-s) 4^s pi^{-n/2} Gamma(n/2+s) / Gamma(2-s)."""
    _check_s(p)
    n, s = p.n, p.s
    return s * (1 - s) * 4.0**s * math.pi ** (-n / 2) * math.gamma(n / 2 + s) / math.gamma(2 - s)


def ball_constant(p: FracParams) -> float:
    """gamma_{n,s}, the value at the centre of the torsion function of the unit ball."""
    _check_s(p)
    n, s = p.n, p.s
    return 4.0 ** (-s) * math.gamma(n / 2) / (math.gamma(n / 2 + s) * math.gamma(1 + s))


def _positive(**kw) -> None:
    for k, v in kw.items():
        if v is None:
            raise PreconditionError(f"missing required geometry field {k}")
        if not (v > 0 and math.isfinite(v)):
            raise PreconditionError(f"{k} must be positive and finite, got {v}")


def stability_constants(
    g: GeomSummary, p: FracParams, variant: str, cprime: Optional[float] = None
) -> ConstantSet:
    """Assemble the explicit constants of one stability theorem.

    For T14/T16 ``cprime`` replaces gamma_{n,s} r^s (resp. gamma_{n,s}).
    """
    if variant not in VARIANTS:
        raise PreconditionError(f"unknown variant {variant!r}")
    if g.n != p.n:
        raise PreconditionError("geometry and parameter dimensions differ")
    n, s = p.n, p.s
    c = kernel_constant(p)
    gam = ball_constant(p)
    diam, r = g.diam, g.r_reach
    B1 = g.unit_ball_vol
    _positive(diam=diam, r_reach=r)
    if variant in ("T14", "T16"):
        _positive(cprime=cprime)

    if variant in ("T13", "T14"):
        p.check_stability_range()
        rs = g.r_sphere
        _positive(r_sphere=rs)
        lower = gam * rs**s if variant == "T13" else cprime
        C1 = (diam + r) ** (n + 2 * s + 2) / (c * lower * (n + 2 * s))
        C2 = diam ** (n - 1) + n * B1 * diam**n / (2 ** (n - 1) * rs)
        e = 1.0 / (2 + s)
        Csharp = 2 * (s + 2) * C1**e * (C2 / (s + 1)) ** ((1 + s) * e)
        Cflat = 4 * (n + 3) * Csharp * diam / (rs**n * B1)
        gamma0 = min(0.25, 1.0 / n) * rs**n * B1 / Csharp
        C = 2 * Cflat
        return ConstantSet(variant, C, C1, C2, Csharp, Cflat, e, gamma0)

    if n < 2:
        raise PreconditionError("positive-reach theorems need n >= 2")
    phi = g.phi_curv
    _positive(phi_curv=phi, area=g.area)
    lower = gam if variant == "T15" else cprime
    C1 = (diam + r) ** (n + 2 * s + 2) / (c * lower * (n + 2 * s))
    C2 = diam ** (n - 1) + (1 + 2 / r) ** (n - 1) * phi
    e = 1.0 / (2 + 2 * s)
    Csharp = 4 * (s + 1) * C1**e * (C2 / (2 * s + 1)) ** ((2 * s + 1) * e)
    Cflat = 4 * (n + 3) * Csharp * diam / g.area
    small = (diam ** (n - 1) / ((2 * s + 1) * C1)) ** e
    gamma0 = min(min(0.25, 1.0 / n) * g.area / Csharp, small)
    C = max(2 * Cflat, diam / small)
    return ConstantSet(variant, C, C1, C2, Csharp, Cflat, e, gamma0, {"smallness": small})


def t13_closed_form(g: GeomSummary, p: FracParams) -> float:
    """The T13 constant written as a single product (used to cross-check C = 2 Cflat)."""
    n, s = p.n, p.s
    rs = g.r_sphere
    c, gam = kernel_constant(p), ball_constant(p)
    C1 = (g.diam + g.r_reach) ** (n + 2 * s + 2) / (c * gam * rs**s * (n + 2 * s))
    C2 = g.diam ** (n - 1) + n * g.unit_ball_vol * g.diam**n / (2 ** (n - 1) * rs)
    e = 1.0 / (2 + s)
    return (
        16 * (n + 3) * (s + 2) * g.diam / (rs**n * g.unit_ball_vol)
        * C1**e * (C2 / (s + 1)) ** ((1 + s) * e)
    )


def t15_closed_form(g: GeomSummary, p: FracParams) -> float:
    n, s = p.n, p.s
    c, gam = kernel_constant(p), ball_constant(p)
    C1 = (g.diam + g.r_reach) ** (n + 2 * s + 2) / (c * gam * (n + 2 * s))
    C2 = g.diam ** (n - 1) + (1 + 2 / g.r_reach) ** (n - 1) * g.phi_curv
    e = 1.0 / (2 + 2 * s)
    a = 32 * (n + 3) * (s + 1) / g.area * C1**e * (C2 / (2 * s + 1)) ** ((2 * s + 1) * e)
    b = ((2 * s + 1) * C1 / g.diam ** (n - 1)) ** e
    return max(a, b) * g.diam


def cprime_constant(
    f0: float,
    f_lip: float,
    u_sup: float,
    u_weight_integral: float,
    g: GeomSummary,
    p: FracParams,
    C_ns: float = 1.0,
) -> float:
    """Lower-bound constant C' for the semilinear problem.

    ``f_lip`` is the C^{0,1} norm of f on [0, u_sup]; ``u_sup`` only enters
    through it and is accepted for the record.
    """
    if f0 < 0:
        raise PreconditionError("f(0) must be nonnegative")
    if f_lip < 0 or u_sup < 0 or u_weight_integral < 0:
        raise PreconditionError("Lipschitz norm, sup and weighted integral must be nonnegative")
    if not C_ns > 0:
        raise PreconditionError("C_ns must be positive")
    if f0 + u_weight_integral <= 0:
        raise PreconditionError("C' degenerate: trivial solution with f(0) = 0")
    n, s = p.n, p.s
    return (
        C_ns / max(1.0, g.diam) ** (n + 2 * s)
        / (1 + g.diam ** (2 * s) * f_lip)
        * (f0 + u_weight_integral)
    )


def with_reach(g: GeomSummary, r: float) -> GeomSummary:
    return replace(g, r_reach=r)
