"""The acceptance criteria as callable checks.

Each ``criterion_k`` returns a :class:`Criterion` with a verdict, the
sub-checks that produced it and the raw numbers. The test suite and the
``corpus`` subcommand both run these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy.integrate import quad

from .constants import FracParams, ball_constant, kernel_constant
from .corpus import corpus, ellipse_family, pdisk_family
from .fracsolver import (
    Field,
    Nonlinearity,
    assemble_operator,
    build_grid,
    exact_ball_solution,
    solve_semilinear,
    solve_torsion,
    verify_lower_bound,
)
from .geometry.domains import Disk, Domain, Interval, PerturbedDisk, square
from .geometry.measures import certified_reach, reflect, steiner_fit
from .movingplane import (
    check_inclusion,
    critical_pair,
    default_tol,
    direction_fan,
    onedir_grid_tolerance,
    onedir_rhs_factor,
    quantitative_onedir,
)
from .neumann import neumann_trace, nonlocal_neumann
from .stability import tube_checks, verify_theorem

HALF = FracParams(2, 0.5)
T_TRACE = 0.3
H_2D = 1 / 32
M_TRACE = 128


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool = True
    checks: List[Tuple[str, bool]] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def check(self, label: str, ok) -> bool:
        ok = bool(ok)
        self.checks.append((label, ok))
        self.passed = self.passed and ok
        return ok

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.title}"

    def lines(self) -> List[str]:
        out = [self.line()]
        out += [f"    {'ok  ' if ok else 'FAIL'} {label}" for label, ok in self.checks]
        return out


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


@lru_cache(maxsize=64)
def _torsion(d: Domain, p: FracParams, h: float) -> Field:
    return solve_torsion(d, build_grid(d, h), p)


@lru_cache(maxsize=64)
def _seminorm(d: Domain, p: FracParams, h: float, t: float = T_TRACE, m: int = M_TRACE) -> float:
    return neumann_trace(_torsion(d, p, h), d, p, t, m).seminorm


@lru_cache(maxsize=2048)
def _pair(d: Domain, t: float, omega: Tuple[float, ...]) -> Tuple[float, float]:
    return critical_pair(d, t, np.array(omega))


def _fan(k: int = 16) -> List[Tuple[float, float]]:
    return [tuple(map(float, w)) for w in direction_fan(k)]


def is_mirror_symmetric(d: Domain, omega, tol: float = 1e-8) -> bool:
    """Is Omega symmetric across the hyperplane through its centre orthogonal to omega?"""
    w = np.asarray(omega, dtype=float)
    pts = d.boundary_samples(256)[0]
    img = reflect(pts, w, float(d.center @ w))
    return bool(np.abs(d.signed_distance(img)).max() <= tol * d.diam)


# ---------------------------------------------------------------------------


def criterion_1() -> Criterion:
    c = Criterion(1, "ball oracle 1D: interval(-1,1), s=0.5, u(0) against psi(0)=1")
    p = FracParams(1, 0.5)
    d = Interval(-1.0, 1.0)
    hs = [2.0**-k for k in range(5, 9)]
    errs = []
    for h in hs:
        u = _torsion(d, p, h)
        i0 = int(np.argmin(np.abs(u.grid.nodes[:, 0])))
        errs.append(_rel(float(u.values[i0]), ball_constant(p)))
    order = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    c.data = {"h": hs, "rel_err": errs, "order": order}
    c.check(f"relative error {errs[-1]:.3e} <= 5e-2 at h=2^-8", errs[-1] <= 0.05)
    c.check(f"empirical order {order:.3f} >= 0.5", order >= 0.5)
    return c


def criterion_2() -> Criterion:
    c = Criterion(2, "ball oracle 2D: disk(0,1), s=0.5, u(0) against 2/pi")
    d = Disk(0.0, 0.0, 1.0)
    hs = [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    errs = []
    for h in hs:
        u = _torsion(d, HALF, h)
        i0 = int(np.argmin(np.linalg.norm(u.grid.nodes, axis=1)))
        errs.append(_rel(float(u.values[i0]), 2 / math.pi))
    c.data = {"h": hs, "rel_err": errs}
    c.check(f"relative error {errs[2]:.3e} <= 1e-1 at h=1/32", errs[2] <= 0.1)
    c.check("error strictly decreasing over h=1/8,1/16,1/32,1/64: "
            + ", ".join(f"{e:.2e}" for e in errs), all(a > b for a, b in zip(errs, errs[1:])))
    return c


def criterion_3() -> Criterion:
    c = Criterion(3, "converse symmetry: disk trace seminorm at t=0.3, m=128")
    d = Disk(0.0, 0.0, 1.0)
    s32 = _seminorm(d, HALF, 1 / 32)
    s64 = _seminorm(d, HALF, 1 / 64)
    c.data = {"h=1/32": s32, "h=1/64": s64}
    c.check(f"seminorm {s32:.3e} <= 1e-2 at h=1/32", s32 <= 1e-2)
    c.check(f"decrease factor {s32 / s64:.2f} >= 2 at h=1/64", s32 / s64 >= 2)
    return c


def ns_psi_reference(x: float, p: FracParams) -> float:
    """-c_{1,s} int_{-1}^{1} psi(y) / |x - y|^{1+2s} dy by adaptive quadrature."""
    gm, cns = ball_constant(p), kernel_constant(p)
    val = quad(lambda y: gm * (1 - y * y) ** p.s / abs(x - y) ** (1 + 2 * p.s), -1.0, 1.0,
               epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return -cns * val


def criterion_4() -> Criterion:
    c = Criterion(4, "exterior-point oracle: 1D N_s psi at x=2 against adaptive quadrature")
    p = FracParams(1, 0.5)
    d = Interval(-1.0, 1.0)
    ref = ns_psi_reference(2.0, p)
    g = build_grid(d, 2.0**-8)
    psi = Field.from_function(g, lambda x: exact_ball_solution([0.0], 1.0, p, x))
    val = nonlocal_neumann(psi, d, p, 2.0)
    solved = nonlocal_neumann(_torsion(d, p, 2.0**-8), d, p, 2.0)
    err = _rel(val, ref)
    c.data = {"reference": ref, "lattice": val, "from_solution": solved}
    c.check(f"N_s psi(2) = {val:.6f} vs {ref:.6f}, relative error {err:.2e} <= 5e-4", err <= 5e-4)
    return c


def criterion_5() -> Criterion:
    c = Criterion(5, "weak lower bound u >= gamma dist^{2s} - eps(h) at every node")
    cs = corpus()
    for name in ["disk", "ellipse-1.05", "ellipse-1.1", "ellipse-1.2"]:
        d = cs[name]
        rep = verify_lower_bound(_torsion(d, HALF, H_2D), d, HALF, "weak")
        c.data[name] = rep.min_slack
        c.check(f"{name}: min slack {rep.min_slack:.3e} >= -{rep.band:.3e}", rep.ok)
    return c


def criterion_6(t: float = T_TRACE, equivariance_dirs: int = 4) -> Criterion:
    c = Criterion(6, "moving plane: ordering, equivariance, inclusion")
    shift = np.array([0.37, -0.21])
    angle = math.radians(25.0)
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    worst_order = worst_eq = 0.0
    bad_inc = []
    for name, d in corpus().items():
        tol = default_tol(d)
        for w in _fan():
            lam, lam_hat = _pair(d, t, w)
            worst_order = max(worst_order, (lam_hat - lam) / d.diam)
            if lam_hat > lam + tol:
                c.check(f"{name} {w}: lam_hat {lam_hat} > lam_star {lam}", False)
            inc = check_inclusion(d, t, w, lam)
            if not inc.ok:
                bad_inc.append((name, w, inc.max_depth))
        for w in _fan(equivariance_dirs):
            lam = _pair(d, t, w)[0]
            wv = np.array(w)
            lam_tr = critical_pair(d.transformed(0.0, shift), t, wv)[0]
            lam_rot = critical_pair(d.transformed(angle), t, rot @ wv)[0]
            e = max(abs(lam_tr - lam - shift @ wv), abs(lam_rot - lam)) / d.diam
            worst_eq = max(worst_eq, e)
    # nonconvex member at 0.9 of its reach
    nc = PerturbedDisk(1.0, 0.3, 2)
    tn = 0.9 * certified_reach(nc)
    for w in _fan():
        lam = critical_pair(nc, tn, np.array(w))[0]
        inc = check_inclusion(nc, tn, w, lam)
        if not inc.ok:
            bad_inc.append(("pdisk-0.3", w, inc.max_depth))
    c.data = {"max (lam_hat - lam_star)/diam": worst_order, "max equivariance error/diam": worst_eq,
              "inclusion failures": bad_inc}
    c.check(f"lam_hat <= lam_star + tol on corpus x 16 directions (max excess {worst_order:.2e} diam)",
            worst_order <= 1e-4)
    c.check(f"translation/rotation equivariance error {worst_eq:.2e} diam <= 1e-4", worst_eq <= 1e-4)
    c.check(f"inclusion: {len(bad_inc)} failing (domain, direction) pairs", not bad_inc)
    return c


def criterion_7(t: float = T_TRACE, h: float = H_2D) -> Criterion:
    c = Criterion(7, "one-direction estimate lhs <= rhs; symmetric cases lhs ~ 0")
    rows, over = [], []
    for name, d in corpus().items():
        u = _torsion(d, HALF, h)
        sem = _seminorm(d, HALF, h, t)
        sem_c = neumann_trace(solve_torsion(d, build_grid(d, 2 * h, strict=False), HALF),
                              d, HALF, t, M_TRACE).seminorm
        K = onedir_rhs_factor(d, HALF)
        eps_total = onedir_grid_tolerance(u) + K * abs(sem - sem_c)
        cell_tol = u.h**d.n * d.diam * float(u.values.max())
        for w in _fan():
            lam = _pair(d, t, w)[0]
            lhs, rhs = quantitative_onedir(u, d, HALF, w, lam, t, seminorm=sem)
            sym = is_mirror_symmetric(d, w)
            rows.append((name, w, lhs, rhs, eps_total, sym))
            if rhs - lhs < -eps_total:
                over.append(name)
                c.check(f"{name} {w}: lhs {lhs:.4g} > rhs {rhs:.4g} + eps {eps_total:.3g}", False)
            if sym and lhs > cell_tol:
                c.check(f"{name} omega=({w[0]:+.3f},{w[1]:+.3f}) symmetric: lhs {lhs:.4g} > grid "
                        f"tolerance {cell_tol:.2g} (lam_star={lam:.4g})", False)
    c.data = {"rows": rows}
    n_sym = sum(r[5] for r in rows)
    c.check(f"lhs <= rhs + eps_total on {len(rows) - len(over)} of {len(rows)} (domain, direction) pairs "
            f"({n_sym} mirror-symmetric)", not over)
    return c


def criterion_8(t: float = T_TRACE, h: float = H_2D) -> Criterion:
    c = Criterion(8, "stability inequality: T13 on ellipse and perturbed-disk families, T15 on squares")
    jobs = [(d, "T13") for d in ellipse_family() + pdisk_family()]
    jobs += [(square(2.0), "T15"), (square(2.0, angle=math.pi / 6), "T15")]
    for d, variant in jobs:
        rep = verify_theorem(d, HALF, t, h, M_TRACE, variant)
        c.data[f"{variant} {d.spec}"] = rep.to_dict()
        c.check(f"{variant} {d.spec}: rho={rep.rho:.4g} rhs={rep.rhs:.4g} margin={rep.margin:.4g} "
                f"({rep.status})", rep.margin >= -rep.eps_total)
    return c


def criterion_9() -> Criterion:
    c = Criterion(9, "Steiner coefficient and half-tube bounds")
    phi_disk = steiner_fit(Disk(0.0, 0.0, 1.0)).phi
    phi_sq = steiner_fit(square(1.0)).phi
    c.check(f"Phi_1(disk) = {phi_disk:.5f} within 1% of pi", _rel(phi_disk, math.pi) <= 0.01)
    c.check(f"Phi_1(unit square) = {phi_sq:.5f} within 1% of 2", _rel(phi_sq, 2.0) <= 0.01)
    fail_convex, fail_reach, fail_reach_p = [], [], []
    for name, d in corpus().items():
        for row in tube_checks(d):
            if row.ok_convex is False:
                fail_convex.append((name, row.gamma))
            if not row.ok_reach:
                fail_reach.append((name, row.gamma, row.measure, row.bound_reach))
            if not row.ok_reach_perimeter:
                fail_reach_p.append((name, row.gamma))
    c.data = {"phi_disk": phi_disk, "phi_square": phi_sq, "convex_failures": fail_convex,
              "reach_failures": fail_reach, "reach_perimeter_failures": fail_reach_p}
    c.check(f"half tube <= gamma Per on convex members ({len(fail_convex)} failures)", not fail_convex)
    c.check(f"half tube <= gamma (1+2gamma/r) Phi_1 with the Steiner Phi_1 ({len(fail_reach)} failures)",
            not fail_reach)
    c.check(f"the same bound with the parallel-curve length limit 2 Phi_1 in place of Phi_1 "
            f"({len(fail_reach_p)} failures)", not fail_reach_p)
    return c


def criterion_10(h: float = H_2D, t: float = T_TRACE) -> Criterion:
    c = Criterion(10, "semilinear f(u)=1+0.1u on the disk")
    d = Disk(0.0, 0.0, 1.0)
    f = Nonlinearity(1.0, 0.1)
    g = build_grid(d, h)
    u = solve_semilinear(d, g, HALF, f)
    u0 = _torsion(d, HALF, h)
    gap = float((u.values - u0.values).min())
    c.check(f"Picard iteration converged in {u.info['iterations']} steps", True)
    c.check(f"semilinear solution dominates torsion nodewise (min gap {gap:.3e})", gap >= 0)
    rep = verify_theorem(d, HALF, t, h, M_TRACE, "T14", f=f)
    c.data = {"iterations": u.info["iterations"], "report": rep.to_dict()}
    c.check(f"T14 report margin {rep.margin:.4g} >= -{rep.eps_total:.3g} (C_ns = 1)",
            rep.margin >= -rep.eps_total)
    return c


def criterion_11() -> Criterion:
    c = Criterion(11, "discrete maximum principle: inverse entries >= -1e-12")
    cases = [
        (Interval(-1.0, 1.0), FracParams(1, 0.5), 2.0**-6),
        (Interval(-1.0, 1.0), FracParams(1, 0.2), 2.0**-6),
        (Disk(0.0, 0.0, 1.0), HALF, 0.15),
        (Disk(0.0, 0.0, 1.0), FracParams(2, 0.9), 0.15),
        (square(2.0), FracParams(2, 0.3), 0.16),
    ]
    for d, p, h in cases:
        g = build_grid(d, h)
        A = assemble_operator(d, g, p).matrix
        inv_min = float(np.linalg.inv(A).min())
        c.check(f"{d.kind} s={p.s} N={g.node_count}: min inverse entry {inv_min:.3e}",
                g.node_count <= 200 and inv_min >= -1e-12)
    return c


CRITERIA: Dict[int, Callable[[], Criterion]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11,
}


def run_all(numbers=None) -> List[Criterion]:
    return [CRITERIA[k]() for k in (numbers or sorted(CRITERIA))]
