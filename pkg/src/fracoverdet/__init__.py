"""Fractional torsion solver and quantitative-symmetry verifier for
overdetermined problems with a nonlocal Neumann condition on parallel surfaces."""

from .constants import (
    ConstantSet,
    FracParams,
    GeomSummary,
    ball_constant,
    cprime_constant,
    kernel_constant,
    stability_constants,
)
from .errors import ConvergenceError, FracError, GeometryError, PreconditionError, SpecError
from .fracsolver import (
    Field,
    Grid,
    Nonlinearity,
    build_grid,
    exact_ball_solution,
    solve_semilinear,
    solve_torsion,
    verify_lower_bound,
)
from .geometry import parse_domain
from .movingplane import (
    MovingPlaneResult,
    analyze_direction,
    check_inclusion,
    classical_critical_value,
    classify_touching,
    critical_value,
    quantitative_onedir,
)
from .neumann import lipschitz_seminorm, neumann_trace, nonlocal_neumann
from .stability import (
    StabilityReport,
    center_of_symmetry,
    deficit_scaling_study,
    verify_theorem,
)

__version__ = "0.1.0"

__all__ = [
    "ConstantSet", "FracParams", "GeomSummary", "ball_constant", "cprime_constant",
    "kernel_constant", "stability_constants", "ConvergenceError", "FracError", "GeometryError",
    "PreconditionError", "SpecError", "Field", "Grid", "Nonlinearity", "build_grid",
    "exact_ball_solution", "solve_semilinear", "solve_torsion", "verify_lower_bound",
    "parse_domain", "MovingPlaneResult", "analyze_direction", "check_inclusion",
    "classical_critical_value", "classify_touching", "critical_value", "quantitative_onedir",
    "lipschitz_seminorm", "neumann_trace", "nonlocal_neumann", "StabilityReport",
    "center_of_symmetry", "deficit_scaling_study", "verify_theorem",
]
