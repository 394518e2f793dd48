"""Planar and interval domains, distance queries and geometric measures."""

from .domains import (
    ConvexPolygon,
    Disk,
    Domain,
    Ellipse,
    Interval,
    PerturbedDisk,
    Rectangle,
    as_points,
    parse_domain,
    rotation,
    square,
)
from .measures import (
    FedererReport,
    ParallelSurface,
    certified_reach,
    curvature_measure,
    deficit,
    direction,
    distance_to_boundary,
    distance_to_set,
    estimate_reach,
    federer_check,
    half_tube_measure,
    interior_sphere_radius,
    measure_with_error,
    parallel_surface,
    reflect,
    steiner_fit,
    symmetric_difference_measure,
)

__all__ = [
    "ConvexPolygon", "Disk", "Domain", "Ellipse", "Interval", "PerturbedDisk", "Rectangle",
    "as_points", "parse_domain", "rotation", "square",
    "FedererReport", "ParallelSurface", "certified_reach", "curvature_measure", "deficit",
    "direction", "distance_to_boundary", "distance_to_set", "estimate_reach", "federer_check",
    "half_tube_measure", "interior_sphere_radius", "measure_with_error", "parallel_surface",
    "reflect", "steiner_fit", "symmetric_difference_measure",
]
