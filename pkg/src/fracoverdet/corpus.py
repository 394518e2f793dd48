"""The fixed verification corpus."""

from __future__ import annotations

import math
from typing import Dict, List

from .geometry.domains import ConvexPolygon, Disk, Domain, Ellipse, PerturbedDisk, square

ASYMMETRIC_VERTS = ((-1.0, -0.8), (1.1, -0.6), (0.9, 0.7), (-0.3, 1.0), (-1.0, 0.4))


def corpus() -> Dict[str, Domain]:
    return {
        "disk": Disk(0.0, 0.0, 1.0),
        "ellipse-1.05": Ellipse(1.05, 1.0),
        "ellipse-1.1": Ellipse(1.1, 1.0),
        "ellipse-1.2": Ellipse(1.2, 1.0),
        "pdisk-2": PerturbedDisk(1.0, 0.04, 2),
        "pdisk-3": PerturbedDisk(1.0, 0.05, 3),
        "square": square(2.0),
        "square-rot30": square(2.0, angle=math.pi / 6),
        "polygon": ConvexPolygon(ASYMMETRIC_VERTS),
    }


def smooth_members() -> List[str]:
    """Corpus members with an interior sphere condition."""
    return ["disk", "ellipse-1.05", "ellipse-1.1", "ellipse-1.2", "pdisk-2", "pdisk-3"]


def ellipse_family() -> List[Domain]:
    return [Ellipse(1 + dl, 1.0) for dl in (0.05, 0.1, 0.2)]


def pdisk_family(eps=(0.02, 0.04, 0.08), k: int = 2) -> List[Domain]:
    return [PerturbedDisk(1.0, e, k) for e in eps]
