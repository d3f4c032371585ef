"""Generate, simulate, optimize and rank digital modulation constellations."""

__version__ = "0.1.0"

from constkit.constellation import (  # noqa: E402
    GOLDEN_ANGLE,
    GOLDEN_RATIO,
    Constellation,
    Scheme,
    SchemeSpec,
    generate,
    make_constellation,
    normalize_energy,
)
from constkit.metrics import (  # noqa: E402
    PACKING_HEX,
    PACKING_SQUARE,
    SnrSpec,
    analytic_ser,
    distance_spectrum,
    min_distance,
    mutual_information,
    papr_db,
    union_bound_ser,
)

__all__ = [
    "GOLDEN_ANGLE", "GOLDEN_RATIO", "Constellation", "Scheme", "SchemeSpec", "generate",
    "make_constellation", "normalize_energy", "PACKING_HEX", "PACKING_SQUARE", "SnrSpec",
    "analytic_ser", "distance_spectrum", "min_distance", "mutual_information", "papr_db",
    "union_bound_ser",
]
