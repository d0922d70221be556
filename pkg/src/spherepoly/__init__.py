"""Random polytopes inscribed in the unit sphere: geometry, sampling, asymptotic
constants, exact oracles and a Monte Carlo harness."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateFacet,
    DegenerateInput,
    DimensionOutOfRange,
    InsufficientPrecision,
    NonPositiveDensity,
    OutOfRange,
    RejectionStall,
    SpherePolyError,
    TooManyDegenerate,
)
from .geometry import (  # noqa: E402
    DistanceMode,
    SimplicialPolytope,
    TParams,
    UnitVector,
    convex_hull,
    lp_surface_area,
    polytope_volume,
    signed_t_functional,
    t_functional,
)
from .sampling import (  # noqa: E402
    ExpTilt,
    LinearTilt,
    Mixture,
    Uniform,
    density_from_config,
    sample_density,
)

__all__ = [
    "__version__", "SpherePolyError", "DegenerateFacet", "DegenerateInput", "DimensionOutOfRange",
    "InsufficientPrecision", "NonPositiveDensity", "OutOfRange", "RejectionStall",
    "TooManyDegenerate", "DistanceMode", "SimplicialPolytope", "TParams", "UnitVector",
    "convex_hull", "lp_surface_area", "polytope_volume", "signed_t_functional", "t_functional",
    "ExpTilt", "LinearTilt", "Mixture", "Uniform", "density_from_config", "sample_density",
]
