from .facets import facet_min_dists, facet_volumes, simplex_min_norm
from .functionals import (
    DistanceMode,
    TParams,
    contains_origin,
    facet_signs,
    lp_surface_area,
    polytope_volume,
    signed_t_functional,
    t_functional,
)
from .hull import (
    MAX_DIM,
    MIN_DIM,
    Facet,
    HullFailure,
    SimplicialPolytope,
    UnitVector,
    as_points,
    convex_hull,
    facet_geometry,
)

__all__ = [
    "DistanceMode", "TParams", "Facet", "HullFailure", "SimplicialPolytope", "UnitVector",
    "MAX_DIM", "MIN_DIM", "as_points", "convex_hull", "facet_geometry", "t_functional",
    "signed_t_functional", "lp_surface_area", "polytope_volume", "contains_origin",
    "facet_signs", "facet_min_dists", "facet_volumes", "simplex_min_norm",
]
