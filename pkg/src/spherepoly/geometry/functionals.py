"""Facet-sum functionals of a simplicial polytope."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .hull import ORIGIN_TOL, SimplicialPolytope


class DistanceMode(str, enum.Enum):
    MIN_OVER_FACE = "min_over_face"
    AFFINE_HYPERPLANE = "affine_hyperplane"

    @classmethod
    def parse(cls, value) -> "DistanceMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"min": cls.MIN_OVER_FACE, "minoverface": cls.MIN_OVER_FACE,
                   "affine": cls.AFFINE_HYPERPLANE, "affinehyperplane": cls.AFFINE_HYPERPLANE,
                   "hyperplane": cls.AFFINE_HYPERPLANE}
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class TParams:
    a: float
    b: float
    distance_mode: DistanceMode = DistanceMode.MIN_OVER_FACE

    def __post_init__(self):
        if not (self.a >= 0 and self.b >= 0):
            raise ValueError(f"T-functional exponents must be nonnegative, got a={self.a}, b={self.b}")
        object.__setattr__(self, "distance_mode", DistanceMode.parse(self.distance_mode))


def _distances(P: SimplicialPolytope, mode: DistanceMode) -> np.ndarray:
    if mode is DistanceMode.MIN_OVER_FACE:
        return P.min_dists
    return np.abs(P.offsets)


def _terms(P, a, b, mode) -> np.ndarray:
    # np.power gives 0**0 == 1, which makes T_{0,0} the facet count
    d = _distances(P, mode) if a != 0 else np.ones(P.n_facets)
    return np.power(d, a) * np.power(P.volumes, b)


def facet_signs(P: SimplicialPolytope) -> np.ndarray:
    """+1 where the origin is on the polytope side of the facet plane, -1 beyond, 0 on it."""
    h = P.offsets
    return np.where(h > ORIGIN_TOL, 1.0, np.where(h < -ORIGIN_TOL, -1.0, 0.0))


def t_functional(P: SimplicialPolytope, params: TParams) -> float:
    return float(np.sum(_terms(P, params.a, params.b, params.distance_mode)))


def signed_t_functional(P: SimplicialPolytope, params: TParams) -> float:
    return float(np.sum(facet_signs(P) * _terms(P, params.a, params.b, params.distance_mode)))


def lp_surface_area(P: SimplicialPolytope, p: float,
                    mode: DistanceMode = DistanceMode.MIN_OVER_FACE) -> float:
    """S_p = T_{1-p,1}. Any real p is accepted (a = 1-p may be negative here)."""
    a = 1.0 - p
    d = _distances(P, DistanceMode.parse(mode)) if a != 0 else np.ones(P.n_facets)
    return float(np.sum(np.power(d, a) * P.volumes))


def polytope_volume(P: SimplicialPolytope) -> float:
    """Sum of |det(v_i - c)| / n! over facets, c the centroid of the extreme vertices."""
    V = P.vertices
    c = V[P.extreme_indices].mean(axis=0)
    D = V[P.facet_vertices] - c
    return float(np.sum(np.abs(np.linalg.det(D))) / math.factorial(P.dim))


def contains_origin(P: SimplicialPolytope) -> bool:
    return P.contains_origin
