"""Convex hulls of points on the unit sphere and the simplicial polytope type."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import DegenerateFacet, DegenerateInput, DimensionOutOfRange, SpherePolyError
from . import _kernels
from ._exact import exact_side
from .facets import facet_min_dists, facet_volumes, simplex_min_norm

MIN_DIM = 2
MAX_DIM = 10
ORIGIN_TOL = 1e-12


class HullFailure(SpherePolyError, RuntimeError):
    """The incremental construction produced an inconsistent facet graph."""


@dataclass(frozen=True)
class UnitVector:
    """A point of the unit sphere; the constructor normalises ``coords``."""

    coords: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.coords, dtype=np.float64).reshape(-1)
        if x.size < MIN_DIM:
            raise DimensionOutOfRange(f"dimension must be >= {MIN_DIM}, got {x.size}")
        nrm = np.linalg.norm(x)
        if not np.isfinite(nrm) or nrm == 0.0:
            raise ValueError("cannot normalise a zero or non-finite vector")
        x = x / nrm
        x.setflags(write=False)
        object.__setattr__(self, "coords", x)

    @property
    def dim(self):
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def as_points(points) -> np.ndarray:
    """Stack points (arrays or UnitVectors) into a float (N, n) array."""
    if isinstance(points, np.ndarray):
        return np.ascontiguousarray(points, dtype=np.float64)
    return np.ascontiguousarray([np.asarray(p, dtype=np.float64) for p in points])


@dataclass(frozen=True)
class Facet:
    vertex_indices: tuple
    outward_normal: np.ndarray
    offset: float
    volume: float
    min_dist: float


class SimplicialPolytope:
    """Convex hull with simplicial facets, stored as parallel arrays.

    ``facet_vertices[i]`` indexes rows of ``vertices`` (the hull input, so
    non-extreme input points simply never appear in a facet).
    ``neighbors[i, k]`` is the facet across the ridge opposite
    ``facet_vertices[i, k]``.
    """

    def __init__(self, vertices, facet_vertices, normals, offsets, neighbors, interior_point):
        self.vertices = vertices
        self.facet_vertices = facet_vertices
        self.normals = normals
        self.offsets = offsets
        self.neighbors = neighbors
        self.interior_point = interior_point
        self.volumes = facet_volumes(vertices, facet_vertices)
        if len(self.volumes) and self.volumes.min() < 0:
            raise DegenerateFacet("hull produced a facet with vanishing volume")

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_facets(self) -> int:
        return len(self.facet_vertices)

    @cached_property
    def extreme_indices(self) -> np.ndarray:
        return np.unique(self.facet_vertices)

    @property
    def n_vertices(self) -> int:
        return len(self.extreme_indices)

    @cached_property
    def min_dists(self) -> np.ndarray:
        # the distance to the hyperplane is a lower bound; clamping removes last-bit
        # disagreement when the projection of the origin lies inside the facet
        return np.maximum(facet_min_dists(self.vertices, self.facet_vertices), np.abs(self.offsets))

    @property
    def contains_origin(self) -> bool:
        return bool(np.all(self.offsets > ORIGIN_TOL))

    @property
    def facets(self) -> list:
        return [
            Facet(tuple(int(i) for i in fv), u, float(h), float(v), float(d))
            for fv, u, h, v, d in zip(
                self.facet_vertices, self.normals, self.offsets, self.volumes, self.min_dists
            )
        ]

    def ridges_closed(self) -> bool:
        """Every ridge is shared by exactly two facets (checked combinatorially)."""
        counts = {}
        n = self.dim
        for fv in self.facet_vertices:
            s = sorted(int(i) for i in fv)
            for k in range(n):
                r = tuple(s[:k] + s[k + 1:])
                counts[r] = counts.get(r, 0) + 1
        return all(c == 2 for c in counts.values())

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "vertices": self.vertices.tolist(),
            "facets": [
                {"idx": [int(i) for i in fv], "h": float(h), "vol": float(v), "dmin": float(d)}
                for fv, h, v, d in zip(
                    self.facet_vertices, self.offsets, self.volumes, self.min_dists
                )
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def __repr__(self):
        return f"SimplicialPolytope(dim={self.dim}, vertices={self.n_vertices}, facets={self.n_facets})"


def _check_dim(n):
    if not MIN_DIM <= n <= MAX_DIM:
        raise DimensionOutOfRange(f"dimension {n} outside [{MIN_DIM}, {MAX_DIM}]")


def convex_hull(points, n: int | None = None, tol: float = 1e-10) -> SimplicialPolytope:
    """Beneath-beyond hull of ``points`` (rows) in R^n.

    Orientation tests within ``tol`` of zero are decided with exact rational
    arithmetic; the kernel reports each unresolved tie, which is resolved here
    and added to the cache before the construction is restarted.
    """
    P = as_points(points)
    if P.ndim != 2:
        raise ValueError("points must be a 2-D array of shape (N, n)")
    if n is None:
        n = P.shape[1]
    _check_dim(n)
    if P.shape[1] != n:
        raise DimensionOutOfRange(f"points have dimension {P.shape[1]}, expected {n}")
    if len(P) < n + 1:
        raise DegenerateInput(f"need at least {n + 1} points in dimension {n}, got {len(P)}")
    if not np.all(np.isfinite(P)):
        raise ValueError("points must be finite")

    tie_keys = np.zeros((0, n + 1), dtype=np.int64)
    tie_signs = np.zeros(0, dtype=np.int64)
    while True:
        status, fv, normals, offsets, nbrs, c, key = _kernels.hull_kernel(P, tol, tie_keys, tie_signs)
        if status != _kernels.HULL_TIE:
            break
        key = key.copy()
        sign = exact_side(P[key[:n]], P[key[n]], c)
        tie_keys = np.vstack([tie_keys, key[None, :]])
        tie_signs = np.append(tie_signs, sign)
    if status == _kernels.HULL_DEGENERATE:
        raise DegenerateInput("points are affinely dependent within tolerance")
    if status == _kernels.HULL_TOPOLOGY:
        raise HullFailure("facet adjacency could not be closed")
    return SimplicialPolytope(P, fv, normals, offsets, nbrs, c)


def facet_geometry(vertices, interior_point=None) -> Facet:
    """Normal, offset, volume and min-norm distance of one simplex.

    The normal points away from ``interior_point`` (default: the origin, in
    which case the offset is nonnegative).
    """
    V = as_points(vertices)
    m, n = V.shape
    if m != n:
        raise DegenerateFacet(f"a facet in R^{n} needs {n} vertices, got {m}")
    E = V[1:] - V[0]
    G = E @ E.T
    det = np.linalg.det(G) if n > 1 else 1.0
    scale = max(1.0, float(np.max(np.abs(G)))) ** (n - 1)
    if not det > 1e-14 * scale:
        raise DegenerateFacet("facet vertices are affinely dependent")
    volume = math.sqrt(det) / math.factorial(n - 1)
    # normal: the direction orthogonal to every edge
    _, _, vt = np.linalg.svd(E, full_matrices=True)
    u = vt[-1]
    h = float(np.mean(V @ u))
    ref = np.zeros(n) if interior_point is None else np.asarray(interior_point, dtype=np.float64)
    side = float(u @ ref) - h
    if side > 0 or (side == 0 and h < 0):
        u, h = -u, -h
    return Facet(tuple(range(n)), u, h, volume, max(simplex_min_norm(V), abs(h)))
