"""Per-facet measurements: (n-1)-volume and distance from the origin.

Both have a compiled kernel and a vectorised numpy path; which one runs is
decided by the JIT switch in :mod:`spherepoly._jit`.
"""

import math

import numpy as np

from .._jit import USE_NUMBA
from . import _kernels

BARY_TOL = 1e-12


def _facet_volumes_np(P, F):
    n = F.shape[1]
    V = P[F]
    E = V[:, 1:, :] - V[:, :1, :]
    G = E @ np.swapaxes(E, 1, 2)
    det = np.linalg.det(G)
    out = np.full(len(F), -1.0)
    ok = det > 0
    out[ok] = np.sqrt(det[ok]) / math.factorial(n - 1)
    return out


def _facet_min_dists_np(P, F):
    V = P[F]
    v0 = V[:, 0, :]
    E = V[:, 1:, :] - v0[:, None, :]
    G = E @ np.swapaxes(E, 1, 2)
    rhs = -np.einsum("fkn,fn->fk", E, v0)
    y = np.linalg.solve(G, rhs[..., None])[..., 0]
    lam0 = 1.0 - y.sum(axis=1)
    x = v0 + np.einsum("fk,fkn->fn", y, E)
    out = np.linalg.norm(x, axis=1)
    outside = (y < -BARY_TOL).any(axis=1) | (lam0 < -BARY_TOL)
    for f in np.flatnonzero(outside):
        out[f] = _kernels.simplex_min_norm(V[f], BARY_TOL)
    return out


def facet_volumes(P, F):
    """Volumes of the simplices P[F[i]]; -1 marks a degenerate facet."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    F = np.ascontiguousarray(F, dtype=np.int64)
    if len(F) == 0:
        return np.zeros(0)
    if USE_NUMBA:
        return _kernels.facet_volumes(P, F)
    return _facet_volumes_np(P, F)


def facet_min_dists(P, F):
    """min ||x|| over each simplex P[F[i]], by exact face enumeration."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    F = np.ascontiguousarray(F, dtype=np.int64)
    if len(F) == 0:
        return np.zeros(0)
    if USE_NUMBA:
        return _kernels.facet_min_dists(P, F)
    return _facet_min_dists_np(P, F)


def simplex_min_norm(vertices):
    V = np.ascontiguousarray(vertices, dtype=np.float64)
    return float(_kernels.simplex_min_norm(V, BARY_TOL))
