"""Independent ground truth for the geometry and theory modules.

Nothing here reuses the hull, the facet kernels or the asymptotic formulas,
except where an identity is explicitly being checked against them.

Circle spacing oracle: for N uniform points on the circle, each polygon edge
subtends an angle 2*pi*t where t, a single spacing, has the Beta(1, N-1)
law, and by exchangeability E[T] is N times the expectation for one edge.
A chord subtending 2*pi*t has length 2 sin(pi t).  The foot of the
perpendicular from the centre is the chord midpoint, which always lies on
the chord, so both distance modes give |cos(pi t)|.  The centre is on the
inner side of the edge exactly when t < 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate

from .rng import as_generator
from .sampling import uniform_points
from .spheres import sphere_measure
from .theory import simplex_moment


@dataclass(frozen=True)
class OracleResult:
    value: float
    uncertainty: float
    method: str


def _mean_se(x):
    x = np.asarray(x, dtype=np.float64)
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.inf
    return float(np.mean(x)), se


# circle spacing integral


def circle_expected_t(N: int, a: float, b: float, mode: str = "unsigned") -> OracleResult:
    """Exact E[T_{a,b}] for the convex hull of N uniform points on the unit circle."""
    if N < 3:
        raise ValueError(f"need N >= 3, got {N}")
    if a < 0 or b < 0:
        raise ValueError("a and b must be nonnegative")
    if mode not in ("unsigned", "signed"):
        raise ValueError(f"mode must be 'unsigned' or 'signed', got {mode!r}")
    signed = mode == "signed"
    logc = math.log(N) + math.log(N - 1)

    def integrand(t):
        d = abs(math.cos(math.pi * t))
        val = d**a * (2.0 * math.sin(math.pi * t)) ** b
        if signed and t > 0.5:
            val = -val
        return val * math.exp(logc + (N - 2) * math.log1p(-t))

    pts = sorted({min(k / N, 0.49) for k in (1, 4, 16, 64)} | {0.5})
    edges = [0.0, *pts, 1.0]
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=500)
        total += v
        err += e
    return OracleResult(total, err, "spacing-quadrature")


# simplex moments by brute force


def simplex_volumes(Y: np.ndarray) -> np.ndarray:
    """(k)-volumes of simplices given as (M, k+1, d) vertex arrays, via Gram determinants."""
    E = Y[:, 1:, :] - Y[:, :1, :]
    G = E @ np.swapaxes(E, 1, 2)
    k = E.shape[1]
    return np.sqrt(np.clip(np.linalg.det(G), 0.0, None)) / math.factorial(k)


def mc_simplex_moment(n: int, m: float, n_samples: int, rng, chunk: int = 1 << 16) -> OracleResult:
    """Monte Carlo E[V^m] for n uniform points on the unit sphere of R^{n-1}."""
    if not 2 <= n <= 8:
        raise ValueError(f"n must lie in [2, 8], got {n}")
    rng = as_generator(rng)
    left = n_samples
    vals = []
    while left > 0:
        k = min(left, chunk)
        Y = uniform_points(rng, k * n, n - 1).reshape(k, n, n - 1)
        v = np.power(simplex_volumes(Y), m)
        vals.append(v)
        left -= k
    mean, se = _mean_se(np.concatenate(vals))
    return OracleResult(mean, se, "monte-carlo")


# Blaschke-Petkantschin check (n = 3, g = 1)


@dataclass(frozen=True)
class BPCheck:
    lhs: float
    rhs_analytic: float
    rhs_mc: float
    rhs_mc_se: float


def _orthonormal_complement(u):
    """Rows spanning the orthogonal complement of each row of u (M, n) -> (M, n-1, n)."""
    M, n = u.shape
    out = np.empty((M, n - 1, n))
    for i in range(M):
        q, _ = np.linalg.qr(np.column_stack([u[i], np.eye(n)]), mode="reduced")
        out[i] = q[:, 1:n].T
    return out


def bp_identity_check(n: int, n_samples: int, rng) -> BPCheck:
    """Both sides of the spherical Blaschke-Petkantschin formula with g = 1 in R^3.

    The analytic right side integrates, over h, the product of the circle
    measures (2 pi rho)^3, the mean triangle area rho^2 E[V] and the
    Jacobian (1-h^2)^{-3/2}.  The Monte Carlo right side samples u, h and
    the three circle points directly.
    """
    if n != 3:
        raise ValueError("the Blaschke-Petkantschin check is implemented for n = 3 only")
    rng = as_generator(rng)
    mu = sphere_measure(3)
    ev = simplex_moment(3, 1)

    def inner(h):
        rho = math.sqrt(1.0 - h * h)
        return (2.0 * math.pi * rho) ** 3 * rho**2 * ev * rho**-3

    integral, _ = integrate.quad(inner, 0.0, 1.0, epsabs=0.0, epsrel=1e-13)
    analytic = math.factorial(n - 1) * mu * integral

    chunk = 1 << 16
    vals = []
    left = n_samples
    while left > 0:
        k = min(left, chunk)
        u = uniform_points(rng, k, 3)
        h = rng.random(k)
        rho = np.sqrt((1.0 - h) * (1.0 + h))
        # basis of the plane orthogonal to u: e1 = normalised cross with a fixed axis
        axis = np.where(np.abs(u[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
        e1 = np.cross(u, axis)
        e1 /= np.linalg.norm(e1, axis=1)[:, None]
        e2 = np.cross(u, e1)
        phi = rng.random((k, 3)) * (2.0 * math.pi)
        X = (h[:, None, None] * u[:, None, :]
             + rho[:, None, None] * (np.cos(phi)[..., None] * e1[:, None, :]
                                     + np.sin(phi)[..., None] * e2[:, None, :]))
        area = 0.5 * np.linalg.norm(np.cross(X[:, 1] - X[:, 0], X[:, 2] - X[:, 0]), axis=1)
        w = math.factorial(n - 1) * mu * (2.0 * math.pi * rho) ** 3 * area * rho**-3
        vals.append(w)
        left -= k
    mean, se = _mean_se(np.concatenate(vals))
    return BPCheck(mu**3, analytic, mean, se)


# scaled-sphere moment identity


@dataclass(frozen=True)
class MomentIdentity:
    exact: float
    reconstructed: float
    reconstructed_se: float
    exponent: float


def scaled_sphere_moment_identity(n: int, m: float, h: float, n_samples: int = 10**5,
                                  rng=None) -> MomentIdentity:
    """Integral of vol^m (1-h^2)^{-n/2} over n points of the sphere cut by {<x,u> = h}.

    ``exact`` is (1-h^2)^{(n^2+n(m-3)-m)/2} mu(S^{n-2})^n E[V^m]; the
    reconstruction samples the (n-2)-sphere of radius sqrt(1-h^2) inside R^n
    and measures the simplices there.
    """
    if not 0.0 <= h < 1.0:
        raise ValueError(f"h must lie in [0, 1), got {h}")
    if not 2 <= n <= 8:
        raise ValueError(f"n must lie in [2, 8], got {n}")
    rng = as_generator(rng)
    omega = sphere_measure(n - 1)
    r2 = (1.0 - h) * (1.0 + h)
    expo = 0.5 * (n * n + n * (m - 3) - m)
    exact = r2**expo * omega**n * simplex_moment(n, m)

    rho = math.sqrt(r2)
    u = uniform_points(rng, 1, n)
    basis = _orthonormal_complement(u)[0]
    total_measure = (omega * rho ** (n - 2)) ** n
    chunk = 1 << 15
    vals = []
    left = n_samples
    while left > 0:
        k = min(left, chunk)
        Y = uniform_points(rng, k * n, n - 1).reshape(k, n, n - 1)
        X = h * u[0] + rho * (Y @ basis)
        vals.append(total_measure * np.power(simplex_volumes(X), m) * r2 ** (-0.5 * n))
        left -= k
    mean, se = _mean_se(np.concatenate(vals))
    return MomentIdentity(exact, mean, se, expo)


# min-norm grid search


@lru_cache(maxsize=8)
def _compositions(G: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to G."""
    rows = np.zeros((1, 0), dtype=np.int32)
    total = np.zeros(1, dtype=np.int64)
    for _ in range(parts - 1):
        cnt = G - total + 1
        src = np.repeat(np.arange(len(rows)), cnt)
        val = np.arange(src.size) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        rows = np.column_stack([rows[src], val.astype(np.int32)])
        total = total[src] + val
    return np.column_stack([rows, (G - total).astype(np.int32)])


@lru_cache(maxsize=16)
def _poll_offsets(parts: int, r: int) -> np.ndarray:
    """Integer vectors with entries in [-r, r] summing to zero."""
    axes = np.meshgrid(*[np.arange(-r, r + 1)] * (parts - 1), indexing="ij")
    D = np.stack([a.ravel() for a in axes], axis=1)
    last = -D.sum(axis=1)
    keep = np.abs(last) <= r
    return np.column_stack([D[keep], last[keep]]).astype(np.float64)


def _sq_norms(L, V):
    X = L @ V
    return np.einsum("ij,ij->i", X, X)


def min_norm_oracle(vertices, grid_per_axis: int = 50, poll_radius: int = 2,
                    stop_step: float = 1e-11) -> OracleResult:
    """Smallest norm over barycentric lattices of the simplex.

    A full lattice of resolution ``grid_per_axis`` is searched first.  The
    search then polls the lattice offsets within ``poll_radius`` steps of the
    incumbent, moving on strict improvement and halving the step otherwise.
    The poll set contains every edge direction, so the search cannot stall
    against a face.  Every candidate is a convex combination of the vertices,
    so the value never undercuts the true minimum (up to rounding).
    """
    V = np.asarray(vertices, dtype=np.float64)
    if V.ndim != 2 or not 1 <= len(V) <= 6:
        raise ValueError("min_norm_oracle takes between 1 and 6 vertices")
    if grid_per_axis < 50:
        raise ValueError("grid_per_axis must be >= 50")
    k = len(V)
    if k == 1:
        return OracleResult(float(np.linalg.norm(V[0])), 0.0, "grid")
    diam = max(float(np.linalg.norm(p - q)) for p in V for q in V)
    W = _compositions(grid_per_axis, k)
    best = math.inf
    lam = None
    chunk = 1 << 18
    for s in range(0, len(W), chunk):
        L = W[s:s + chunk] / grid_per_axis
        d = _sq_norms(L, V)
        i = int(np.argmin(d))
        if d[i] < best:
            best, lam = float(d[i]), L[i].copy()
    D = _poll_offsets(k, poll_radius)
    step = 1.0 / grid_per_axis
    while step * diam > stop_step:
        C = lam + step * D
        C = C[np.all(C >= 0.0, axis=1)]
        d = _sq_norms(C, V)
        i = int(np.argmin(d))
        # demand more than rounding noise, or a flat face is walked one step at a time
        if d[i] < best * (1.0 - 1e-14):
            best, lam = float(d[i]), C[i]
        else:
            step *= 0.5
    return OracleResult(math.sqrt(best), step * diam, "grid-pattern-search")


# origin containment for symmetric laws


def wendel_noncontainment(n: int, N: int) -> float:
    """P(origin not in the hull of N i.i.d. uniform points on S^{n-1}).

    Wendel's formula 2^{-(N-1)} sum_{k<n} C(N-1, k), valid for any law that
    is symmetric under x -> -x and puts points in general position.
    """
    if N < 1 or n < 1:
        raise ValueError("need N >= 1 and n >= 1")
    terms = [math.comb(N - 1, k) for k in range(min(n, N))]
    return float(Fraction(sum(terms), 2 ** (N - 1)))
