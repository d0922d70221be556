"""Closed-form constants for expected T-functionals of random inscribed polytopes.

Everything gamma-valued is evaluated in log space.  Integrals of powers of a
non-uniform density come from :func:`spherepoly.sampling.sphere_integral`, so
those constants carry a Monte Carlo standard error; for the uniform density
they are exact and the error is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange
from .rng import stream
from .sampling import DensitySpec, Uniform, density_eval, sphere_integral, weighted_cap_measure
from .spheres import (
    ball_volume,
    cap_h_from_area,
    cap_radius_from_area,
    cap_surface_area,
    log_ball_volume,
    sphere_measure,
)

DEFAULT_C_ABS = 2.0
DEFAULT_CONTAINMENT_C = 0.1
DEFAULT_QUAD_SAMPLES = 10**6
THEORY_SEED = 0

__all__ = [
    "Quantity", "TheoryConstants", "CapGeom", "BestApproxBound", "RadiusSandwich", "ZSandwich",
    "sphere_measure", "ball_volume", "cap_surface_area", "cap_h_from_area", "cap_radius_from_area",
    "cap_geom", "simplex_moment", "leading_coeff", "c1", "c2", "theory_constants",
    "expected_t_asymptotic", "lp_deficit_constant", "holder_gap", "best_approx_upper",
    "radius_sandwich_check", "z_sandwich_check",
]


@dataclass(frozen=True)
class Quantity:
    """A value with a one-sigma uncertainty (zero when exact)."""

    value: float
    std_error: float = 0.0

    def __float__(self):
        return self.value


def _density_integral(density, alpha, n_samples, rng, tag):
    if rng is None:
        rng = stream(THEORY_SEED, tag, density.dim)
    est = sphere_integral(density, alpha, n_samples, rng)
    return est.value, est.std_error


def _resolve_density(n, density):
    if density is None:
        return Uniform(n)
    if density.dim != n:
        raise ValueError(f"density has dimension {density.dim}, expected {n}")
    return density


def simplex_moment(n: int, m: float) -> float:
    """E[V^m] for the (n-1)-simplex spanned by n uniform points on S^{n-2}.

    The gamma-product formula has a removable 0/0 at (n, m) = (2, 0) whose
    limit is 1/2 (the atom V = 0 is dropped); the zeroth moment is 1 by
    definition, so that point is special-cased.
    """
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    if m < 0:
        raise OutOfRange(f"moment order must be >= 0, got {m}")
    if m == 0:
        return 1.0
    lg = math.lgamma
    out = -m * lg(n)
    out += lg(0.5 * n * (n + m - 3) + 1.0) - lg(0.5 * n * (n - 3) + 0.5 * m * (n - 1) + 1.0)
    out += n * (lg(0.5 * (n - 1)) - lg(0.5 * (n - 1 + m)))
    for i in range(1, n):
        out += lg(0.5 * (i + m)) - lg(0.5 * i)
    return math.exp(out)


def leading_coeff(n: int, b: float) -> float:
    """(n-1)^{n-1} E[V^{b+1}] / (n vol(B_{n-1})^{b-1})."""
    log = (n - 1) * math.log(n - 1) + math.log(simplex_moment(n, b + 1.0)) - math.log(n)
    return math.exp(log - (b - 1.0) * log_ball_volume(n - 1))


def c1(n: int, b: float, density: DensitySpec | None = None,
       n_samples: int = DEFAULT_QUAD_SAMPLES, rng=None) -> Quantity:
    density = _resolve_density(n, density)
    i, se = _density_integral(density, 1.0 - b, n_samples, rng, "c1")
    g = math.exp(math.lgamma(n + b - 1.0))
    return Quantity(g * i, g * se)


def _c2_prefactor(n, a, b):
    e = 2.0 / (n - 1)
    return 0.5 * (a + (n - 1) * (n + b - 2) / (n + 1)) * math.exp(
        math.lgamma(n + b - 1.0 + e) - e * log_ball_volume(n - 1))


def c2(n: int, a: float, b: float, density: DensitySpec | None = None,
       n_samples: int = DEFAULT_QUAD_SAMPLES, rng=None) -> Quantity:
    density = _resolve_density(n, density)
    i, se = _density_integral(density, 1.0 - b - 2.0 / (n - 1), n_samples, rng, "c2")
    k = _c2_prefactor(n, a, b)
    return Quantity(k * i, k * se)


@dataclass(frozen=True)
class TheoryConstants:
    n: int
    a: float
    b: float
    density: dict
    c1: float
    c1_se: float
    c2: float
    c2_se: float
    leading_coeff: float

    def predicted_one_term(self, N) -> np.ndarray | float:
        N = np.asarray(N, dtype=np.float64)
        out = self.leading_coeff * N ** (-(self.b - 1.0)) * self.c1
        return float(out) if out.ndim == 0 else out

    def predicted(self, N) -> np.ndarray | float:
        """Two-term prediction leading * N^{-(b-1)} * (c1 - c2 N^{-2/(n-1)})."""
        N = np.asarray(N, dtype=np.float64)
        e = 2.0 / (self.n - 1)
        out = self.leading_coeff * N ** (-(self.b - 1.0)) * (self.c1 - self.c2 * N ** (-e))
        return float(out) if out.ndim == 0 else out

    def predicted_se(self, N) -> np.ndarray | float:
        N = np.asarray(N, dtype=np.float64)
        e = 2.0 / (self.n - 1)
        # the two integrals are estimated from independent streams
        out = self.leading_coeff * N ** (-(self.b - 1.0)) * np.hypot(self.c1_se, self.c2_se * N ** (-e))
        return float(out) if out.ndim == 0 else out

    def to_dict(self, N_values=()) -> dict:
        return {
            "n": self.n, "a": self.a, "b": self.b, "density": self.density,
            "c1": self.c1, "c1_se": self.c1_se, "c2": self.c2, "c2_se": self.c2_se,
            "leading_coeff": self.leading_coeff,
            "predicted": [{"N": int(N), "value": self.predicted(N)} for N in N_values],
        }


def theory_constants(n: int, a: float, b: float, density: DensitySpec | None = None,
                     n_samples: int = DEFAULT_QUAD_SAMPLES, rng=None) -> TheoryConstants:
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    if a < 0 or b < 0:
        raise ValueError("a and b must be nonnegative")
    density = _resolve_density(n, density)
    if rng is None:
        r1 = r2 = None
    else:
        r1, r2 = rng.spawn(2)
    q1 = c1(n, b, density, n_samples, r1)
    q2 = c2(n, a, b, density, n_samples, r2)
    return TheoryConstants(n, float(a), float(b), density.to_config(), q1.value, q1.std_error,
                           q2.value, q2.std_error, leading_coeff(n, b))


def expected_t_asymptotic(n: int, N: int, a: float, b: float, density: DensitySpec | None = None,
                          n_samples: int = DEFAULT_QUAD_SAMPLES, rng=None):
    """(TheoryConstants, two-term prediction of E[T_{a,b}] at N points)."""
    if N < n + 1:
        raise OutOfRange(f"need N >= n+1 = {n + 1}, got {N}")
    k = theory_constants(n, a, b, density, n_samples, rng)
    return k, k.predicted(N)


def lp_deficit_constant(n: int, p: float, density: DensitySpec | None = None,
                        n_samples: int = DEFAULT_QUAD_SAMPLES, rng=None) -> Quantity:
    """Limit of N^{2/(n-1)} E[mu(S^{n-1}) - S_p(Q_N)]."""
    if p > 1:
        raise OutOfRange(f"p must be <= 1, got {p}")
    density = _resolve_density(n, density)
    e = 2.0 / (n - 1)
    i, se = _density_integral(density, -e, n_samples, rng, "lp_deficit")
    k = 0.5 * (1.0 - p + (n - 1) ** 2 / (n + 1)) * math.exp(
        math.lgamma(n + e) - math.lgamma(n) - e * log_ball_volume(n - 1))
    return Quantity(k * i, k * se)


def holder_gap(n: int, p: float, density: DensitySpec | None = None,
               n_samples: int = DEFAULT_QUAD_SAMPLES, rng=None) -> Quantity:
    """Deficit constant of ``density`` minus that of the uniform density (nonnegative)."""
    q = lp_deficit_constant(n, p, density, n_samples, rng)
    u = lp_deficit_constant(n, p, Uniform(n))
    return Quantity(q.value - u.value, q.std_error)


@dataclass(frozen=True)
class BestApproxBound:
    main_term: float
    exact_constant: float
    implied_C: float


def best_approx_upper(n: int, p: float) -> BestApproxBound:
    """Main term (n-p) mu(S^{n-1}) / 2 next to the exact uniform deficit constant.

    ``implied_C`` solves exact = main * (1 + C ln(n) / n).
    """
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"p must lie in [0, 1], got {p}")
    main = 0.5 * (n - p) * sphere_measure(n)
    exact = lp_deficit_constant(n, p, Uniform(n)).value
    return BestApproxBound(main, exact, (exact / main - 1.0) * n / math.log(n))


@dataclass(frozen=True)
class CapGeom:
    n: int
    h: float
    z: float
    r: float
    S: float


def cap_geom(n: int, h: float) -> CapGeom:
    return CapGeom(n, h, 1.0 - h, math.sqrt((1.0 - h) * (1.0 + h)), cap_surface_area(n, h))


@dataclass(frozen=True)
class RadiusSandwich:
    lower: float
    r_exact: float
    upper: float

    @property
    def holds(self) -> bool:
        return self.lower <= self.r_exact <= self.upper


def radius_sandwich_check(n: int, S: float, C_abs: float = DEFAULT_C_ABS) -> RadiusSandwich:
    """Bounds g - g^3/(2(n+1)) -+ C (n-1) g^5 on the radius of a cap of area S,
    where g = (S / vol(B_{n-1}))^{1/(n-1)}."""
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    if C_abs <= 0:
        raise ValueError("C_abs must be positive")
    if S < 0:
        raise OutOfRange(f"cap area must be nonnegative, got {S}")
    g = (S / ball_volume(n - 1)) ** (1.0 / (n - 1))
    if g > 0.5 * (1.0 + 1e-12):
        raise OutOfRange(f"cap too large: g = {g} > 0.5")
    mid = g - g**3 / (2.0 * (n + 1))
    slack = C_abs * (n - 1) * g**5
    return RadiusSandwich(mid - slack, cap_radius_from_area(n, S), mid + slack)


@dataclass(frozen=True)
class ZSandwich:
    lower: float
    z: float
    upper: float
    lower_se: float = 0.0
    upper_se: float = 0.0
    s: float = 0.0
    s_se: float = 0.0

    def holds(self, k_sigma: float = 3.0) -> bool:
        return (self.lower - k_sigma * self.lower_se <= self.z
                <= self.upper + k_sigma * self.upper_se)


def z_sandwich_check(n: int, density: DensitySpec | None, u, z: float, delta: float,
                     n_samples: int = 10**5, rng=None) -> ZSandwich:
    """Height-from-weighted-area bounds for the cap {<x,u> >= 1-z}.

    lower = (1+d)^{-2(n+1)/(n-1)} s^{2/(n-1)} / (2 (f(u) vol(B_{n-1}))^{2/(n-1)}),
    upper uses the factor (1+d)^{2n/(n-1)}; s is the f-measure of the cap.
    """
    density = _resolve_density(n, density)
    if not 0.0 <= z <= 1.0:
        raise OutOfRange(f"z must lie in [0, 1], got {z}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if z == 0.0:
        return ZSandwich(0.0, 0.0, 0.0)
    if rng is None:
        rng = stream(THEORY_SEED, "z_sandwich", n)
    u = np.asarray(u, dtype=np.float64)
    u = u / np.linalg.norm(u)
    est = weighted_cap_measure(density, u, z, n_samples, rng)
    e = 2.0 / (n - 1)
    base = est.value**e / (2.0 * (density_eval(density, u) * ball_volume(n - 1)) ** e)
    base_se = base * e * est.std_error / est.value if est.value > 0 else 0.0
    lo_f = (1.0 + delta) ** (-2.0 * (n + 1) / (n - 1))
    hi_f = (1.0 + delta) ** (2.0 * n / (n - 1))
    return ZSandwich(lo_f * base, z, hi_f * base, lo_f * base_se, hi_f * base_se,
                     est.value, est.std_error)
