"""Measures of spheres, balls and spherical caps."""

import math

from scipy import special

from .errors import OutOfRange


def log_sphere_measure(k: int) -> float:
    return math.log(2.0) + 0.5 * k * math.log(math.pi) - math.lgamma(0.5 * k)


def log_ball_volume(k: int) -> float:
    return 0.5 * k * math.log(math.pi) - math.lgamma(0.5 * k + 1.0)


def sphere_measure(k: int) -> float:
    """Surface measure of the unit sphere in R^k (k=1 gives 2, the two points +-1)."""
    if k < 1:
        raise OutOfRange(f"k must be >= 1, got {k}")
    return math.exp(log_sphere_measure(k))


def ball_volume(k: int) -> float:
    if k < 1:
        raise OutOfRange(f"k must be >= 1, got {k}")
    return math.exp(log_ball_volume(k))


def _cap_shape(n):
    return 0.5 * (n - 1), 0.5


def cap_surface_area(n: int, h: float) -> float:
    """Measure of {x on S^{n-1} : <x,u> >= h} for h in [0, 1].

    Uses S(h) = (w/2) B((n-1)/2, 1/2) I_{1-h^2}((n-1)/2, 1/2), w the measure
    of the unit sphere in R^{n-1}.
    """
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    if not 0.0 <= h <= 1.0:
        raise OutOfRange(f"cap height h must lie in [0, 1], got {h}")
    p, q = _cap_shape(n)
    half = 0.5 * sphere_measure(n - 1) * special.beta(p, q)
    return half * float(special.betainc(p, q, (1.0 - h) * (1.0 + h)))


def cap_radius_from_area(n: int, S: float) -> float:
    """Radius r = sqrt(1 - h^2) of the cap with measure S (h >= 0)."""
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    p, q = _cap_shape(n)
    half = 0.5 * sphere_measure(n - 1) * special.beta(p, q)
    if not 0.0 <= S <= half * (1.0 + 1e-14):
        raise OutOfRange(f"cap area {S} outside [0, {half}]")
    y = min(S / half, 1.0)
    return math.sqrt(float(special.betaincinv(p, q, y)))


def cap_h_from_area(n: int, S: float) -> float:
    r = cap_radius_from_area(n, S)
    return math.sqrt(max(0.0, (1.0 - r) * (1.0 + r)))
