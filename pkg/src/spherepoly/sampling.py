"""Positive densities on the unit sphere, rejection sampling and spherical Monte Carlo.

A density is a :class:`DensitySpec` subclass (``Uniform``, ``ExpTilt``,
``LinearTilt``, ``Mixture``) normalised against the surface measure.  All of
them sample by rejection from the uniform proposal, which keeps one code path
correct for arbitrary mixtures.
"""

from __future__ import annotations

import json
import math
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import NonPositiveDensity, OutOfRange, RejectionStall, SpherePolyError
from .rng import as_generator
from .spheres import cap_surface_area, log_sphere_measure, sphere_measure

NORMALIZATION_TOL = 1e-8
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 2000
MAX_CONSECUTIVE_REJECTIONS = 10**6
_CHUNK = 1 << 17


def _unit(theta, n) -> np.ndarray:
    v = np.asarray(theta, dtype=np.float64).reshape(-1)
    if v.size != n:
        raise ValueError(f"theta has dimension {v.size}, density has dimension {n}")
    nrm = np.linalg.norm(v)
    if not np.isfinite(nrm) or nrm == 0.0:
        raise ValueError("theta must be a nonzero finite vector")
    v = v / nrm
    v.setflags(write=False)
    return v


def _check_dim(n):
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n}")
    return int(n)


def _angular_mass(n, g) -> float:
    """Integral over the sphere of g(<x,theta>), computed in the polar angle."""
    w = sphere_measure(n - 1)
    val, _ = integrate.quad(lambda phi: g(math.cos(phi)) * math.sin(phi) ** (n - 2), 0.0, math.pi,
                            epsabs=0.0, epsrel=1e-11, limit=QUAD_LIMIT)
    return w * val


class DensitySpec(ABC):
    family: str = ""
    dim: int
    Z: float
    sup_f: float
    inf_f: float

    @abstractmethod
    def pdf(self, X) -> np.ndarray:
        """Density at the rows of X (unit vectors)."""

    @abstractmethod
    def to_config(self) -> dict:
        ...

    @property
    def is_uniform(self) -> bool:
        return False

    @property
    def acceptance_rate(self) -> float:
        return 1.0 / (self.sup_f * sphere_measure(self.dim))

    def __call__(self, x) -> float:
        return float(self.pdf(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.to_config())}, dim={self.dim})"

    def _verify_normalization(self, mass):
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise SpherePolyError(f"{self.family} density integrates to {mass!r}, not 1")


class Uniform(DensitySpec):
    family = "uniform"

    def __init__(self, dim: int):
        self.dim = _check_dim(dim)
        self.Z = sphere_measure(self.dim)
        self.sup_f = self.inf_f = math.exp(-log_sphere_measure(self.dim))

    @property
    def is_uniform(self):
        return True

    def pdf(self, X):
        X = np.atleast_2d(X)
        return np.full(len(X), self.sup_f)

    def to_config(self):
        return {"family": self.family}


class ExpTilt(DensitySpec):
    """f(x) proportional to exp(kappa <x, theta>)."""

    family = "exp_tilt"

    def __init__(self, dim: int, kappa: float, theta):
        self.dim = n = _check_dim(dim)
        if not (math.isfinite(kappa) and kappa >= 0):
            raise NonPositiveDensity(f"kappa must be finite and >= 0, got {kappa}")
        self.kappa = float(kappa)
        self.theta = _unit(theta, n)
        # scaled normaliser Zs = Z exp(-kappa); the (1-t^2)^((n-3)/2) factor is the quad weight
        e = 0.5 * (n - 3)
        val, _ = integrate.quad(lambda t: math.exp(self.kappa * (t - 1.0)), -1.0, 1.0,
                                weight="alg", wvar=(e, e), epsabs=0.0, epsrel=QUAD_EPSREL,
                                limit=QUAD_LIMIT)
        self._log_zs = log_sphere_measure(n - 1) + math.log(val)
        self.Z = math.exp(self.kappa + self._log_zs)
        self.sup_f = math.exp(-self._log_zs)
        self.inf_f = math.exp(-2.0 * self.kappa - self._log_zs)
        self._verify_normalization(_angular_mass(
            n, lambda t: math.exp(self.kappa * (t - 1.0) - self._log_zs)))

    def pdf(self, X):
        t = np.atleast_2d(X) @ self.theta
        return np.exp(self.kappa * (t - 1.0) - self._log_zs)

    def to_config(self):
        return {"family": self.family, "kappa": self.kappa, "theta": self.theta.tolist()}


class LinearTilt(DensitySpec):
    """f(x) = (1 + eps <x, theta>) / mu(S^{n-1})."""

    family = "linear_tilt"

    def __init__(self, dim: int, eps: float, theta):
        self.dim = n = _check_dim(dim)
        if not (math.isfinite(eps) and abs(eps) < 1.0):
            raise NonPositiveDensity(f"linear tilt needs |eps| < 1, got {eps}")
        self.eps = float(eps)
        self.theta = _unit(theta, n)
        self.Z = sphere_measure(n)
        self.sup_f = (1.0 + abs(self.eps)) / self.Z
        self.inf_f = (1.0 - abs(self.eps)) / self.Z
        self._verify_normalization(_angular_mass(n, lambda t: (1.0 + self.eps * t) / self.Z))

    def pdf(self, X):
        t = np.atleast_2d(X) @ self.theta
        return (1.0 + self.eps * t) / self.Z

    def to_config(self):
        return {"family": self.family, "eps": self.eps, "theta": self.theta.tolist()}


class Mixture(DensitySpec):
    family = "mixture"

    def __init__(self, components):
        comps = [(float(w), d) for w, d in components]
        if not comps:
            raise ValueError("a mixture needs at least one component")
        dims = {d.dim for _, d in comps}
        if len(dims) != 1:
            raise ValueError(f"mixture components disagree on dimension: {sorted(dims)}")
        if any(not (w > 0) for w, _ in comps):
            raise NonPositiveDensity("mixture weights must be positive")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")
        self.components = tuple(comps)
        self.dim = dims.pop()
        self.Z = 1.0
        self.sup_f = math.fsum(w * d.sup_f for w, d in comps)
        self.inf_f = math.fsum(w * d.inf_f for w, d in comps)

    def pdf(self, X):
        X = np.atleast_2d(X)
        out = np.zeros(len(X))
        for w, d in self.components:
            out += w * d.pdf(X)
        return out

    def to_config(self):
        return {"family": self.family,
                "components": [{"weight": w, "density": d.to_config()} for w, d in self.components]}


def density_from_config(config, dim: int) -> DensitySpec:
    """Build a density from the config grammar.

    ``config`` is a dict, a JSON string, a path to a JSON file, or a bare
    family name ("uniform").  Examples::

        {"family": "exp_tilt", "kappa": 2.0, "theta": [0, 0, 1]}
        {"family": "linear_tilt", "eps": 0.5, "theta": [0, 0, 1]}
        {"family": "mixture", "components": [{"weight": 0.5, "density": {...}}, ...]}

    A missing theta defaults to the last coordinate axis.
    """
    if isinstance(config, DensitySpec):
        if config.dim != dim:
            raise ValueError(f"density has dimension {config.dim}, expected {dim}")
        return config
    if isinstance(config, str):
        s = config.strip()
        if s.startswith("{"):
            config = json.loads(s)
        elif os.path.isfile(s):
            with open(s, encoding="utf-8") as fh:
                config = json.load(fh)
        else:
            config = {"family": s}
    if not isinstance(config, dict):
        raise ValueError(f"cannot parse density config {config!r}")
    family = str(config.get("family", "")).lower().replace("-", "_")
    default_theta = np.eye(dim)[-1]
    if family == "uniform":
        return Uniform(dim)
    if family in ("exp_tilt", "exptilt"):
        return ExpTilt(dim, float(config["kappa"]), config.get("theta", default_theta))
    if family in ("linear_tilt", "lineartilt"):
        return LinearTilt(dim, float(config["eps"]), config.get("theta", default_theta))
    if family == "mixture":
        comps = [(c["weight"], density_from_config(c["density"], dim)) for c in config["components"]]
        return Mixture(comps)
    raise ValueError(f"unknown density family {config.get('family')!r}")


def density_eval(spec: DensitySpec, x) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != spec.dim:
        raise ValueError(f"point has dimension {x.size}, density has dimension {spec.dim}")
    if abs(np.linalg.norm(x) - 1.0) > 1e-9:
        raise ValueError("point is not on the unit sphere")
    return spec(x)


def uniform_points(rng, m: int, n: int) -> np.ndarray:
    X = rng.standard_normal((m, n))
    X /= np.linalg.norm(X, axis=1)[:, None]
    return X


def sample_density(spec: DensitySpec, rng, size: int | None = None) -> np.ndarray:
    """Draw ``size`` points (rows) from ``spec``; a single vector when size is None."""
    rng = as_generator(rng)
    m = 1 if size is None else int(size)
    if spec.is_uniform:
        X = uniform_points(rng, m, spec.dim)
    else:
        X = _rejection(spec, rng, m)
    return X[0] if size is None else X


def _rejection(spec, rng, m):
    n = spec.dim
    out = np.empty((m, n))
    acc = spec.acceptance_rate
    filled = 0
    run = 0
    while filled < m:
        # batch size is a function of (spec, remaining) only, so streams stay reproducible
        batch = int(min(max((m - filled) / acc * 1.1 + 16, 64), 1 << 18))
        X = uniform_points(rng, batch, n)
        ratio = spec.pdf(X) / spec.sup_f
        if ratio.max() > 1.0 + 1e-9:
            raise SpherePolyError(f"density exceeds its sup bound by factor {ratio.max()!r}")
        keep = rng.random(batch) < ratio
        idx = np.flatnonzero(keep)
        if idx.size == 0:
            run += batch
            if run >= MAX_CONSECUTIVE_REJECTIONS:
                raise RejectionStall(f"{run} consecutive rejections; sup_f is likely wrong")
            continue
        gaps = np.diff(idx, prepend=-1) - 1
        gaps[0] += run
        if gaps.max() >= MAX_CONSECUTIVE_REJECTIONS:
            raise RejectionStall(f"{gaps.max()} consecutive rejections; sup_f is likely wrong")
        run = batch - 1 - idx[-1]
        take = min(idx.size, m - filled)
        out[filled:filled + take] = X[idx[:take]]
        filled += take
    return out


@dataclass(frozen=True)
class SphereIntegralEstimate:
    value: float
    std_error: float
    n_samples: int
    alpha: float

    def __post_init__(self):
        for k in ("value", "std_error", "alpha"):
            object.__setattr__(self, k, float(getattr(self, k)))
        object.__setattr__(self, "n_samples", int(self.n_samples))


class _Running:
    """Chan's pairwise mean/variance merge over chunks."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, x):
        k = x.size
        if k == 0:
            return
        mu = float(np.mean(x))
        m2 = float(np.sum((x - mu) ** 2))
        tot = self.n + k
        d = mu - self.mean
        self.mean += d * k / tot
        self.m2 += m2 + d * d * self.n * k / tot
        self.n = tot

    @property
    def se(self):
        return math.sqrt(self.m2 / (self.n - 1) / self.n) if self.n > 1 else math.inf


def _mc_mean(rng, n_samples, draw, g):
    acc = _Running()
    left = n_samples
    while left > 0:
        k = min(left, _CHUNK)
        acc.add(g(draw(k)))
        left -= k
    return acc


def sphere_integral(spec: DensitySpec, alpha: float, n_samples: int = 10**5,
                    rng=None) -> SphereIntegralEstimate:
    """Integral of f^alpha over the sphere; exact for the uniform density."""
    if n_samples < 1000:
        raise ValueError("sphere_integral needs at least 1000 samples")
    if spec.is_uniform:
        return SphereIntegralEstimate(math.exp((1.0 - alpha) * log_sphere_measure(spec.dim)),
                                      0.0, n_samples, alpha)
    mu = sphere_measure(spec.dim)
    rng = as_generator(rng)
    acc = _mc_mean(rng, n_samples, lambda k: uniform_points(rng, k, spec.dim),
                   lambda X: spec.pdf(X) ** alpha)
    return SphereIntegralEstimate(mu * acc.mean, mu * acc.se, n_samples, alpha)


def sample_cap_uniform(rng, m: int, u, h: float) -> np.ndarray:
    """Uniform points on the cap {x : <x,u> >= h}, 0 <= h <= 1."""
    u = np.asarray(u, dtype=np.float64)
    n = u.size
    p = 0.5 * (n - 1)
    top = special.betainc(p, 0.5, (1.0 - h) * (1.0 + h))
    r2 = special.betaincinv(p, 0.5, rng.random(m) * top)
    r = np.sqrt(r2)
    t = np.sqrt(np.maximum(0.0, 1.0 - r2))
    W = rng.standard_normal((m, n))
    W -= np.outer(W @ u, u)
    W /= np.linalg.norm(W, axis=1)[:, None]
    return t[:, None] * u + r[:, None] * W


def weighted_cap_measure(spec: DensitySpec, u, z: float, n_samples: int = 10**5,
                         rng=None) -> SphereIntegralEstimate:
    """f-measure of the cap {x : <x,u> >= 1 - z}.

    Non-uniform densities are integrated by sampling uniformly inside the cap
    and multiplying by its exact area, which keeps the relative error flat as
    the cap shrinks.
    """
    if not 0.0 <= z <= 1.0:
        raise OutOfRange(f"cap height z must lie in [0, 1], got {z}")
    n = spec.dim
    u = _unit(u, n)
    if z == 0.0:
        return SphereIntegralEstimate(0.0, 0.0, n_samples, 1.0)
    if spec.is_uniform:
        if n == 3:
            return SphereIntegralEstimate(0.5 * z, 0.0, n_samples, 1.0)
        return SphereIntegralEstimate(cap_surface_area(n, 1.0 - z) * spec.sup_f, 0.0, n_samples, 1.0)
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    rng = as_generator(rng)
    area = cap_surface_area(n, 1.0 - z)
    acc = _mc_mean(rng, n_samples, lambda k: sample_cap_uniform(rng, k, u, 1.0 - z), spec.pdf)
    return SphereIntegralEstimate(area * acc.mean, area * acc.se, n_samples, 1.0)
