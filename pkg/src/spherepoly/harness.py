"""Replicated Monte Carlo experiments on random inscribed polytopes.

Replicate ``r`` at point count ``N`` always draws its points from the stream
keyed by (master_seed, "points", N, r, attempt), so a report does not depend
on how replicates are spread over workers.  ``attempt`` only moves past 0
when a sample is rejected by the hull as degenerate.
"""

from __future__ import annotations

import enum
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import __version__
from ._io import csv_text, write_json
from ._jit import backend
from .errors import DegenerateFacet, DegenerateInput, InsufficientPrecision, TooManyDegenerate
from .geometry import (
    DistanceMode,
    HullFailure,
    TParams,
    convex_hull,
    lp_surface_area,
    polytope_volume,
    signed_t_functional,
    t_functional,
)
from .rng import stream
from .sampling import DensitySpec, density_from_config, sample_density
from .spheres import sphere_measure
from .theory import TheoryConstants

MAX_DEGENERATE_FRACTION = 1e-3
MAX_ATTEMPTS = 32
FIT_MAX_REL_SE = 0.05
FIT_MIN_POINTS = 4


class Mode(str, enum.Enum):
    TFUNC = "tfunc"
    LP_DEFICIT = "lp_deficit"
    CONTAINMENT = "containment"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        return {"t": cls.TFUNC, "estimate": cls.TFUNC, "deficit": cls.LP_DEFICIT,
                "lpdeficit": cls.LP_DEFICIT}.get(key) or cls(key)


def geometric_grid(lo: int, hi: int, factor: float = 2.0) -> list:
    if lo < 1 or hi < lo or factor <= 1:
        raise ValueError(f"bad geometric grid {lo}:{hi} (factor {factor})")
    out = []
    x = float(lo)
    while x <= hi * (1 + 1e-12):
        v = int(round(x))
        if not out or v > out[-1]:
            out.append(v)
        x *= factor
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    N_grid: tuple
    mode: Mode = Mode.TFUNC
    a: float = 0.0
    b: float = 1.0
    p: float = 1.0
    signed: bool = False
    distance_mode: DistanceMode = DistanceMode.MIN_OVER_FACE
    density: dict = field(default_factory=lambda: {"family": "uniform"})
    replicates: int = 100
    master_seed: int = 0
    target_rel_se: float | None = None
    max_replicates: int = 10**6
    extra_params: tuple = ()
    out_dir: str | None = None

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("mode", Mode.parse(self.mode))
        set_("distance_mode", DistanceMode.parse(self.distance_mode))
        set_("N_grid", tuple(int(N) for N in self.N_grid))
        if isinstance(self.density, DensitySpec):
            set_("density", self.density.to_config())
        elif isinstance(self.density, str):
            set_("density", density_from_config(self.density, self.n).to_config())
        set_("extra_params", tuple(
            p if isinstance(p, TParams) else TParams(*p) for p in self.extra_params))
        if not 2 <= self.n <= 10:
            raise ValueError(f"n must lie in [2, 10], got {self.n}")
        if not self.N_grid:
            raise ValueError("N_grid is empty")
        if any(N < self.n + 1 for N in self.N_grid):
            raise ValueError(f"every N must be >= n+1 = {self.n + 1}")
        if any(b <= a for a, b in zip(self.N_grid, self.N_grid[1:])):
            raise ValueError("N_grid must be strictly increasing")
        if self.replicates < 2:
            raise ValueError("need at least 2 replicates")
        if self.master_seed < 0 or self.master_seed >= 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.mode is Mode.TFUNC and (self.a < 0 or self.b < 0):
            raise ValueError("a and b must be nonnegative")
        if self.mode is Mode.LP_DEFICIT and self.p > 1:
            raise ValueError("p must be <= 1 for deficit experiments")
        if self.target_rel_se is not None and self.target_rel_se <= 0:
            raise ValueError("target_rel_se must be positive")

    @property
    def params(self) -> TParams:
        return TParams(self.a, self.b, self.distance_mode)

    def density_spec(self) -> DensitySpec:
        return density_from_config(self.density, self.n)

    def to_dict(self) -> dict:
        d = {
            "n": self.n, "N_grid": list(self.N_grid), "mode": self.mode.value,
            "a": self.a, "b": self.b, "p": self.p, "signed": self.signed,
            "distance_mode": self.distance_mode.value, "density": self.density,
            "replicates": self.replicates, "master_seed": self.master_seed,
            "target_rel_se": self.target_rel_se, "max_replicates": self.max_replicates,
        }
        if self.extra_params:
            d["extra_params"] = [[p.a, p.b, p.distance_mode.value] for p in self.extra_params]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d.pop("out_dir", None) if d.get("out_dir") is None else None
        if "N_grid" in d and isinstance(d["N_grid"], str):
            d["N_grid"] = parse_N_spec([d["N_grid"]])
        if "extra_params" in d:
            d["extra_params"] = tuple(tuple(p) for p in d["extra_params"])
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def parse_N_spec(items) -> tuple:
    """Parse --N values: integers, comma lists, or 'lo:hi:geometric[:factor]'."""
    out = []
    for item in items:
        for part in str(item).split(","):
            part = part.strip()
            if not part:
                continue
            if ":" in part:
                bits = part.split(":")
                if len(bits) < 3 or bits[2] != "geometric":
                    raise ValueError(f"range must look like lo:hi:geometric[:factor], got {part!r}")
                factor = float(bits[3]) if len(bits) > 3 else 2.0
                out.extend(geometric_grid(int(bits[0]), int(bits[1]), factor))
            else:
                out.append(int(part))
    return tuple(sorted(set(out)))


@dataclass
class NEstimate:
    N: int
    mean: float
    std_error: float
    M: int
    min: float
    max: float
    resampled: int = 0
    extras: dict = field(default_factory=dict)
    values: np.ndarray | None = field(default=None, repr=False)

    @property
    def rel_se(self) -> float:
        return abs(self.std_error / self.mean) if self.mean != 0 else math.inf

    def to_dict(self) -> dict:
        d = {"N": self.N, "mean": self.mean, "std_error": self.std_error, "M": self.M,
             "min": self.min, "max": self.max, "resampled": self.resampled}
        if self.extras:
            d["extras"] = self.extras
        return d


@dataclass
class EstimateReport:
    config: ExperimentConfig
    estimates: list
    wall_time_s: float = 0.0
    workers: int = 1
    code_version: str = __version__
    backend: str = field(default_factory=backend)

    def by_N(self, N) -> NEstimate:
        for e in self.estimates:
            if e.N == N:
                return e
        raise KeyError(N)

    @property
    def N_values(self) -> np.ndarray:
        return np.array([e.N for e in self.estimates])

    @property
    def means(self) -> np.ndarray:
        return np.array([e.mean for e in self.estimates])

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([e.std_error for e in self.estimates])

    def results_dict(self) -> dict:
        """The scheduling-independent part of the report."""
        return {"config": self.config.to_dict(), "results": [e.to_dict() for e in self.estimates]}

    def to_dict(self) -> dict:
        d = self.results_dict()
        d["metadata"] = {"wall_time_s": self.wall_time_s, "workers": self.workers,
                         "code_version": self.code_version, "backend": self.backend}
        return d


# replicate evaluation


def _evaluators(config: ExperimentConfig):
    """(primary, {extra name: fn}) evaluated on each hull."""
    mu = sphere_measure(config.n)
    if config.mode is Mode.TFUNC:
        f = signed_t_functional if config.signed else t_functional
        params = config.params
        primary = lambda P: f(P, params)  # noqa: E731
        extras = {f"T[{p.a:g},{p.b:g},{p.distance_mode.value}]" + ("[signed]" if config.signed else ""):
                  (lambda P, p=p: f(P, p)) for p in config.extra_params}
    elif config.mode is Mode.LP_DEFICIT:
        p = config.p
        mode = config.distance_mode
        other = (DistanceMode.AFFINE_HYPERPLANE if mode is DistanceMode.MIN_OVER_FACE
                 else DistanceMode.MIN_OVER_FACE)
        primary = lambda P: mu - lp_surface_area(P, p, mode)  # noqa: E731
        extras = {f"deficit[{other.value}]": lambda P: mu - lp_surface_area(P, p, other)}
    else:
        primary = lambda P: 0.0 if P.contains_origin else 1.0  # noqa: E731
        extras = {}
    return primary, extras


def _replicate_hull(config, density, N, rep):
    for attempt in range(MAX_ATTEMPTS):
        rng = stream(config.master_seed, "points", N, rep, attempt)
        X = sample_density(density, rng, N)
        try:
            return convex_hull(X, config.n), attempt
        except (DegenerateInput, DegenerateFacet, HullFailure):
            continue
    raise TooManyDegenerate(f"replicate {rep} at N={N} failed {MAX_ATTEMPTS} times")


def replicate_hull(config: ExperimentConfig, N: int, rep: int):
    """The hull that replicate ``rep`` at ``N`` is evaluated on."""
    return _replicate_hull(config, config.density_spec(), N, rep)[0]


def _replicate(config, density, N, rep, primary, extras):
    P, attempt = _replicate_hull(config, density, N, rep)
    return primary(P), [fn(P) for fn in extras.values()], attempt


def _run_block(config, density, N, reps, primary, extras, workers):
    def work(chunk):
        return [_replicate(config, density, N, r, primary, extras) for r in chunk]

    size = max(1, min(256, len(reps) // (4 * workers) or 1))
    chunks = [reps[i:i + size] for i in range(0, len(reps), size)]
    if workers <= 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    flat = [row for part in parts for row in part]
    vals = np.array([r[0] for r in flat])
    extra_vals = np.array([r[1] for r in flat]).reshape(len(flat), len(extras))
    resampled = sum(r[2] for r in flat)
    return vals, extra_vals, resampled


def _summarise(vals):
    M = vals.size
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(M))


def run_experiment(config: ExperimentConfig, workers: int | None = None,
                   keep_values: bool = False) -> EstimateReport:
    """Run every N of the grid; adaptive M doubles the replicate count until the
    relative standard error reaches ``target_rel_se`` (or ``max_replicates``)."""
    workers = workers or int(os.environ.get("SPHEREPOLY_WORKERS", "1"))
    density = config.density_spec()
    primary, extras = _evaluators(config)
    t0 = time.perf_counter()
    estimates = []
    for N in config.N_grid:
        vals = np.zeros(0)
        extra_vals = np.zeros((0, len(extras)))
        resampled = 0
        M = config.replicates
        while True:
            reps = list(range(vals.size, M))
            v, ev, rs = _run_block(config, density, N, reps, primary, extras, workers)
            vals = np.concatenate([vals, v])
            extra_vals = np.vstack([extra_vals, ev])
            resampled += rs
            mean, se = _summarise(vals)
            if config.target_rel_se is None or M >= config.max_replicates:
                break
            if se <= config.target_rel_se * abs(mean):
                break
            M = min(2 * M, config.max_replicates)
        if resampled > MAX_DEGENERATE_FRACTION * vals.size:
            raise TooManyDegenerate(f"{resampled} of {vals.size} replicates at N={N} were degenerate")
        ex = {}
        for j, name in enumerate(extras):
            m_, s_ = _summarise(extra_vals[:, j])
            ex[name] = {"mean": m_, "std_error": s_}
        estimates.append(NEstimate(N, mean, se, int(vals.size), float(vals.min()), float(vals.max()),
                                   resampled, ex, vals if keep_values else None))
    report = EstimateReport(config, estimates, time.perf_counter() - t0, workers)
    if config.out_dir:
        write_report(report, config.out_dir)
    return report


def estimate_expected_t(config: ExperimentConfig, **kw) -> EstimateReport:
    if config.mode is not Mode.TFUNC:
        config = replace(config, mode=Mode.TFUNC)
    return run_experiment(config, **kw)


def estimate_lp_deficit(config: ExperimentConfig, **kw) -> EstimateReport:
    if config.mode is not Mode.LP_DEFICIT:
        config = replace(config, mode=Mode.LP_DEFICIT)
    return run_experiment(config, **kw)


def containment_frequency(config: ExperimentConfig, **kw) -> EstimateReport:
    """Fraction of replicates whose hull misses the origin, per N."""
    if config.mode is not Mode.CONTAINMENT:
        config = replace(config, mode=Mode.CONTAINMENT)
    return run_experiment(config, **kw)


def volume_identity_gap(P) -> float:
    """Relative gap between the signed affine cone-volume sum / n and the hull volume."""
    vol = polytope_volume(P)
    s = signed_t_functional(P, TParams(1.0, 1.0, DistanceMode.AFFINE_HYPERPLANE)) / P.dim
    return abs(s - vol) / vol


# rate fitting and theory comparison


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    N_range: tuple
    slope_stderr: float = 0.0
    intercept_stderr: float = 0.0

    @property
    def prefactor(self) -> float:
        return math.exp(self.intercept)

    def to_dict(self) -> dict:
        return {"model": "power_law", "slope": self.slope, "slope_stderr": self.slope_stderr,
                "intercept": self.intercept, "intercept_stderr": self.intercept_stderr,
                "prefactor": self.prefactor, "r_squared": self.r_squared,
                "N_range": list(self.N_range)}


def fit_rate(report: EstimateReport, model: str = "power_law",
             max_rel_se: float = FIT_MAX_REL_SE) -> RateFit:
    """OLS of log(mean) on log(N) over the N values with SE/mean <= max_rel_se."""
    if str(model).lower().replace("_", "") not in ("powerlaw",):
        raise ValueError(f"unknown rate model {model!r}")
    good = [e for e in report.estimates if e.mean > 0 and e.rel_se <= max_rel_se]
    if len(good) < FIT_MIN_POINTS:
        raise InsufficientPrecision(
            f"need {FIT_MIN_POINTS} N values with SE/mean <= {max_rel_se}, have {len(good)}")
    x = np.log([e.N for e in good])
    y = np.log([e.mean for e in good])
    if np.ptp(y) == 0.0:
        slope, intercept, r2, se_s, se_i = 0.0, float(y[0]), 1.0, 0.0, 0.0
    else:
        res = stats.linregress(x, y)
        slope, intercept = float(res.slope), float(res.intercept)
        r2 = float(min(1.0, max(0.0, res.rvalue**2)))
        se_s, se_i = float(res.stderr), float(res.intercept_stderr)
    return RateFit(slope, intercept, r2, (good[0].N, good[-1].N), se_s, se_i)


@dataclass(frozen=True)
class ComparisonRow:
    N: int
    mean: float
    se: float
    prediction1: float
    prediction2: float
    z: float
    rel_err1: float
    rel_err2: float


@dataclass(frozen=True)
class Comparison:
    rows: tuple
    two_term_closer_at_max_N: bool
    z_band: float = 3.0

    @property
    def within_band(self) -> bool:
        return all(abs(r.z) <= self.z_band for r in self.rows)

    def to_dict(self) -> dict:
        return {"rows": [r.__dict__ for r in self.rows], "z_band": self.z_band,
                "within_band": self.within_band,
                "two_term_closer_at_max_N": self.two_term_closer_at_max_N}

    def to_csv(self) -> str:
        return csv_text(["N", "mean", "se", "prediction1", "prediction2", "z"],
                        [(r.N, r.mean, r.se, r.prediction1, r.prediction2, r.z) for r in self.rows])


def compare_to_theory(report: EstimateReport, constants: TheoryConstants,
                      z_band: float = 3.0) -> Comparison:
    """Per-N one- and two-term predictions with z-scores of the two-term model.

    The expansion's remainder has no explicit constant, so ``z_band`` is a
    caller-chosen tolerance rather than a derived one.
    """
    cfg = report.config
    if cfg.mode is Mode.TFUNC:
        if (cfg.n, cfg.a, cfg.b) != (constants.n, constants.a, constants.b):
            raise ValueError("report and constants disagree on (n, a, b)")
        to_pred = lambda v: v  # noqa: E731
    elif cfg.mode is Mode.LP_DEFICIT:
        # deficit = mu - T_{1-p,1}
        if (cfg.n, 1.0 - cfg.p, 1.0) != (constants.n, constants.a, constants.b):
            raise ValueError("deficit comparison needs constants with a = 1-p, b = 1")
        mu = sphere_measure(cfg.n)
        to_pred = lambda v: mu - v  # noqa: E731
    else:
        raise ValueError("containment reports have no theory prediction")
    if cfg.density != constants.density:
        raise ValueError("report and constants use different densities")
    rows = []
    for e in report.estimates:
        p1 = to_pred(constants.predicted_one_term(e.N))
        p2 = to_pred(constants.predicted(e.N))
        comb = math.hypot(e.std_error, constants.predicted_se(e.N))
        z = (e.mean - p2) / comb if comb > 0 else (0.0 if e.mean == p2 else math.copysign(math.inf, e.mean - p2))
        rel = lambda p: abs(e.mean - p) / abs(e.mean) if e.mean != 0 else math.inf  # noqa: E731
        rows.append(ComparisonRow(e.N, e.mean, e.std_error, p1, p2, z, rel(p1), rel(p2)))
    last = rows[-1]
    closer = abs(last.mean - last.prediction2) < abs(last.mean - last.prediction1)
    return Comparison(tuple(rows), closer, z_band)


def write_report(report: EstimateReport, out_dir, comparison: Comparison | None = None,
                 fit: RateFit | None = None):
    os.makedirs(out_dir, exist_ok=True)
    write_json(os.path.join(out_dir, "report.json"), report.to_dict())
    if comparison is not None:
        text = comparison.to_csv()
    else:
        nan = float("nan")
        text = csv_text(["N", "mean", "se", "prediction1", "prediction2", "z"],
                        [(e.N, e.mean, e.std_error, nan, nan, nan) for e in report.estimates])
    with open(os.path.join(out_dir, "points.csv"), "w", encoding="utf-8") as fh:
        fh.write(text)
    if fit is not None:
        write_json(os.path.join(out_dir, "ratefit.json"), fit.to_dict())
