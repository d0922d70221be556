"""Fast self-checks of the library against its exact oracles (used by ``spherepoly verify``)."""

from __future__ import annotations

import math

from .geometry import DistanceMode, TParams, convex_hull, polytope_volume, signed_t_functional
from .harness import ExperimentConfig, run_experiment
from .oracles import (bp_identity_check, circle_expected_t, mc_simplex_moment, min_norm_oracle,
                      scaled_sphere_moment_identity, wendel_noncontainment)
from .rng import stream
from .sampling import uniform_points
from .spheres import sphere_measure
from .theory import c1, leading_coeff, simplex_moment


def _check(name, passed, detail):
    return {"name": name, "passed": bool(passed), "detail": detail}


def run_checks(quick: bool = False) -> list:
    reps = 2000 if quick else 20000
    out = []

    cfg = ExperimentConfig(n=2, N_grid=(10, 50), a=0.0, b=1.0, replicates=reps, master_seed=1)
    rep = run_experiment(cfg)
    for e in rep.estimates:
        exact = circle_expected_t(e.N, 0.0, 1.0).value
        z = (e.mean - exact) / e.std_error
        out.append(_check(f"circle_oracle_N{e.N}", abs(z) < 4, f"z={z:.2f}"))

    worst = 0.0
    for n in range(2, 9):
        worst = max(worst, abs(leading_coeff(n, 1.0) * c1(n, 1.0).value / sphere_measure(n) - 1))
    out.append(_check("leading_constant_identity", worst < 1e-10, f"max_rel_err={worst:.2e}"))

    rng = stream(2, "verify")
    gaps = []
    euler_ok = True
    oracle_gap = 0.0
    for i in range(20):
        n = 2 + i % 4
        P = convex_hull(uniform_points(rng, 30, n))
        if n == 3:
            euler_ok &= P.n_facets == 2 * P.n_vertices - 4
        s = signed_t_functional(P, TParams(1.0, 1.0, DistanceMode.AFFINE_HYPERPLANE)) / n
        gaps.append(abs(s - polytope_volume(P)) / polytope_volume(P))
        k = i % P.n_facets
        oracle_gap = max(oracle_gap, abs(min_norm_oracle(P.vertices[P.facet_vertices[k]]).value
                                         - P.min_dists[k]))
    out.append(_check("euler_count_n3", euler_ok, "F=2V-4"))
    out.append(_check("cone_volume_identity", max(gaps) < 1e-9, f"max_rel_err={max(gaps):.2e}"))
    out.append(_check("min_norm_oracle", oracle_gap < 1e-6, f"max_abs_err={oracle_gap:.2e}"))

    cfg = ExperimentConfig(n=3, N_grid=(4,), mode="containment", replicates=reps, master_seed=3)
    e = run_experiment(cfg).estimates[0]
    exact = wendel_noncontainment(3, 4)
    se = math.sqrt(exact * (1 - exact) / e.M)
    z = (e.mean - exact) / se
    out.append(_check("wendel_containment_N4", abs(z) < 4, f"z={z:.2f}"))

    cfg = ExperimentConfig(n=2, N_grid=(12,), a=1.0, b=1.0, signed=True,
                           distance_mode="affine_hyperplane", replicates=reps, master_seed=4)
    e = run_experiment(cfg).estimates[0]
    exact = circle_expected_t(12, 1.0, 1.0, mode="signed").value
    z = (e.mean - exact) / e.std_error
    out.append(_check("signed_circle_oracle_N12", abs(z) < 4, f"z={z:.2f}"))

    samples = 20000 if quick else 200000
    worst_z = 0.0
    for n, m in ((3, 1.0), (4, 2.0)):
        mc = mc_simplex_moment(n, m, samples, stream(5, "verify-moment", n))
        worst_z = max(worst_z, abs(mc.value - simplex_moment(n, m)) / mc.uncertainty)
    out.append(_check("simplex_moment_mc", worst_z < 4, f"max|z|={worst_z:.2f}"))

    bp = bp_identity_check(3, samples, stream(6, "verify-bp"))
    gap = abs(bp.lhs - bp.rhs_analytic) / bp.lhs
    z = (bp.rhs_mc - bp.lhs) / bp.rhs_mc_se
    out.append(_check("blaschke_petkantschin", gap < 1e-10 and abs(z) < 4,
                      f"analytic_rel_err={gap:.2e} mc_z={z:.2f}"))

    mi = scaled_sphere_moment_identity(4, 1.0, 0.3, samples, stream(7, "verify-scaled"))
    z = (mi.reconstructed - mi.exact) / mi.reconstructed_se
    out.append(_check("scaled_sphere_identity", abs(z) < 4, f"z={z:.2f}"))
    return out


if __name__ == "__main__":  # pragma: no cover
    for r in run_checks(quick=True):
        print(("PASS" if r["passed"] else "FAIL"), r["name"], r["detail"])
