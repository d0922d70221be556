import json
import math

import numpy as np
import pytest

from spherepoly import (
    DegenerateInput,
    DistanceMode,
    InsufficientPrecision,
    TooManyDegenerate,
    polytope_volume,
)
from spherepoly import harness as H
from spherepoly.harness import (
    ExperimentConfig,
    Mode,
    compare_to_theory,
    containment_frequency,
    estimate_expected_t,
    estimate_lp_deficit,
    fit_rate,
    geometric_grid,
    parse_N_spec,
    replicate_hull,
    run_experiment,
    volume_identity_gap,
    write_report,
)
from spherepoly.oracles import circle_expected_t, wendel_noncontainment
from spherepoly.spheres import sphere_measure
from spherepoly.theory import theory_constants

PI = math.pi


class TestConfig:
    def test_valid(self):
        c = ExperimentConfig(n=3, N_grid=[8, 16], mode="lp_deficit", p=0.5, density="uniform")
        assert c.mode is Mode.LP_DEFICIT
        assert c.N_grid == (8, 16)
        assert ExperimentConfig.from_dict(c.to_dict()) == c

    @pytest.mark.parametrize("kw", [
        dict(n=3, N_grid=[3]),
        dict(n=3, N_grid=[10, 10]),
        dict(n=3, N_grid=[20, 10]),
        dict(n=3, N_grid=[10], replicates=1),
        dict(n=1, N_grid=[10]),
        dict(n=3, N_grid=[10], a=-1),
        dict(n=3, N_grid=[10], mode="lp_deficit", p=2),
        dict(n=3, N_grid=[]),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"n": 3, "N_grid": [5], "colour": "red"})

    def test_grids(self):
        assert geometric_grid(128, 8192) == [128, 256, 512, 1024, 2048, 4096, 8192]
        assert parse_N_spec(["10", "20,40", "100:400:geometric"]) == (10, 20, 40, 100, 200, 400)
        assert parse_N_spec(["10:100:geometric:10"]) == (10, 100)
        with pytest.raises(ValueError):
            parse_N_spec(["10:20"])


class TestEstimate:
    def test_circle_oracle(self):
        cfg = ExperimentConfig(n=2, N_grid=[50], a=0, b=1, replicates=5000, master_seed=1)
        e = estimate_expected_t(cfg).estimates[0]
        assert abs(e.mean - circle_expected_t(50, 0, 1).value) < 3 * e.std_error

    def test_euler_every_replicate(self):
        cfg = ExperimentConfig(n=3, N_grid=[100], a=0, b=0, replicates=10**4)
        e = estimate_expected_t(cfg, keep_values=True).estimates[0]
        assert np.all(e.values == 196)
        assert e.mean == 196 and e.std_error == 0

    @pytest.mark.parametrize("density", ["uniform", {"family": "exp_tilt", "kappa": 3.0}])
    def test_signed_volume_identity(self, density):
        cfg = ExperimentConfig(n=3, N_grid=[12, 40], a=1, b=1, signed=True, density=density,
                               distance_mode=DistanceMode.AFFINE_HYPERPLANE, replicates=50)
        rep = estimate_expected_t(cfg, keep_values=True)
        for e in rep.estimates:
            vols = np.array([polytope_volume(replicate_hull(cfg, e.N, r)) for r in range(e.M)])
            assert np.allclose(e.values / 3, vols, rtol=1e-9, atol=0)

    def test_report_fields(self):
        cfg = ExperimentConfig(n=2, N_grid=[5, 9], replicates=30)
        rep = run_experiment(cfg)
        for e in rep.estimates:
            assert e.M == 30 and e.min <= e.mean <= e.max and e.resampled == 0
        d = rep.to_dict()
        assert set(d) == {"config", "results", "metadata"}
        assert set(d["metadata"]) == {"wall_time_s", "workers", "code_version", "backend"}

    def test_std_error_definition(self):
        cfg = ExperimentConfig(n=3, N_grid=[20], a=0, b=1, replicates=40)
        e = run_experiment(cfg, keep_values=True).estimates[0]
        assert e.std_error == pytest.approx(np.std(e.values, ddof=1) / math.sqrt(40), rel=1e-14)

    def test_extras_share_hulls(self):
        cfg = ExperimentConfig(n=2, N_grid=[10], a=0, b=1, replicates=200, extra_params=[(0, 0)])
        e = run_experiment(cfg).estimates[0]
        assert e.extras["T[0,0,min_over_face]"]["mean"] == 10


class TestDeterminism:
    def test_workers(self):
        cfg = ExperimentConfig(n=3, N_grid=[10, 30], mode="lp_deficit", replicates=64,
                               density={"family": "linear_tilt", "eps": 0.4})
        a = run_experiment(cfg, workers=1)
        b = run_experiment(cfg, workers=3)
        assert json.dumps(a.results_dict()) == json.dumps(b.results_dict())

    def test_prefix_stability(self):
        # replicate r always sees the same stream, so a larger run extends a smaller one
        cfg = ExperimentConfig(n=2, N_grid=[7], replicates=20)
        a = run_experiment(cfg, keep_values=True).estimates[0].values
        b = run_experiment(H.replace(cfg, replicates=40), keep_values=True).estimates[0].values
        assert np.array_equal(a, b[:20])

    def test_se_scaling(self):
        base = ExperimentConfig(n=3, N_grid=[30], a=0, b=1, replicates=2000, master_seed=5)
        s1 = run_experiment(base).estimates[0].std_error
        s4 = run_experiment(H.replace(base, replicates=8000)).estimates[0].std_error
        assert 0.8 <= (s1 / s4) / 2 <= 1.2

    def test_adaptive_M(self):
        cfg = ExperimentConfig(n=3, N_grid=[64], mode="lp_deficit", replicates=4,
                               target_rel_se=0.01)
        e = run_experiment(cfg).estimates[0]
        assert e.rel_se <= 0.01
        assert e.M & (e.M - 1) == 0  # doubled from 4


class TestDegenerate:
    def test_resample_counted(self, monkeypatch):
        real = H.convex_hull
        seen = set()

        def flaky(X, n):
            key = X.tobytes()[:16]
            if len(seen) < 2 and key not in seen:
                seen.add(key)
                raise DegenerateInput("forced")
            return real(X, n)

        monkeypatch.setattr(H, "convex_hull", flaky)
        monkeypatch.setattr(H, "MAX_DEGENERATE_FRACTION", 0.5)
        e = run_experiment(ExperimentConfig(n=2, N_grid=[6], replicates=10)).estimates[0]
        assert e.resampled == 2 and e.M == 10

    def test_too_many(self, monkeypatch):
        real = H.convex_hull
        count = [0]

        def flaky(X, n):
            count[0] += 1
            if count[0] % 2:
                raise DegenerateInput("forced")
            return real(X, n)

        monkeypatch.setattr(H, "convex_hull", flaky)
        with pytest.raises(TooManyDegenerate):
            run_experiment(ExperimentConfig(n=2, N_grid=[6], replicates=100))


class TestDeficit:
    def test_rate_constant(self):
        cfg = ExperimentConfig(n=3, N_grid=[1000], mode="lp_deficit", p=1, replicates=30)
        e = estimate_lp_deficit(cfg).estimates[0]
        assert abs(e.mean * 1000 / (24 * PI) - 1) < 0.25

    def test_nonnegative_and_ordered(self):
        c1 = ExperimentConfig(n=3, N_grid=[20, 80], mode="lp_deficit", p=1, replicates=200,
                              density={"family": "exp_tilt", "kappa": 1.0})
        c0 = H.replace(c1, p=0.0)
        r1 = estimate_lp_deficit(c1, keep_values=True)
        r0 = estimate_lp_deficit(c0, keep_values=True)
        for e1, e0 in zip(r1.estimates, r0.estimates):
            assert np.all(e1.values >= 0)
            assert np.all(e0.values >= e1.values)

    def test_affine_alongside(self):
        cfg = ExperimentConfig(n=3, N_grid=[50], mode="lp_deficit", p=0, replicates=100)
        e = estimate_lp_deficit(cfg).estimates[0]
        # min_dist >= |h| so the MinOverFace S_0 is larger and its deficit smaller
        assert e.mean <= e.extras["deficit[affine_hyperplane]"]["mean"]


class TestContainment:
    def test_large_N(self):
        cfg = ExperimentConfig(n=3, N_grid=[100], mode="containment", replicates=10**5)
        assert containment_frequency(cfg).estimates[0].mean <= 1e-3

    def test_decreasing_and_wendel(self):
        cfg = ExperimentConfig(n=3, N_grid=[4, 6, 8, 12], mode="containment", replicates=4000)
        rep = containment_frequency(cfg)
        m, s = rep.means, rep.std_errors
        assert np.all(np.diff(m) <= 3 * np.hypot(s[1:], s[:-1]))
        assert m[0] > 0
        for e in rep.estimates:
            p = wendel_noncontainment(3, e.N)
            assert abs(e.mean - p) <= 4 * math.sqrt(p * (1 - p) / e.M)


class TestFit:
    def test_facet_count_slope(self):
        cfg = ExperimentConfig(n=3, N_grid=geometric_grid(128, 2048), a=0, b=0, replicates=2)
        f = fit_rate(run_experiment(cfg))
        # log(2N-4) against log N: slope tends to 1 from above
        assert f.slope == pytest.approx(1.0, abs=0.01)
        assert 0 <= f.r_squared <= 1

    def test_circle_b3(self):
        cfg = ExperimentConfig(n=2, N_grid=geometric_grid(64, 1024), a=0, b=3, replicates=400)
        rep = run_experiment(cfg)
        f = fit_rate(rep)
        assert abs(f.slope + 2) < 0.1
        for e in rep.estimates:
            assert abs(e.mean - circle_expected_t(e.N, 0, 3).value) < 4 * e.std_error

    def test_insufficient(self):
        cfg = ExperimentConfig(n=3, N_grid=[10, 20, 40], a=0, b=1, replicates=5)
        with pytest.raises(InsufficientPrecision):
            fit_rate(run_experiment(cfg))
        with pytest.raises(ValueError):
            fit_rate(run_experiment(cfg), model="exponential")


class TestCompare:
    def test_circle(self):
        cfg = ExperimentConfig(n=2, N_grid=[50, 100, 200, 400], a=0, b=1, replicates=500)
        rep = run_experiment(cfg)
        cmp = compare_to_theory(rep, theory_constants(2, 0, 1))
        errs = [abs(r.prediction2 - circle_expected_t(r.N, 0, 1).value) / r.prediction2
                for r in cmp.rows]
        assert all(a > b for a, b in zip(errs, errs[1:]))
        assert all(r.prediction1 == pytest.approx(2 * PI, rel=1e-14) for r in cmp.rows)
        assert cmp.two_term_closer_at_max_N

    def test_z_scores(self):
        # at small N and large M the O(N^-4) remainder is resolved, so stay where MC noise dominates
        cfg = ExperimentConfig(n=2, N_grid=[256, 512, 1024, 2048], a=1, b=1, replicates=300)
        cmp = compare_to_theory(run_experiment(cfg), theory_constants(2, 1, 1))
        assert cmp.within_band
        z = np.array([r.z for r in cmp.rows])
        assert np.mean(z**2) < 6

    def test_circle_remainder_order_b2(self):
        # with b != 1 the exact n=2 value deviates from the two-term formula by a
        # relative O(1/N) term (Gamma(N)/Gamma(N+b-1) against N^{-(b-1)}), not O(N^-2)
        k = theory_constants(2, 1, 2)
        rel = [(circle_expected_t(N, 1, 2).value / k.predicted(N) - 1) * N for N in (256, 512, 1024)]
        assert np.ptp(rel) < 0.02 and -1.0 < rel[-1] < -0.5

    def test_deficit_mode(self):
        cfg = ExperimentConfig(n=3, N_grid=[100, 400], mode="lp_deficit", p=1, replicates=20)
        cmp = compare_to_theory(run_experiment(cfg), theory_constants(3, 0, 1))
        assert cmp.rows[1].prediction2 == pytest.approx(24 * PI / 400, rel=1e-12)

    def test_mismatch(self):
        cfg = ExperimentConfig(n=2, N_grid=[10], replicates=5)
        rep = run_experiment(cfg)
        with pytest.raises(ValueError):
            compare_to_theory(rep, theory_constants(3, 0, 1))
        cont = run_experiment(ExperimentConfig(n=2, N_grid=[10], replicates=5, mode="containment"))
        with pytest.raises(ValueError):
            compare_to_theory(cont, theory_constants(2, 0, 1))


def test_volume_identity_gap():
    cfg = ExperimentConfig(n=4, N_grid=[30], replicates=2)
    assert volume_identity_gap(replicate_hull(cfg, 30, 0)) < 1e-12


def test_tilted_surface_area_below_uniform():
    base = ExperimentConfig(n=3, N_grid=[256], mode="lp_deficit", p=1, replicates=200)
    u = run_experiment(base).estimates[0]
    t = run_experiment(H.replace(base, density={"family": "exp_tilt", "kappa": 2.0})).estimates[0]
    mu = sphere_measure(3)
    # E[S_p] = mu - deficit
    assert (mu - t.mean) <= (mu - u.mean) + 3 * math.hypot(u.std_error, t.std_error)


def test_writers(tmp_path):
    cfg = ExperimentConfig(n=3, N_grid=geometric_grid(32, 256), mode="lp_deficit", replicates=30)
    rep = run_experiment(cfg)
    fit = fit_rate(rep)
    cmp = compare_to_theory(rep, theory_constants(3, 0, 1))
    write_report(rep, tmp_path, cmp, fit)
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["results"][0]["N"] == 32
    assert d["results"][0]["mean"] == rep.estimates[0].mean
    rows = (tmp_path / "points.csv").read_text().splitlines()
    assert rows[0] == "N,mean,se,prediction1,prediction2,z"
    assert len(rows) == 5
    assert float(rows[1].split(",")[1]) == rep.estimates[0].mean
    r = json.loads((tmp_path / "ratefit.json").read_text())
    assert r["slope"] == fit.slope
    # out_dir on the config writes the report during the run
    run_experiment(H.replace(cfg, out_dir=str(tmp_path / "auto")))
    assert (tmp_path / "auto" / "report.json").exists()
