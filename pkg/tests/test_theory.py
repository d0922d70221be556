import math

import numpy as np
import pytest

from spherepoly import ExpTilt, LinearTilt, Mixture, OutOfRange, Uniform
from spherepoly.rng import stream
from spherepoly.spheres import cap_surface_area, sphere_measure
from spherepoly.theory import (
    best_approx_upper,
    c1,
    c2,
    cap_geom,
    expected_t_asymptotic,
    holder_gap,
    leading_coeff,
    lp_deficit_constant,
    radius_sandwich_check,
    simplex_moment,
    theory_constants,
    z_sandwich_check,
)

PI = math.pi
E3 = np.array([0.0, 0.0, 1.0])


def test_simplex_moment_values():
    assert simplex_moment(2, 1) == pytest.approx(1.0, rel=1e-14)
    assert simplex_moment(3, 1) == pytest.approx(3 / (2 * PI), rel=1e-14)
    assert simplex_moment(2, 2) == pytest.approx(2.0, rel=1e-14)
    assert simplex_moment(3, 2) == pytest.approx(3 / 8, rel=1e-14)
    for n in range(2, 9):
        assert simplex_moment(n, 0) == 1.0


def test_simplex_moment_n2_two_point():
    # V in {0, 2} with probability 1/2
    for m in (0.5, 1, 2, 3, 4.5):
        assert simplex_moment(2, m) == pytest.approx(0.5 * 2**m, rel=1e-13)


def test_simplex_moment_errors():
    with pytest.raises(OutOfRange):
        simplex_moment(1, 1)
    with pytest.raises(OutOfRange):
        simplex_moment(3, -1)


def test_c1_c2_uniform():
    assert c1(3, 1).value == pytest.approx(8 * PI, rel=1e-14)
    assert c2(3, 0, 1).value == pytest.approx(48 * PI, rel=1e-14)
    for n in range(2, 9):
        assert c1(n, 1).value == pytest.approx(math.gamma(n) * sphere_measure(n), rel=1e-13)
        assert c1(n, 1).std_error == 0.0


def test_c1_b1_any_density():
    f = ExpTilt(4, 2.0, [0, 0, 0, 1])
    q = c1(4, 1, f, n_samples=10**4)
    assert q.value == pytest.approx(6 * sphere_measure(4), rel=1e-14)
    assert q.std_error == 0.0


@pytest.mark.parametrize("n", range(2, 9))
def test_leading_constant_identity(n):
    assert leading_coeff(n, 1) * c1(n, 1).value == pytest.approx(sphere_measure(n), rel=1e-10)


def test_leading_term_examples():
    k, _ = expected_t_asymptotic(2, 100, 0, 1)
    assert k.leading_coeff * k.c1 == pytest.approx(2 * PI, rel=1e-14)
    k3, _ = expected_t_asymptotic(3, 100, 1, 1)
    assert k3.predicted_one_term(10) / 3 == pytest.approx(4 * PI / 3, rel=1e-13)
    a0 = theory_constants(4, 0, 1)
    a5 = theory_constants(4, 5, 1)
    assert a0.predicted_one_term(50) == a5.predicted_one_term(50)
    assert a5.c2 > a0.c2


def test_constants_invariants():
    for n in (2, 3, 5):
        for a, b in ((0, 0), (0, 1), (2, 2), (1, 0.5)):
            k = theory_constants(n, a, b)
            assert k.c1 > 0 and k.leading_coeff > 0 and k.c2 >= 0


def test_predicted_formula():
    k = theory_constants(3, 1, 2)
    N = np.array([10.0, 100.0])
    ref = k.leading_coeff * N**-1 * (k.c1 - k.c2 / N)
    assert np.allclose(k.predicted(N), ref, rtol=1e-15)
    d = k.to_dict([10, 100])
    assert d["predicted"][1]["N"] == 100
    with pytest.raises(OutOfRange):
        expected_t_asymptotic(3, 3, 0, 1)


def test_deficit_constant():
    assert lp_deficit_constant(3, 1).value == pytest.approx(24 * PI, rel=1e-14)
    assert lp_deficit_constant(2, 1).value == pytest.approx(2 * PI**3, rel=1e-14)
    vals = [lp_deficit_constant(4, p).value for p in (1, 0.5, 0, -1, -3)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    with pytest.raises(OutOfRange):
        lp_deficit_constant(3, 1.5)


@pytest.mark.parametrize("n", range(2, 9))
def test_deficit_constant_is_two_term_coefficient(n):
    # at b = 1 the T-expansion reads mu - leading*c2*N^{-2/(n-1)}
    for p in (1.0, 0.0, -2.0):
        k = theory_constants(n, 1 - p, 1)
        assert k.leading_coeff * k.c2 == pytest.approx(lp_deficit_constant(n, p).value, rel=1e-12)


def test_holder_gap():
    assert holder_gap(3, 1, Uniform(3)).value == 0.0
    g = holder_gap(3, 0, LinearTilt(3, 0.5, E3), n_samples=10**5)
    assert g.value > 0 and g.value >= -3 * g.std_error
    g = holder_gap(3, 1, ExpTilt(3, 2.0, [1, 0, 0]), n_samples=10**5)
    assert g.value > 0


def test_best_approx():
    b = best_approx_upper(3, 1)
    assert b.main_term == pytest.approx(4 * PI, rel=1e-14)
    assert b.exact_constant == pytest.approx(24 * PI, rel=1e-14)
    assert best_approx_upper(2, 0).main_term == pytest.approx(2 * PI, rel=1e-14)
    mains = [best_approx_upper(n, 0.5).main_term for n in range(2, 9)]
    assert all(a < b for a, b in zip(mains, mains[1:]))
    # implied constant of the O(ln n / n) remainder settles down as n grows
    Cs = [best_approx_upper(n, 1).implied_C for n in (10, 40, 160)]
    assert Cs[0] > Cs[1] > Cs[2] > 0
    with pytest.raises(OutOfRange):
        best_approx_upper(3, 2)


def test_cap_geom():
    g = cap_geom(3, 0.6)
    assert g.r**2 + g.h**2 == pytest.approx(1, abs=1e-15)
    assert g.z == pytest.approx(0.4)
    assert g.S == pytest.approx(2 * PI * 0.4, rel=1e-13)
    assert cap_geom(5, 0).S == pytest.approx(sphere_measure(5) / 2, rel=1e-13)


class TestRadiusSandwich:
    def test_example(self):
        z = 0.02
        r = radius_sandwich_check(3, 2 * PI * z)
        g = 0.2
        assert r.r_exact == pytest.approx(math.sqrt(2 * z - z * z), rel=1e-12)
        mid = g - g**3 / 8
        assert mid == pytest.approx(0.199, rel=1e-12)
        resid = abs(r.r_exact - mid) / (2 * g**5)
        assert resid == pytest.approx(1 / 256, rel=1e-2)
        assert r.holds

    @pytest.mark.parametrize("n", range(3, 9))
    def test_grid(self, n):
        for g in np.linspace(0.01, 0.5, 25):
            S = g ** (n - 1) * math.pi ** ((n - 1) / 2) / math.gamma((n + 1) / 2)
            assert radius_sandwich_check(n, S, 2.0).holds

    def test_limit_and_errors(self):
        r = radius_sandwich_check(4, 0.0)
        assert (r.lower, r.r_exact, r.upper) == (0.0, 0.0, 0.0)
        with pytest.raises(OutOfRange):
            radius_sandwich_check(3, 2.0)

    def test_third_order_term_n3(self):
        # sqrt(2z - z^2) = g - g^3/8 + O(g^5) with g = sqrt(2z)
        for z in (1e-3, 1e-4):
            g = math.sqrt(2 * z)
            r = math.sqrt(2 * z - z * z)
            assert abs(r - (g - g**3 / 8)) < g**5


class TestZSandwich:
    def test_uniform_structure(self):
        for d in (0.1, 0.01, 0.001):
            z = 0.05
            s = z_sandwich_check(3, None, E3, z, d)
            assert s.lower / z == pytest.approx((1 + d) ** -4, rel=1e-12)
            assert s.upper / z == pytest.approx((1 + d) ** 3, rel=1e-12)
            assert s.holds()

    def test_zero(self):
        s = z_sandwich_check(3, None, E3, 0.0, 0.1)
        assert (s.lower, s.z, s.upper) == (0.0, 0.0, 0.0)

    def test_linear_tilt(self):
        s = z_sandwich_check(3, LinearTilt(3, 0.3, E3), E3, 0.05, 0.1, 10**5, stream(1, "z"))
        assert s.holds()

    def test_other_dims(self):
        for n in (4, 6):
            f = Mixture([(0.5, Uniform(n)), (0.5, ExpTilt(n, 1.0, np.eye(n)[0]))])
            u = np.eye(n)[0]
            assert z_sandwich_check(n, f, u, 0.01, 0.2, 10**5, stream(2, "z", n)).holds()

    def test_uniform_s_is_cap_area(self):
        s = z_sandwich_check(5, Uniform(5), np.eye(5)[1], 0.1, 0.1)
        assert s.s == pytest.approx(cap_surface_area(5, 0.9) / sphere_measure(5), rel=1e-14)
