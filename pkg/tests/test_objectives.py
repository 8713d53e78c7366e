import math

import numpy as np
import pytest
from conftest import central_difference_gradient, j1_value_quadrature
from hypothesis import given, settings
from hypothesis import strategies as st

from gndopt import (ParameterError, compute_nk, fourier_sin_coefficients,
                    j1_stationary_points, make_j1, make_j2, make_objective,
                    make_quadratic, make_rastrigin)


class TestQuadratic:
    def test_value_and_gradient(self):
        q = make_quadratic(1.0, 2)
        x = np.array([1.0, 1.0])
        assert q.value(x) == 1.0
        assert np.array_equal(q.gradient(x), np.array([1.0, 1.0]))

    def test_minimizer_case(self):
        q = make_quadratic(2.0, 1)
        assert q.value(np.zeros(1)) == 0.0
        assert q.gradient(np.zeros(1)) == 0.0

    def test_offset_minimizer(self):
        q = make_quadratic(1.0, 3, x_star=[1.0, 1.0, 1.0])
        assert q.value(np.zeros(3)) == pytest.approx(1.5, abs=0)

    def test_certificate(self):
        assert make_quadratic(0.7, 4).certificate == (0.7, 0.7)

    @pytest.mark.parametrize("alpha,d", [(0.0, 1), (-1.0, 2), (1.0, 0)])
    def test_bad_parameters(self, alpha, d):
        with pytest.raises(ParameterError):
            make_quadratic(alpha, d)


class TestFourierCoefficients:
    @pytest.mark.parametrize("n", [1, 2, 7, 112, 199, 400])
    def test_partition_identity(self, n):
        c = fourier_sin_coefficients(n).c
        assert c[0] + 2.0 * np.sum(c[1:]) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 7, 112, 400])
    def test_strictly_decreasing_positive(self, n):
        c = fourier_sin_coefficients(n).c
        assert c[0] <= 1.0
        assert np.all(np.diff(c) < 0.0)
        assert np.all(c > 0.0)

    @pytest.mark.parametrize("n", [1, 7, 112, 199, 300])
    def test_recurrence_matches_direct_log_gamma(self, n):
        c = fourier_sin_coefficients(n).c
        j = np.arange(n + 1)
        direct = np.exp(
            [math.lgamma(2 * n + 1) - math.lgamma(n - jj + 1) - math.lgamma(n + jj + 1)
             - n * math.log(4.0) for jj in j])
        assert np.max(np.abs(c - direct) / direct) <= 1e-12

    def test_expansion_reproduces_sine_power(self):
        n = 7
        fc = fourier_sin_coefficients(n)
        j = np.arange(1, n + 1)
        sign = (-1.0) ** j
        for t in np.linspace(-3.0, 3.0, 41):
            series = fc.c[0] + 2.0 * np.sum(sign * fc.c[1:] * np.cos(2.0 * j * t))
            assert series == pytest.approx(math.sin(t) ** (2 * n), abs=1e-14)


class TestComputeNk:
    @pytest.mark.parametrize("k,expected", [(1, 199), (2, 112), (3, 89), (4, 78)])
    def test_table(self, k, expected):
        assert compute_nk(k) == expected

    def test_bad_k(self):
        with pytest.raises(ParameterError):
            compute_nk(0)


class TestJ1:
    def test_value_vanishes_at_pi_for_n1_k1(self):
        # antiderivative gives int_0^pi t*sin(t)^2 dt = pi^2/4, so the value is 0
        j1 = make_j1(1, 1)
        assert abs(j1.value(np.array([math.pi]))) <= 1e-13

    def test_gradient_at_half_pi(self):
        j1 = make_j1(7, 1)
        g = j1.gradient(np.array([math.pi / 2]))
        assert g[0] == pytest.approx(-math.pi / 2, rel=1e-15)

    def test_value_matches_quadrature_at_single_point(self):
        j1 = make_j1(112, 2)
        got = float(j1.value(np.array([3.7])))
        want = j1_value_quadrature([3.7], 112, 2)[0]
        assert got == pytest.approx(want, abs=1e-8)

    @pytest.mark.parametrize("n,k", [(1, 1), (7, 1), (112, 2)])
    def test_fourier_value_vs_quadrature_on_interval(self, n, k):
        j1 = make_j1(n, k)
        xs = np.linspace(-10.0, 10.0, 201)
        got = np.atleast_1d(j1.value(xs[:, None]))
        want = j1_value_quadrature(xs, n, k)
        assert np.max(np.abs(got - want)) <= 1e-8

    def test_even_symmetry(self):
        j1 = make_j1(7, 1)
        xs = np.linspace(0.1, 9.7, 25)[:, None]
        assert np.array_equal(j1.value(xs), j1.value(-xs))
        assert np.array_equal(j1.gradient(xs), -j1.gradient(-xs))

    def test_certificate_only_past_threshold(self):
        assert make_j1(7, 1).certificate is None
        assert make_j1(199, 1).certificate == (21.0 / 25.0, 1.0)
        assert make_j1(112, 2).certificate == (21.0 / 25.0, 1.0)
        assert make_j1(111, 2).certificate is None

    def test_quadratic_sandwich_past_threshold(self):
        # for n >= n_k the deviation from x^2/2 lies in [-(4/25) x^2, 0]
        j1 = make_j1(199, 1)
        xs = np.linspace(-10.0, 10.0, 2001)
        xs = xs[xs != 0.0]
        dev = np.atleast_1d(j1.value(xs[:, None])) - 0.5 * xs * xs
        assert np.all(dev <= 1e-12)
        assert np.all(dev >= -(4.0 / 25.0) * xs * xs - 1e-12)

    def test_minimizer_exact(self):
        j1 = make_j1(112, 2)
        assert j1.value(np.zeros(1)) == 0.0
        assert j1.gradient(np.zeros(1))[0] == 0.0


class TestJ1StationaryPoints:
    def test_first_point_n7(self):
        pts = j1_stationary_points(7, 1, 0)
        assert pts == [pytest.approx(math.asin(0.5 ** (1 / 14)), rel=1e-15)]

    def test_first_point_n1_is_quarter_pi(self):
        pts = j1_stationary_points(1, 1, 0)
        assert pts == [pytest.approx(math.pi / 4, rel=1e-15)]

    def test_gradient_small_at_all_points(self):
        j1 = make_j1(199, 1)
        for x in j1_stationary_points(199, 1, 5):
            assert abs(j1.gradient(np.array([x]))[0]) <= 1e-9

    def test_negative_j_max_rejected(self):
        with pytest.raises(ParameterError):
            j1_stationary_points(7, 1, -1)


class TestJ2:
    def test_value_and_gradient_at_one(self):
        j2 = make_j2(0.5, 3.0)
        assert j2.value(np.array([1.0])) == 0.5
        assert j2.gradient(np.array([1.0]))[0] == 2.5

    def test_piecewise_zero(self):
        j2 = make_j2(2.0 / 27.0, math.sqrt(18161.0) / 8.0)
        assert j2.value(np.zeros(1)) == 0.0
        assert j2.gradient(np.zeros(1))[0] == 0.0

    def test_even_symmetry(self):
        j2 = make_j2(0.1, 1.0)
        xs = np.geomspace(1e-5, 9.0, 40)[:, None]
        assert np.array_equal(j2.value(xs), j2.value(-xs))
        assert np.array_equal(j2.gradient(xs), -j2.gradient(-xs))

    def test_certificate_cases(self):
        # eps*sqrt(1+R^2) < 1: secant-based pair
        j2 = make_j2(0.1, 1.0)
        t = 0.1 * math.sqrt(2.0)
        assert j2.certificate == (pytest.approx(1.0 - t), pytest.approx(1.0 + t))
        # boundary of the second admissibility range: 4*eps*(1+5/4)^1.5 == 1
        j2b = make_j2(2.0 / 27.0, math.sqrt(18161.0) / 8.0)
        assert j2b.certificate == (1.0, pytest.approx(2.25))

    @pytest.mark.parametrize("eps,R", [(0.0, 1.0), (1.0, 1.0), (0.5, 0.0)])
    def test_bad_parameters(self, eps, R):
        with pytest.raises(ParameterError):
            make_j2(eps, R)


class TestRastrigin:
    def test_global_minimum(self):
        r = make_rastrigin(1.0, 1.0, 0.05, 2)
        assert r.value(np.zeros(2)) == 0.0
        assert np.array_equal(r.gradient(np.zeros(2)), np.zeros(2))

    def test_value_at_pi_zero(self):
        r = make_rastrigin(1.0, 1.0, 0.05, 2)
        assert r.value(np.array([math.pi, 0.0])) == pytest.approx(2.0 + 0.05 * math.pi**2, rel=1e-15)

    def test_gradient_at_pi_pi(self):
        r = make_rastrigin(1.0, 1.0, 0.01, 2)
        g = r.gradient(np.array([math.pi, math.pi]))
        assert g == pytest.approx([0.02 * math.pi, 0.02 * math.pi], abs=1e-15)

    def test_no_certificate(self):
        assert make_rastrigin(1.0, 1.0, 0.05, 10).certificate is None


def _suite():
    return [
        (make_quadratic(1.0, 2), 10.0),
        (make_quadratic(2.5, 3, x_star=[1.0, -2.0, 0.5]), 10.0),
        (make_j1(1, 1), 10.0),
        (make_j1(7, 1), 10.0),
        (make_j1(112, 2), 10.0),
        (make_j2(0.1, 1.0), 10.0),
        (make_j2(2.0 / 27.0, math.sqrt(18161.0) / 8.0), 10.0),
        (make_rastrigin(1.0, 1.0, 0.05, 2), 20.0),
        (make_rastrigin(1.0, 1.0, 0.03, 10), 20.0),
    ]


@pytest.mark.parametrize("objective,box", _suite(), ids=lambda o: getattr(o, "name", str(o)))
def test_gradient_matches_finite_differences(objective, box):
    if not hasattr(objective, "dim"):
        pytest.skip()
    rng = np.random.Generator(np.random.Philox(key=np.array([17, 0], dtype=np.uint64)))
    for _ in range(50):
        x = rng.uniform(-box, box, size=objective.dim)
        analytic = objective.gradient(x)
        fd = central_difference_gradient(objective.value, x)
        err = math.sqrt(float(np.sum((analytic - fd) ** 2)))
        scale = 1.0 + math.sqrt(float(np.sum(analytic * analytic)))
        assert err / scale <= 1e-6


def test_gradient_zero_at_minimizer_everywhere():
    for objective, _ in _suite():
        g = objective.gradient(objective.minimizer)
        assert float(np.max(np.abs(g))) <= 1e-12
        assert objective.value(objective.minimizer) == objective.min_value


def test_certified_sandwich_holds_on_samples():
    # (alpha - beta_hat)/2 * r^2 <= f - f* <= L/2 * r^2 with the grid beta bound
    from gndopt import estimate_beta_quadratic, symmetric_log_grid
    grid = symmetric_log_grid(1e-4, 10.0, 2000)
    rng = np.random.Generator(np.random.Philox(key=np.array([23, 0], dtype=np.uint64)))
    for objective in (make_j1(199, 1), make_j2(0.1, 1.0), make_quadratic(1.3, 1)):
        alpha, big_l = objective.certificate
        beta_hat = estimate_beta_quadratic(objective, alpha, grid)
        xs = rng.uniform(-10.0, 10.0, size=(200, 1))
        xs = xs[np.abs(xs[:, 0]) > 1e-8]
        fv = np.atleast_1d(objective.value(xs))
        r2 = np.sum((xs - objective.minimizer) ** 2, axis=-1)
        assert np.all(fv - objective.min_value >= (alpha - beta_hat) / 2.0 * r2 - 1e-10)
        assert np.all(fv - objective.min_value <= big_l / 2.0 * r2 + 1e-10)
        g = objective.gradient(xs)
        assert np.all(np.sum(g * g, axis=-1) <= big_l**2 * r2 * (1.0 + 1e-12))


class TestFactory:
    def test_roundtrip_names(self):
        assert make_objective("j1", n=7, k=1).name == "j1"
        assert make_objective("quadratic", alpha=2.0, dim=3).dim == 3
        assert make_objective("rastrigin", a=1, b=1, c=0.05, dim=2).params["c"] == 0.05
        assert make_objective("j2", eps=0.1, R=1.0).params["R"] == 1.0

    def test_unknown_function(self):
        with pytest.raises(ParameterError):
            make_objective("ackley")

    def test_missing_keys(self):
        with pytest.raises(ParameterError):
            make_objective("j1", n=7)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(min_value=1, max_value=250))
def test_fourier_partition_identity_property(n):
    c = fourier_sin_coefficients(n).c
    assert abs(c[0] + 2.0 * np.sum(c[1:]) - 1.0) <= 1e-12
