import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from weaktomo.geometry import GeometryPoint, error_volume
from weaktomo.states import PostSelection, RngSeed, fourier_mub
from weaktomo.stateavg import (
    avg_error_coefficient,
    avg_error_volume_closed,
    avg_information,
    build_reduction,
    information,
    mc_state_average,
    mc_total_volume,
    radial_integral_closed,
    tilde_integral,
    total_volume_closed,
    total_volume_quadrature,
)

from conftest import random_postselection, random_state

SKEWED2 = PostSelection([np.sqrt(0.7), np.sqrt(0.3)])


def test_reduction_qubit_mub():
    red = build_reduction(fourier_mub(2))
    np.testing.assert_allclose(red.M, [[4.0]])
    np.testing.assert_allclose(red.c, [2, 2])
    assert red.determinant_residual() < 1e-15 and red.offset_residual() < 1e-15


@pytest.mark.parametrize("n", range(2, 7))
def test_reduction_identities(n, rng):
    for _ in range(100):
        red = build_reduction(random_postselection(n, rng, floor=0.0))
        assert red.determinant_residual() < 1e-8
        assert red.offset_residual() < 1e-8


@pytest.mark.parametrize("n", [2, 3, 5])
def test_reduction_reproduces_denominator(n, rng):
    b = random_postselection(n, rng)
    red = build_reduction(b)
    for _ in range(20):
        x, y = rng.standard_normal(n - 1) * 3, rng.standard_normal(n - 1) * 3
        pt = GeometryPoint.from_free(x + 1j * y, b)
        S = np.sum(np.abs(pt.w) ** 2 / pt.weights)
        assert abs(red.denominator(x, y) - S) <= 1e-10 * S
    np.testing.assert_allclose(red.center, b.weights.p[:-1], rtol=1e-12)


def test_radial_integrals():
    assert abs(radial_integral_closed(2, 2) - math.pi) < 1e-15
    assert abs(radial_integral_closed(3, 3) - math.pi**2 / 2) < 1e-14
    assert abs(radial_integral_closed(2, 4) - math.pi / 3) < 1e-15


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("m_factor", [1, 2])
def test_radial_closed_vs_quadrature(n, m_factor):
    m = m_factor * n
    omega = 2 * math.pi ** (n - 1) / math.factorial(n - 2)
    val, _ = integrate.quad(lambda r: r ** (2 * n - 3) / (1 + r * r) ** m, 0, np.inf, epsabs=1e-13)
    assert abs(radial_integral_closed(n, m) / (omega * val) - 1) < 1e-9


def test_total_volume_examples():
    assert total_volume_closed(2) == pytest.approx(4 * math.pi, rel=1e-15)
    assert total_volume_closed(3) == pytest.approx(8 * math.pi**2, rel=1e-15)
    assert total_volume_closed(4) == pytest.approx(32 * math.pi**3 / 3, rel=1e-15)


@pytest.mark.parametrize("b", [fourier_mub(2), SKEWED2, PostSelection([np.sqrt(0.95), 1j * np.sqrt(0.05)])])
def test_volume_quadrature_qubit(b):
    assert abs(total_volume_quadrature(b) / (4 * math.pi) - 1) < 1e-8


@pytest.mark.parametrize("n", [3, 4])
def test_volume_quadrature_radial(n, rng):
    assert abs(total_volume_quadrature(random_postselection(n, rng)) / total_volume_closed(n) - 1) < 1e-10


def test_avg_error_coefficients():
    assert avg_error_coefficient(2) == Fraction(16, 3)
    assert avg_error_coefficient(3) == Fraction(128, 5)


def test_avg_error_closed_example():
    assert avg_error_volume_closed(2, fourier_mub(2), 0.1) == pytest.approx(0.64 / 3, rel=1e-14)
    p = np.array([0.5, 0.3, 0.2])
    assert avg_error_volume_closed(3, p, 0.1) == pytest.approx(128e-4 / (5 * p.prod()), rel=1e-14)


def test_mc_constant_function():
    est = mc_state_average(lambda pt: np.ones(pt.w.shape[0]), fourier_mub(3), 1000, RngSeed(1))
    assert est.value == 1.0 and est.stderr == 0.0 and est.samples == 1000


def test_mc_avg_error_skewed():
    ds = 0.1
    est = mc_state_average(lambda pt: error_volume(pt, ds), SKEWED2, 10**6, RngSeed(3))
    assert abs(est.value - avg_error_volume_closed(2, SKEWED2, ds)) < 3 * est.stderr


def test_mc_deterministic_across_workers():
    f = lambda pt: error_volume(pt, 0.1)
    a = mc_state_average(f, fourier_mub(3), 200_000, RngSeed(4), workers=1)
    b = mc_state_average(f, fourier_mub(3), 200_000, RngSeed(4), workers=4)
    assert a == b


@pytest.mark.parametrize("n", [2, 3, 4])
def test_mc_total_volume(n, rng):
    b = random_postselection(n, rng)
    est = mc_total_volume(b, 200_000, RngSeed(n))
    tol = 0.01 if n < 4 else 0.02
    assert abs(est.value / total_volume_closed(n) - 1) < tol


def test_information_identity(rng):
    for n in range(2, 6):
        for _ in range(20):
            psi, b = random_state(n, rng), random_postselection(n, rng)
            pt = GeometryPoint.from_state(psi, b)
            assert abs(information(pt, 0.07) + math.log(error_volume(pt, 0.07))) < 1e-12


def test_information_qubit_example():
    pt = GeometryPoint([1, 0], fourier_mub(2))
    # volume element 4, box side 0.2
    assert error_volume(pt, 0.1) == pytest.approx(0.16, rel=1e-14)
    assert information(pt, 0.1) == pytest.approx(-math.log(0.16), rel=1e-14)


def test_information_mub_vs_skewed():
    w = np.array([0.3 + 0.4j, 0.7 - 0.4j])
    ds = 0.05
    a, b = GeometryPoint(w, fourier_mub(2)), GeometryPoint(w, SKEWED2)
    Sa = np.sum(np.abs(w) ** 2 / a.weights)
    Sb = np.sum(np.abs(w) ** 2 / b.weights)
    expected = np.sum(np.log(a.weights)) - np.sum(np.log(b.weights)) + 2 * math.log(Sa / Sb)
    assert abs(information(a, ds) - information(b, ds) - expected) < 1e-12


@pytest.mark.parametrize("n", range(2, 8))
def test_log_average_is_harmonic_number(n):
    # <ln S> over the state space equals H_{N-1}; the prefactor of the tilde integral is 2N(N-1)
    prefactor = 2 * n * (n - 1)
    harmonic = sum(1 / k for k in range(1, n))
    assert abs(prefactor * tilde_integral(n) - n * harmonic) < 1e-9


@pytest.mark.parametrize("b", [fourier_mub(2), SKEWED2])
def test_avg_information_mc(b):
    ds = 0.1
    est = mc_state_average(lambda pt: information(pt, ds), b, 10**6, RngSeed(8))
    assert abs(est.value - avg_information(2, b, ds)) < 3 * est.stderr


def test_avg_information_mc_qutrit(rng):
    b = random_postselection(3, rng)
    est = mc_state_average(lambda pt: information(pt, 0.1), b, 400_000, RngSeed(9))
    assert abs(est.value - avg_information(3, b, 0.1)) < 3 * est.stderr


@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_information_b_dependence(n, s1, s2):
    g1, g2 = np.random.default_rng(s1), np.random.default_rng(s2)
    p, q = g1.dirichlet(np.ones(n)) + 1e-3, g2.dirichlet(np.ones(n)) + 1e-3
    p, q = p / p.sum(), q / q.sum()
    diff = avg_information(n, p, 0.3) - avg_information(n, q, 0.3)
    assert abs(diff - (np.log(p).sum() - np.log(q).sum())) < 1e-9
    dual = (avg_information(n, p, 0.3) + math.log(avg_error_volume_closed(n, p, 0.3))
            - avg_information(n, q, 0.3) - math.log(avg_error_volume_closed(n, q, 0.3)))
    assert abs(dual) < 1e-9


def test_phases_do_not_matter(rng):
    p = np.array([0.2, 0.3, 0.5])
    b1 = PostSelection.from_weights(p)
    b2 = PostSelection.from_weights(p, rng.uniform(0, 6, 3))
    assert avg_error_volume_closed(3, b1, 0.1) == pytest.approx(avg_error_volume_closed(3, b2, 0.1), rel=1e-14)
    e1 = mc_state_average(lambda pt: error_volume(pt, 0.1), b1, 200_000, RngSeed(2))
    e2 = mc_state_average(lambda pt: error_volume(pt, 0.1), b2, 200_000, RngSeed(3))
    assert abs(e1.value - e2.value) < 3 * math.hypot(e1.stderr, e2.stderr)
