import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import dblquad, quad
from scipy.special import eval_laguerre

from tomostat import (
    DivergentKernel,
    FilterSpec,
    filter_window,
    fock_coefficients,
    operator_cf,
    radial_operator_cf,
    s_kernel,
)
from tomostat._numerics import gauss_legendre, laguerre_all, periodic_angles

PREFACTOR = (2 / np.pi) ** 0.75


def autocorr_oracle(filt, b):
    """The defining 2d correlation integral, by adaptive quadrature."""
    d = b / filt.w

    def integrand(y, x):
        w1 = PREFACTOR * np.exp(-((x ** 2 + y ** 2) ** 2))
        w2 = PREFACTOR * np.exp(-(((x + d) ** 2 + y ** 2) ** 2))
        return w1 * w2

    val, err = dblquad(integrand, -3.2, 3.2, -3.2, 3.2, epsabs=1e-11)
    return val


class TestWindow:
    def test_value_at_origin(self):
        assert_allclose(filter_window(0j), PREFACTOR, rtol=1e-15)

    def test_value_on_unit_circle(self):
        assert_allclose(filter_window(1.0 + 0j), PREFACTOR * np.exp(-1), rtol=1e-14)

    def test_radial(self):
        rng = np.random.default_rng(2)
        beta = rng.normal(size=20) + 1j * rng.normal(size=20)
        assert_allclose(filter_window(beta), filter_window(1j * beta), rtol=1e-13)


class TestFilterSpec:
    def test_unit_at_origin(self, filt):
        assert abs(filt.autocorr(0.0) - 1.0) < 1e-6

    def test_matches_defining_integral(self, filt):
        for b in (0.7, 2.3, 5.0):
            assert_allclose(filt.autocorr(b), autocorr_oracle(filt, b), atol=1e-8)

    def test_even_and_vanishing_tail(self, filt):
        rng = np.random.default_rng(9)
        b = rng.uniform(0, 10, 25)
        assert_allclose(filt.autocorr(b), filt.autocorr(-b), rtol=1e-14)
        assert filt.autocorr(8 * filt.w - 0.01) < 1e-12
        assert filt.autocorr(8 * filt.w + 1.0) == 0.0

    def test_monotone_decay(self, filt):
        grid = np.linspace(0.0, 8 * filt.w, 2000)
        vals = filt.autocorr(grid)
        assert np.all(np.diff(vals) <= 1e-15)

    def test_cutoff_scale(self, filt):
        # growth profile peaks near b = 4.4 and dies by b = 11
        assert 8.0 < filt.b_cutoff < 11.0

    def test_invalid_width(self):
        with pytest.raises(ValueError):
            FilterSpec(0.0)
        with pytest.raises(ValueError):
            FilterSpec(-1.8)


class TestSKernel:
    def test_special_values(self):
        assert s_kernel(1, 1.7) == 1.0
        assert_allclose(s_kernel(0, 1.0), np.exp(-0.5), rtol=1e-15)
        assert_allclose(s_kernel(-1, 1.0), np.exp(-1.0), rtol=1e-15)


class TestOperatorCf:
    def test_origin_value(self, op_origin):
        assert_allclose(op_origin.cf(0j), 1 / np.pi, atol=1e-7)

    def test_real_and_radial_without_displacement(self, op_origin):
        rng = np.random.default_rng(6)
        beta = rng.normal(size=30) + 1j * rng.normal(size=30)
        vals = op_origin.cf(beta)
        assert np.max(np.abs(vals.imag)) < 1e-13
        assert_allclose(vals, op_origin.cf(1j * beta), rtol=1e-12)

    def test_hermitian_when_displaced(self, op_at_min):
        rng = np.random.default_rng(7)
        beta = rng.normal(size=100) + 1j * rng.normal(size=100)
        assert_allclose(op_at_min.cf(-beta), np.conj(op_at_min.cf(beta)), rtol=1e-12)

    def test_wigner_kernel_reduces_to_pure_phase(self):
        # e^{-b^2/2} cancels the e^{b^2/2} factor, leaving the flat profile
        alpha = 0.4 - 0.2j
        op = radial_operator_cf(s_kernel(0), alpha, b_cutoff=10.0)
        rng = np.random.default_rng(10)
        beta = rng.normal(size=40) + 1j * rng.normal(size=40)
        expected = np.exp(np.conj(alpha) * beta - alpha * np.conj(beta)) / np.pi
        assert_allclose(op.cf(beta), expected, rtol=1e-12)

    def test_flat_weight_needs_explicit_cutoff(self):
        # the same operator has no decaying radial weight, so the automatic
        # truncation scan must refuse it
        from tomostat import NonintegrableOperator

        with pytest.raises(NonintegrableOperator):
            radial_operator_cf(s_kernel(0), 0j)

    def test_displaced_equals_alpha_constructed(self, filt):
        lhs = operator_cf(filt, 0.0).displaced(0.6).cf
        rhs = operator_cf(filt, 0.6).cf
        rng = np.random.default_rng(13)
        beta = rng.normal(size=50) + 1j * rng.normal(size=50)
        assert_allclose(lhs(beta), rhs(beta), rtol=1e-12)


class TestFockCoefficients:
    def test_wigner_family(self):
        coeffs = fock_coefficients(s_kernel(0), 10)
        assert_allclose(coeffs, (2 / np.pi) * (-1.0) ** np.arange(11), atol=1e-8)

    def test_husimi_family(self):
        coeffs = fock_coefficients(s_kernel(-1), 10)
        expected = np.zeros(11)
        expected[0] = 1 / np.pi
        assert_allclose(coeffs, expected, atol=1e-8)

    def test_flat_kernel_rejected(self):
        with pytest.raises(DivergentKernel):
            fock_coefficients(s_kernel(1), 5)

    def test_filter_coefficients_summable(self, fock_coeffs):
        assert np.isfinite(fock_coeffs).all()
        assert np.sum(np.abs(fock_coeffs)) < 100.0
        # high orders decay once the filter tail takes over
        assert np.max(np.abs(fock_coeffs[15:])) < 0.05

    def test_against_adaptive_quadrature(self, filt, fock_coeffs):
        for n in (0, 3, 8):
            oracle = quad(
                lambda b: (2 / np.pi) * b * filt.autocorr(b) * eval_laguerre(n, b * b),
                0.0, 8 * filt.w, limit=400, epsabs=1e-11,
            )[0]
            assert_allclose(fock_coeffs[n], oracle, atol=1e-8)

    def test_fock_projection_identity(self, filt, fock_coeffs):
        # projecting the operator characteristic function onto the Fock
        # profiles must reproduce the radial coefficient integral
        op = operator_cf(filt, 0.0)
        r, wr = gauss_legendre(600, 0.0, op.b_cutoff)
        theta, wt = periodic_angles(128, 2 * np.pi)
        beta = r[:, None] * np.exp(1j * theta)[None, :]
        ring = np.conj(op.cf(beta)).sum(axis=1) * wt
        weights = r * np.exp(-0.5 * r * r) * ring.real * wr
        projected = laguerre_all(10, r * r) @ weights / np.pi
        assert_allclose(projected, fock_coeffs[:11], atol=1e-6)


class TestLaguerreRecurrence:
    def test_matches_scipy(self):
        x = np.linspace(0.0, 60.0, 101)
        ours = laguerre_all(12, x)
        for n in range(13):
            assert_allclose(ours[n], eval_laguerre(n, x), rtol=1e-10, atol=1e-10)
