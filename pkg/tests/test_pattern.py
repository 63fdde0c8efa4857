import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from tomostat import (
    CharFn,
    InsufficientRange,
    NonintegrableOperator,
    OperatorSpec,
    PatternFn,
    PatternTable,
    build_table,
    operator_cf,
    pattern_value,
    pattern_values,
)


def pattern_oracle(filt, alpha, x, phi):
    """Reduced cosine-transform form of the pattern function, via quad."""
    shift = 2.0 * (alpha * np.exp(-1j * phi)).real

    def integrand(b):
        return (2 / np.pi) * b * filt.autocorr(b) * np.exp(0.5 * b * b) \
            * np.cos(b * (x - shift))

    return quad(integrand, 0.0, filt.b_cutoff, limit=400, epsabs=1e-10)[0]


class TestPatternValue:
    def test_positive_peak_at_origin(self, op_origin):
        peak = pattern_value(op_origin, 0.0, 0.0)
        assert peak > 0
        # frozen from the adaptive-quadrature oracle
        assert_allclose(peak, 147.98465361, rtol=1e-9)

    def test_matches_oracle(self, filt, op_at_min):
        rng = np.random.default_rng(3)
        for _ in range(6):
            x = rng.uniform(-6, 6)
            phi = rng.uniform(0, np.pi)
            assert_allclose(pattern_value(op_at_min, x, phi),
                            pattern_oracle(filt, 0.6, x, phi), atol=1e-8)

    def test_phase_independent_without_displacement(self, op_origin):
        rng = np.random.default_rng(4)
        phis = rng.uniform(0, np.pi, 20)
        vals = [pattern_value(op_origin, 1.3, p) for p in phis]
        assert np.ptp(vals) < 1e-10

    def test_shift_covariance(self, filt, op_at_min, op_origin):
        rng = np.random.default_rng(5)
        for _ in range(5):
            x = rng.uniform(-5, 5)
            phi = rng.uniform(0, np.pi)
            shift = 2 * 0.6 * np.cos(phi)
            assert_allclose(pattern_value(op_at_min, x, phi),
                            pattern_value(op_origin, x - shift, phi), rtol=1e-10)

    def test_parity(self, filt):
        op_plus = operator_cf(filt, 0.6)
        op_minus = operator_cf(filt, -0.6)
        rng = np.random.default_rng(6)
        for x in rng.uniform(-4, 4, 5):
            assert_allclose(pattern_value(op_plus, x, 0.0),
                            pattern_value(op_minus, -x, 0.0), rtol=1e-10)

    def test_step_halving_self_consistency(self, op_at_min):
        import tomostat.pattern as pat
        from tomostat._numerics import panel_gauss_legendre

        rng = np.random.default_rng(7)
        for _ in range(10):
            x = rng.uniform(-8, 8)
            phi = rng.uniform(0, np.pi)
            coarse = pattern_value(op_at_min, x, phi)
            # re-evaluate with panels half as wide
            width = min(0.25, np.pi / (4 * abs(x) + 1)) / 2
            b, wb = panel_gauss_legendre(0.0, op_at_min.b_cutoff, width)
            vals = np.conj(op_at_min.cf(1j * b * np.exp(1j * phi)))
            fine = 2.0 * float((np.exp(1j * x * b) * wb * b * vals).sum().real)
            assert abs(fine - coarse) < 1e-8

    def test_nondecaying_operator_rejected(self):
        flat = OperatorSpec(cf=CharFn(lambda b: np.ones_like(b), "observable"),
                            b_cutoff=np.inf)
        with pytest.raises(NonintegrableOperator):
            pattern_value(flat, 0.0, 0.0)


class TestPatternFn:
    def test_profile_matches_direct(self, op_at_min, pattern_at_min):
        rng = np.random.default_rng(8)
        xs = rng.uniform(-8, 8, 1000)
        phis = rng.uniform(0, np.pi, 1000)
        direct = np.array([pattern_value(op_at_min, x, p) for x, p in
                           zip(xs[:40], phis[:40])])
        assert np.max(np.abs(pattern_at_min.evaluate(xs[:40], phis[:40]) - direct)) < 1e-6
        # full batch evaluates without error and stays bounded
        vals = pattern_at_min.evaluate(xs, phis)
        assert np.max(np.abs(vals)) < 200.0

    def test_out_of_range_rejected(self, pattern_at_min):
        with pytest.raises(InsufficientRange):
            pattern_at_min.evaluate(np.array([25.0]), np.array([0.0]))

    def test_generic_fallback(self, filt):
        # an operator handed over without its radial profile goes through
        # the direct quadrature path and must agree with the fast one
        op = operator_cf(filt, 0.3)
        stripped = OperatorSpec(cf=op.cf, alpha=op.alpha, b_cutoff=op.b_cutoff)
        slow = PatternFn(stripped)
        fast = PatternFn(op)
        xs = np.array([-1.0, 0.4, 2.2])
        phis = np.array([0.3, 1.1, 2.9])
        assert_allclose(slow.evaluate(xs, phis), fast.evaluate(xs, phis), atol=1e-6)


class TestPatternTable:
    def test_probe_against_direct(self, op_origin):
        table = build_table(op_origin, (-10.0, 10.0), 0.01, 64)
        assert table.values.shape[0] == 1  # no displacement: one row
        rng = np.random.default_rng(9)
        xs = rng.uniform(-10, 10, 1000)
        phis = rng.uniform(0, np.pi, 1000)
        direct = pattern_values(op_origin, xs, 0.0)
        assert np.max(np.abs(table.evaluate(xs, phis) - direct)) < 1e-6

    def test_displaced_table_interpolates(self, op_at_min):
        rng = np.random.default_rng(10)
        xs = rng.uniform(-6, 6, 50)
        phis = rng.uniform(0, np.pi, 50)
        direct = np.array([pattern_value(op_at_min, x, p) for x, p in zip(xs, phis)])
        # phase interpolation is linear, so displaced tables are limited by
        # the phase grid; the error must shrink quadratically with it
        errs = {}
        for rows in (64, 128):
            table = build_table(op_at_min, (-6.0, 6.0), 0.01, rows)
            assert table.values.shape[0] == rows + 1
            errs[rows] = np.max(np.abs(table.evaluate(xs, phis) - direct))
        assert errs[64] < 1.0
        assert errs[128] < 0.4 * errs[64]

    def test_degenerate_grid_rejected(self, op_origin):
        with pytest.raises(InsufficientRange):
            build_table(op_origin, (-1.0, 1.0), 5.0, 4)
        with pytest.raises(InsufficientRange):
            build_table(op_origin, (1.0, -1.0), 0.1, 4)

    def test_out_of_range_lookup_rejected(self, op_origin):
        table = build_table(op_origin, (-2.0, 2.0), 0.02, 1)
        with pytest.raises(InsufficientRange):
            table.evaluate(np.array([3.0]), np.array([0.0]))

    def test_roundtrip_serialization(self, op_origin, tmp_path):
        table = build_table(op_origin, (-3.0, 3.0), 0.05, 1)
        path = tmp_path / "table.csv"
        table.save(path)
        again = PatternTable.load(path)
        assert again.operator_hash == table.operator_hash
        assert_allclose(again.values, table.values, rtol=0)
        xs = np.array([-2.7, 0.0, 1.33])
        assert_allclose(again.evaluate(xs, np.zeros(3)),
                        table.evaluate(xs, np.zeros(3)), rtol=0)
        table.save(tmp_path / "again.csv")
        assert (tmp_path / "table.csv").read_bytes() == (tmp_path / "again.csv").read_bytes()

    def test_rejects_foreign_files(self, tmp_path):
        path = tmp_path / "bogus.csv"
        path.write_text("# something else\n1,2,3\n")
        with pytest.raises(ValueError):
            PatternTable.load(path)
