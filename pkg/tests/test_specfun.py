"""Special-function unit tests: frozen oracles, identities, and properties."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtazrp.errors import ParameterError
from qtazrp.specfun import (
    RationalPolynomial,
    _apply_lhs,
    _recurrence_rhs,
    cn_eval,
    cn_polynomial,
    erfc,
    phi10,
    poisson_cdf,
    q_integer,
    q_pochhammer,
    regularized_gamma_q,
)

# 30+ digit reference values computed with an independent multiprecision
# series/continued-fraction evaluation before the build.
ERFC_1 = 0.15729920705028513065877936491739074
ERFC_HALF = 0.47950012218695346231725334610803547
ERFC_M23 = 1.9988568234026433485346525406192309


class TestQSeries:
    def test_q_integer_basics(self):
        assert q_integer(0, 0.5) == 0.0
        assert q_integer(1, 0.5) == 0.5
        assert q_integer(2, 0.5) == pytest.approx(0.75, abs=0)

    def test_q_integer_domain(self):
        with pytest.raises(ParameterError):
            q_integer(1, 1.0)
        with pytest.raises(ParameterError):
            q_integer(-1, 0.5)

    def test_pochhammer_empty_and_zero_factor(self):
        assert q_pochhammer(0.3, 0.5, 0) == 1.0
        assert q_pochhammer(1.0, 0.5, 3) == 0.0
        assert q_pochhammer(2.0, 0.5, 2) == 0.0  # (1-2)(1-1)

    def test_phi10_trivial_and_product(self):
        assert phi10(0, 0.5, 0.7) == 1.0
        assert phi10(1, 0.5, 0.25) == pytest.approx(0.5, rel=1e-15)
        # z = q^2.5 so the product reduces to (q^0.5; q)_2
        q = 0.5
        expected = q_pochhammer(q**0.5, q, 2)
        assert phi10(2, q, q**2.5) == pytest.approx(expected, rel=1e-13)

    @given(st.integers(0, 12), st.floats(0.05, 0.95), st.floats(-3.0, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_phi10_reverse_order_product(self, n, q, z):
        # same product accumulated from the top factor down; tolerance is
        # scaled by the factor magnitudes (z on the q-lattice makes a factor
        # vanish exactly, where a relative check is ill-posed)
        forward = phi10(n, q, z)
        backward = 1.0
        scale = 1.0
        for j in reversed(range(n)):
            factor = 1.0 - z * q ** (j - n)
            backward *= factor
            scale *= max(abs(factor), 1.0)
        assert backward == pytest.approx(forward, rel=1e-13,
                                         abs=1e-13 * scale)


class TestRegularizedGamma:
    def test_boundaries(self):
        assert regularized_gamma_q(5.0, 0.0) == 1.0
        assert regularized_gamma_q(0.0, 2.0) == 0.0
        assert regularized_gamma_q(0.0, 0.0) == 0.0

    def test_exponential_special_case(self):
        assert regularized_gamma_q(1.0, 2.0) == pytest.approx(
            math.exp(-2.0), rel=1e-14)

    def test_against_partial_sum(self):
        # Q(4, 3) = sum_{k<=3} e^-3 3^k/k! = 13 e^-3
        assert regularized_gamma_q(4.0, 3.0) == pytest.approx(
            0.6472318887822312587314514034508031, abs=1e-14)

    def test_domain_errors(self):
        with pytest.raises(ParameterError):
            regularized_gamma_q(-1.0, 1.0)
        with pytest.raises(ParameterError):
            regularized_gamma_q(1.0, -1.0)

    def test_poisson_identity_sweep(self):
        for n in range(0, 51):
            for t in (0.1, 1.0, 5.0, 20.0):
                assert abs(poisson_cdf(n, t)
                           - regularized_gamma_q(n + 1, t)) <= 1e-12

    def test_monotone_in_z_and_range(self):
        for a in (0.5, 1.0, 3.7, 12.0, 251.0):
            prev = 1.0
            for z in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 300.0]:
                val = regularized_gamma_q(a, z)
                assert 0.0 <= val <= 1.0
                assert val <= prev + 1e-15
                prev = val

    def test_against_scipy(self):
        scipy_special = pytest.importorskip("scipy.special")
        for a in (0.3, 1.0, 7.5, 40.0, 1000.0, 1e6):
            for z in (0.0, 0.4, 7.0, 35.0, 900.0, 1.1e6):
                assert regularized_gamma_q(a, z) == pytest.approx(
                    float(scipy_special.gammaincc(a, z)), abs=1e-13)

    def test_large_mean_poisson(self):
        # log-space branch
        assert poisson_cdf(800, 800.0) == pytest.approx(
            regularized_gamma_q(801, 800.0), abs=1e-12)


class TestErfc:
    def test_frozen_values(self):
        assert erfc(1.0) == pytest.approx(ERFC_1, rel=1e-12)
        assert erfc(0.5) == pytest.approx(ERFC_HALF, rel=1e-12)
        assert erfc(-2.3) == pytest.approx(ERFC_M23, rel=1e-12)

    def test_limits_and_center(self):
        assert erfc(0.0) == 1.0
        assert erfc(40.0) == pytest.approx(0.0, abs=1e-300)
        assert erfc(-40.0) == pytest.approx(2.0, rel=1e-15)

    @given(st.floats(-6.0, 6.0))
    @settings(max_examples=80, deadline=None)
    def test_reflection(self, x):
        assert erfc(x) + erfc(-x) == pytest.approx(2.0, abs=1e-14)


# Independent oracle for C1, from a brute-force linear solve over the
# rationals of the coefficient-matching system (run before the build).
C1_COEFFS = (Fraction(0), Fraction(1, 12), Fraction(0),
             Fraction(-11, 36), Fraction(0), Fraction(1, 18))


class TestCnPolynomials:
    def test_c0_exact(self):
        assert cn_polynomial(0).coeffs == (
            Fraction(-1, 3), Fraction(0), Fraction(1, 3))

    def test_c1_against_linear_solve_oracle(self):
        assert cn_polynomial(1).coeffs == C1_COEFFS

    @pytest.mark.parametrize("n", range(0, 9))
    def test_degree_is_3n_plus_2(self, n):
        assert cn_polynomial(n).degree == 3 * n + 2

    @pytest.mark.parametrize("n", range(1, 9))
    def test_recurrence_residual_exactly_zero(self, n):
        residual = (_apply_lhs(cn_polynomial(n))
                    - _recurrence_rhs(cn_polynomial(n - 1)))
        assert residual.coeffs == ()

    def test_eval_matches_exact_rational(self):
        for n in (0, 1, 3):
            for eta in (-1.5, -0.5, 0.0, 0.7, 2.0):
                exact = float(cn_polynomial(n)(Fraction(eta).limit_denominator(10**6)))
                assert cn_eval(n, eta) == pytest.approx(exact, rel=1e-15,
                                                        abs=1e-15)

    def test_eval_seed_values(self):
        assert cn_eval(0, 1.0) == pytest.approx(0.0, abs=1e-15)
        assert cn_eval(0, 0.0) == pytest.approx(-1.0 / 3.0, rel=1e-15)

    def test_polynomial_canonical_form(self):
        p = RationalPolynomial.from_coeffs([1, 2, 0, 0])
        assert p.coeffs == (Fraction(1), Fraction(2))
        assert (p - p).coeffs == ()
