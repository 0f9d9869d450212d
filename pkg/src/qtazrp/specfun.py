"""Scalar special functions used throughout the package.

Covers the q-deformed series pieces (q-integers, q-Pochhammer products, the
terminating 1-phi-0 evaluation), the regularized upper incomplete gamma
function Q(a, z) together with its Poisson partial-sum twin, the complementary
error function, and the exact-rational coefficient polynomials C_n(eta) of the
uniform large-a expansion of Q(a, a + tau*sqrt(a)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import ConvergenceError, ParameterError

__all__ = [
    "RationalPolynomial",
    "q_integer",
    "q_pochhammer",
    "phi10",
    "regularized_gamma_q",
    "poisson_cdf",
    "erfc",
    "cn_polynomial",
    "cn_eval",
]

# Series / continued-fraction switch and stopping rule for Q(a, z).
_GAMMA_MAX_ITER = 500
_GAMMA_RTOL = 1e-16


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must lie in (0, 1), got {q}")


def q_integer(k: int, q: float) -> float:
    """q-integer [k]_q = 1 - q**k for k >= 0."""
    _check_q(q)
    if k < 0:
        raise ParameterError(f"k must be nonnegative, got {k}")
    return 1.0 - q**k


def q_pochhammer(a: float, q: float, n: int) -> float:
    """Finite q-Pochhammer product (a; q)_n = (1-a)(1-aq)...(1-a q^(n-1)).

    (a; q)_0 = 1 by convention.  ``a`` may be any real number; the half-integer
    powers of q appearing in the correlation prefactors make a > 1 routine.
    """
    _check_q(q)
    if n < 0:
        raise ParameterError(f"n must be nonnegative, got {n}")
    out = 1.0
    aq = a
    for _ in range(n):
        out *= 1.0 - aq
        aq *= q
    return out


def phi10(n: int, q: float, z: float) -> float:
    """Terminating basic hypergeometric value: equals (z q^(-n); q)_n.

    This closed product is the only evaluation path; no series is summed.
    """
    if n < 0:
        raise ParameterError(f"n must be nonnegative, got {n}")
    _check_q(q)
    return q_pochhammer(z * q ** (-n), q, n)


def _gamma_q_series(a: float, z: float) -> float:
    # Lower-series for P(a, z); returns Q = 1 - P.  Valid for z < a + 1.
    if z == 0.0:
        return 1.0
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= z / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_RTOL:
            p = total * math.exp(-z + a * math.log(z) - math.lgamma(a))
            return 1.0 - p
    raise ConvergenceError(f"lower gamma series stalled for a={a}, z={z}")


def _gamma_q_contfrac(a: float, z: float) -> float:
    # Modified Lentz continued fraction for Q(a, z); valid for z >= a + 1.
    tiny = 1e-300
    b = z + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_RTOL:
            return h * math.exp(-z + a * math.log(z) - math.lgamma(a))
    raise ConvergenceError(f"gamma continued fraction stalled for a={a}, z={z}")


def regularized_gamma_q(a: float, z: float) -> float:
    """Regularized upper incomplete gamma function Q(a, z) = Gamma(a,z)/Gamma(a).

    Q(a, 0) = 1 and z -> Q(a, z) is nonincreasing.  The boundary a = 0 is
    defined as Q(0, z) = 0 for all z >= 0: this is the a -> 0+ limit for z > 0,
    and at z = 0 it matches the Poisson reading Q(n+1, t) = P(Poisson(t) <= n)
    continued to n = -1 (an empty partial sum).  The correlation-kernel
    boundary case y1 = x2 relies on this convention.
    """
    if a < 0.0 or z < 0.0:
        raise ParameterError(f"need a >= 0 and z >= 0, got a={a}, z={z}")
    if a == 0.0:
        return 0.0
    if z == 0.0:
        return 1.0
    if z < a + 1.0:
        return _gamma_q_series(a, z)
    return _gamma_q_contfrac(a, z)


def poisson_cdf(n: int, m: float) -> float:
    """P(X <= n) for X ~ Poisson(m), by direct stable summation.

    Independent of :func:`regularized_gamma_q`; the identity
    poisson_cdf(n, m) = Q(n + 1, m) is enforced by the test suite rather than
    assumed here.  For large m the sum is accumulated in log space.
    """
    if n < 0:
        raise ParameterError(f"n must be nonnegative, got {n}")
    if m < 0.0:
        raise ParameterError(f"m must be nonnegative, got {m}")
    if m == 0.0:
        return 1.0
    if m < 700.0:
        term = math.exp(-m)
        total = term
        for k in range(1, n + 1):
            term *= m / k
            total += term
        return min(total, 1.0)
    # log-space ladder: log(m^k / k!) accumulated with logaddexp
    logm = math.log(m)
    logsum = -math.inf
    logterm = 0.0
    for k in range(n + 1):
        if k > 0:
            logterm += logm - math.log(k)
        logsum = _logaddexp(logsum, logterm)
    return min(math.exp(logsum - m), 1.0)


def _logaddexp(x: float, y: float) -> float:
    if x == -math.inf:
        return y
    if y == -math.inf:
        return x
    hi, lo = (x, y) if x > y else (y, x)
    return hi + math.log1p(math.exp(lo - hi))


def erfc(x: float) -> float:
    """Complementary error function (delegates to the C library)."""
    return math.erfc(x)


@dataclass(frozen=True)
class RationalPolynomial:
    """Polynomial with exact rational coefficients, coeffs[k] multiplying eta**k.

    Canonical form: no trailing zero coefficients (the zero polynomial is the
    empty tuple).  Instances are immutable and safe to share across threads.
    """

    coeffs: tuple[Fraction, ...]

    @staticmethod
    def from_coeffs(values) -> "RationalPolynomial":
        coeffs = [Fraction(v) for v in values]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        return RationalPolynomial(tuple(coeffs))

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial assigned -1."""
        return len(self.coeffs) - 1

    def coefficient(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial.from_coeffs(
            [k * c for k, c in enumerate(self.coeffs)][1:]
        )

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return RationalPolynomial.from_coeffs(
            [self.coefficient(k) + other.coefficient(k) for k in range(n)]
        )

    def __sub__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return RationalPolynomial.from_coeffs(
            [self.coefficient(k) - other.coefficient(k) for k in range(n)]
        )

    def __mul__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        if not self.coeffs or not other.coeffs:
            return RationalPolynomial(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPolynomial.from_coeffs(out)

    def __call__(self, eta):
        """Horner evaluation; exact for Fraction input, float otherwise."""
        acc = Fraction(0) if isinstance(eta, Fraction) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * eta + (c if isinstance(eta, Fraction) else float(c))
        return acc


def _poly(*coeffs) -> RationalPolynomial:
    return RationalPolynomial.from_coeffs(coeffs)


def _apply_lhs(p: RationalPolynomial) -> RationalPolynomial:
    # The operator P -> P + eta*P' - P'' appearing in the C_n recurrence.
    eta = _poly(0, 1)
    return p + eta * p.derivative() - p.derivative().derivative()


def _recurrence_rhs(prev: RationalPolynomial) -> RationalPolynomial:
    # eta*(eta^2 - 2)*C - (2*eta^2 - 1)*C' + eta*C''
    eta = _poly(0, 1)
    d1 = prev.derivative()
    d2 = d1.derivative()
    return _poly(0, -2, 0, 1) * prev - _poly(-1, 0, 2) * d1 + eta * d2


@lru_cache(maxsize=None)
def cn_polynomial(n: int) -> RationalPolynomial:
    """n-th coefficient polynomial of the uniform incomplete-gamma expansion.

    C_0(eta) = (eta^2 - 1)/3, and C_n solves

        C_n + eta*C_n' - C_n'' = eta*(eta^2-2)*C_{n-1}
                                 - (2*eta^2-1)*C_{n-1}' + eta*C_{n-1}''.

    Writing the left side on sum(c_k eta^k) as
    sum_k [(k+1) c_k - (k+2)(k+1) c_{k+2}] eta^k, the system is triangular
    from the top degree downward:

        c_k = (R_k + (k+2)(k+1) c_{k+2}) / (k+1),

    with R the right-hand polynomial.  All arithmetic is exact rational, so
    the repeated divisions cannot accumulate roundoff; the result has degree
    exactly 3n + 2.
    """
    if n < 0:
        raise ParameterError(f"n must be nonnegative, got {n}")
    if n == 0:
        return _poly(Fraction(-1, 3), 0, Fraction(1, 3))
    rhs = _recurrence_rhs(cn_polynomial(n - 1))
    deg = 3 * n + 2
    c = [Fraction(0)] * (deg + 1)
    for k in range(deg, -1, -1):
        ck2 = c[k + 2] if k + 2 <= deg else Fraction(0)
        c[k] = (rhs.coefficient(k) + (k + 2) * (k + 1) * ck2) / (k + 1)
    out = RationalPolynomial.from_coeffs(c)
    if out.degree != deg:
        raise AssertionError(f"C_{n} degree {out.degree} != {deg}")
    return out


@lru_cache(maxsize=None)
def _cn_float_coeffs(n: int) -> tuple[float, ...]:
    return tuple(float(c) for c in cn_polynomial(n).coeffs)


def cn_eval(n: int, eta: float) -> float:
    """Float Horner evaluation of cn_polynomial(n) at eta."""
    acc = 0.0
    for c in reversed(_cn_float_coeffs(n)):
        acc = acc * eta + c
    return acc
