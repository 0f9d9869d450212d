"""Large-L asymptotic evaluators for the six correlation scalars.

q1 and q3 use the uniform large-a expansion of the regularized incomplete
gamma tail: with a = a_shift(c, L),

    Q(a, L) ~ (1/2) erfc(-c/sqrt(2))
              + exp(-c^2/2)/sqrt(2*pi*a) * sum_n C_n(-c) / a^(n/2),

with q1 = 1 - Q(y1-x1, t) and q3 = Q(y1-x2, t) (see exact.q123 for the
orientation).  ``order`` counts the series terms included (order 0 keeps
only the erfc part).

q4, q5, q6 rest on the Gaussian limit of the small-contour integrals around
the saddle of S(w) = -w - log(1-w) at w = 0.  After rotating to vertical
lines (w = -i u / sqrt(L)) and integrating the sigma-derivative trick back
up, the two-variable kernel becomes

    I(s1, s2) = 1/(4 pi^2) * int_{-inf}^{s1} int_{-inf}^{s2} dsig1 dsig2
        int int du1 du2 (u1-u2)/(u1-q u2)
        * prod_j exp(-u_j^2/2 - i sig_j u_j)
        * (1 - sum_j (3i u_j/2 + sig_j u_j^2/2 - i u_j^3/3) L^(-1/2) + ...)

with the u1 line shifted off the real axis to dodge the u1 = q*u2 pole.  The
shift side (-0.5i) and the overall prefactor were frozen against the exact
contour quadrature at large L: the pre-limit nesting (outer contour encloses
q times the inner) puts the pole above the u1 line, and the kernel prefactor
carries no extra factor of q (q5 = q * I, q6 = 1 - q1 - q * I; an additional
q inside I does not converge to the exact values).

Truncations: |Re u| <= 8 (the integrands carry exp(-u^2/2)), and sigma from
a q-dependent lower cutoff: the single integrals decay like exp(-sigma^2/2)
and start at -10, while the double kernel's pole part decays only like
exp(-q^2 sigma^2/2) and starts at -max(10, 6/q + 2.5).  Gauss-Legendre rules
are used on these finite boxes (smooth, non-periodic integrands), with one
refinement step as the error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, ParameterError, PoleProximityError
from .specfun import cn_eval, erfc

__all__ = [
    "ScalingParams",
    "AsymResult",
    "DEFAULT_DEFORM",
    "a_shift",
    "q1_asym",
    "q3_asym",
    "gaussian_kernel",
    "I_asym",
    "q4_single_asym",
    "q4_asym",
    "q5_asym",
    "q6_asym",
    "convergence_rate",
]

# Imaginary shift of the u1 integration line; sign frozen by matching the
# exact small-contour quadrature at large L (see module docstring).
DEFAULT_DEFORM = -0.5

_SIGMA_MIN = -10.0      # singles: integrand tail is exp(-sigma^2/2)
_U_HALF_RANGE = 8.0
_SIGMA_NODES = 48
_U_NODES = 192
_REFINE_TOL = 1e-6


def _double_sigma_min(q: float) -> float:
    # The kernel's pole part decays only like exp(-q^2 sigma^2 / 2) in the
    # sigma tail, so the truncation point scales with 1/q.  The ceiling keeps
    # exp(|sigma_min| * |deform|) inflation on the shifted u1 line benign.
    return -max(10.0, min(6.0 / q + 2.5, 26.0))


def _double_grid_sizes(sigma_min: float, s1: float, s2: float) -> tuple[int, int]:
    span = max(s1, s2) - sigma_min
    n_sigma = int(min(max(3.5 * span, 48), 168))
    # e^(-i sigma u) oscillates ~|sigma_min| * 16 / (2 pi) times over the u box
    n_u = int(min(max(13.0 * abs(sigma_min), 192), 416))
    return n_sigma, n_u


@dataclass(frozen=True)
class ScalingParams:
    """Asymptotic regime: y_j - x_i = L + c_ij * sqrt(L), t = L.

    c22 is forced by lattice consistency: y2-x2 = (y2-x1) - (x2-x1) gives
    c22 = c12 - (c11 - c21).  Requires c11 > c21 (so x1 < x2).
    """

    L: float
    c11: float
    c12: float
    c21: float
    q: float = 0.5
    order: int = 0
    c22: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.L <= 0:
            raise ParameterError(f"L must be positive, got {self.L}")
        if self.c11 <= self.c21:
            raise ParameterError(
                f"requires c11 > c21, got {self.c11} <= {self.c21}")
        if not 0.0 < self.q < 1.0:
            raise ParameterError(f"q must lie in (0,1), got {self.q}")
        if self.order < 0:
            raise ParameterError("order must be nonnegative")
        derived = self.c12 - (self.c11 - self.c21)
        if self.c22 is None:
            object.__setattr__(self, "c22", derived)
        elif abs(self.c22 - derived) > 1e-12:
            raise ParameterError(
                f"inconsistent c22: given {self.c22}, derived {derived}")


@dataclass(frozen=True)
class AsymResult:
    """Asymptotic value together with its labeled building blocks."""

    value: float
    order_used: int
    pieces: dict


def a_shift(c: float, L: float) -> float:
    """a = L + c^2/2 + c*sqrt(L + c^2/4): the first-argument shift with
    a - c*sqrt(a) = L exactly (the inversion of L = a + tau*sqrt(a) at
    tau = -c)."""
    rad = L + c * c / 4.0
    if rad < 0.0:
        raise ParameterError(f"need L + c^2/4 >= 0, got {rad}")
    return L + c * c / 2.0 + c * math.sqrt(rad)


def _gamma_tail_expansion(c: float, L: float, order: int) -> AsymResult:
    # uniform expansion of Q(a, L) with a = a_shift(c, L), i.e. tau = -c
    if order < 0 or order > 8:
        raise ParameterError("order must lie in [0, 8]")
    if L < 10:
        raise ParameterError("expansion needs L >= 10")
    a = a_shift(c, L)
    erfc_term = 0.5 * erfc(-c / math.sqrt(2.0))
    prefactor = math.exp(-c * c / 2.0) / math.sqrt(2.0 * math.pi * a)
    series = 0.0
    for n in range(order):
        series += cn_eval(n, -c) / a ** (n / 2.0)
    return AsymResult(erfc_term + prefactor * series, order, {
        "erfc": erfc_term,
        "series": prefactor * series,
        "a": a,
    })


def q1_asym(c11: float, L: float, order: int = 0) -> AsymResult:
    """Truncated expansion of q1 = 1 - Q(y1 - x1, t), <= 8 correction terms.

    The incomplete-gamma expansion itself approximates Q; q1 is its
    complement (see exact.q123 for how the orientation is pinned).
    """
    base = _gamma_tail_expansion(c11, L, order)
    pieces = {"erfc": 1.0 - base.pieces["erfc"],
              "series": -base.pieces["series"], "a": base.pieces["a"]}
    return AsymResult(1.0 - base.value, order, pieces)


def q3_asym(c21: float, L: float, order: int = 0) -> AsymResult:
    """Truncated expansion of q3 = Q(y1 - x2, t).

    Structural complement of q1_asym: q1_asym(c, L, k) + q3_asym(c, L, k) = 1
    exactly, at every order.
    """
    base = _gamma_tail_expansion(c21, L, order)
    return AsymResult(base.value, order, dict(base.pieces))


@lru_cache(maxsize=None)
def _gl(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = (a + b) / 2.0, (b - a) / 2.0
    return mid + half * x, half * w


def gaussian_kernel(u1, u2, s1: float, s2: float, q: float, L: float,
                    order: int = 0):
    """Pointwise integrand of the Gaussian-limit double kernel.

    (u1-u2)/(u1-q*u2) * prod_j exp(-u_j^2/2 - i sig_j u_j), times
    (1 - sum_j (3i u_j/2 + sig_j u_j^2/2 - i u_j^3/3)/sqrt(L)) when order=1.
    """
    if order not in (0, 1):
        raise ParameterError("order must be 0 or 1")
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    denom = u1 - q * u2
    if np.min(np.abs(denom)) < 1e-8:
        raise PoleProximityError("u1 - q*u2 vanishes on the grid")
    out = (u1 - u2) / denom
    out = out * np.exp(-u1 ** 2 / 2.0 - 1j * s1 * u1)
    out = out * np.exp(-u2 ** 2 / 2.0 - 1j * s2 * u2)
    if order == 1:
        corr = (1.5j * u1 + s1 * u1 ** 2 / 2.0 - 1j * u1 ** 3 / 3.0
                + 1.5j * u2 + s2 * u2 ** 2 / 2.0 - 1j * u2 ** 3 / 3.0)
        out = out * (1.0 - corr / math.sqrt(L))
    return out


def _single_value(c: float, L: float, order: int,
                  n_sigma: int, n_u: int) -> complex:
    sig, wsig = _gl(n_sigma, _SIGMA_MIN, min(c, _U_HALF_RANGE))
    x, wu = _gl(n_u, -_U_HALF_RANGE, _U_HALF_RANGE)
    u = x.astype(complex)
    g = wu * np.exp(-u ** 2 / 2.0)
    E = np.exp(-1j * np.outer(sig, u))          # (S, U)
    m0 = E @ g
    total = m0.copy()
    if order == 1:
        alpha = 1.5j * u - 1j * u ** 3 / 3.0
        beta = u ** 2 / 2.0
        ma = E @ (g * alpha)
        mb = E @ (g * beta)
        total = m0 - (ma + sig * mb) / math.sqrt(L)
    return complex(wsig @ total) / (2.0 * math.pi)


def q4_single_asym(c: float, L: float, order: int = 0) -> float:
    """Gaussian limit of a single small-contour integral (positive sign).

    At order 0 the u-integral is analytic and the value reduces to the
    standard normal CDF at c; the L^(-1/2) correction follows the same
    expansion as the double kernel.
    """
    if order not in (0, 1):
        raise ParameterError("order must be 0 or 1")
    if c <= _SIGMA_MIN:
        return 0.0
    coarse = _single_value(c, L, order, _SIGMA_NODES, _U_NODES)
    fine = _single_value(c, L, order, 2 * _SIGMA_NODES, 2 * _U_NODES)
    if abs(fine - coarse) > _REFINE_TOL:
        raise ConvergenceError(
            f"single Gaussian integral not converged: {abs(fine - coarse)}")
    return float(fine.real)


def _double_value(s1: float, s2: float, q: float, L: float, order: int,
                  deform: float, n_sigma: int, n_u: int) -> complex:
    sigma_min = _double_sigma_min(q)
    sig1, w1 = _gl(n_sigma, sigma_min, s1)
    sig2, w2 = _gl(n_sigma, sigma_min, s2)
    x, wu = _gl(n_u, -_U_HALF_RANGE, _U_HALF_RANGE)
    u1 = x + 1j * deform
    u2 = x.astype(complex)
    denom = u1[:, None] - q * u2[None, :]
    if np.min(np.abs(denom)) < 1e-8:
        raise PoleProximityError("u1 - q*u2 vanishes on the grid; "
                                 "use a nonzero deform")
    g1 = wu * np.exp(-u1 ** 2 / 2.0)
    g2 = wu * np.exp(-u2 ** 2 / 2.0)
    A = (u1[:, None] - u2[None, :]) / denom * g1[:, None] * g2[None, :]
    E1 = np.exp(-1j * np.outer(sig1, u1))       # (S, U)
    E2 = np.exp(-1j * np.outer(sig2, u2))
    B0 = E1 @ A @ E2.T
    total = B0
    if order == 1:
        alpha1 = 1.5j * u1 - 1j * u1 ** 3 / 3.0
        beta1 = u1 ** 2 / 2.0
        alpha2 = 1.5j * u2 - 1j * u2 ** 3 / 3.0
        beta2 = u2 ** 2 / 2.0
        Ba = E1 @ (alpha1[:, None] * A + A * alpha2[None, :]) @ E2.T
        Bb1 = E1 @ (beta1[:, None] * A) @ E2.T
        Bb2 = E1 @ (A * beta2[None, :]) @ E2.T
        total = B0 - (Ba + sig1[:, None] * Bb1 + sig2[None, :] * Bb2) \
            / math.sqrt(L)
    return complex(w1 @ total @ w2) / (4.0 * math.pi ** 2)


def I_asym(s1: float, s2: float, q: float, L: float, order: int = 0,
           deform: float = DEFAULT_DEFORM) -> float:
    """The Gaussian-limit double kernel I(s1, s2) (see module docstring).

    q5 ~ q * I(c21, c12) and the q6 integral is q * I(c11, c12); the same
    object with both exponents from x1 enters the q4 assembly without the
    leading q.
    """
    if order not in (0, 1):
        raise ParameterError("order must be 0 or 1")
    if deform == 0.0:
        raise PoleProximityError("deform must be nonzero")
    sigma_min = _double_sigma_min(q)
    if s1 <= sigma_min or s2 <= sigma_min:
        return 0.0
    n_sigma, n_u = _double_grid_sizes(sigma_min, s1, s2)
    coarse = _double_value(s1, s2, q, L, order, deform, n_sigma, n_u)
    fine = _double_value(s1, s2, q, L, order, deform,
                         3 * n_sigma // 2, 3 * n_u // 2)
    if abs(fine - coarse) > _REFINE_TOL:
        raise ConvergenceError(
            f"double Gaussian integral not converged: {abs(fine - coarse)}")
    return float(fine.real)


def q5_asym(s: ScalingParams) -> float:
    """q5 ~ q * I(c12, c21): the crossed exponent pair (y2 - x1 on the
    deformed outer line, y1 - x2 on the inner one)."""
    return s.q * I_asym(s.c12, s.c21, s.q, s.L, min(s.order, 1))


def _q46_sigmas(s: ScalingParams) -> tuple[float, float]:
    # outer line carries the larger dual coordinate (both measured from x1)
    c_hi, c_lo = max(s.c11, s.c12), min(s.c11, s.c12)
    return c_hi, c_lo


def q6_asym(s: ScalingParams) -> float:
    """q6 ~ 1 - q1 - q * I over the ordered (c11, c12) pair."""
    q1 = q1_asym(s.c11, s.L, min(s.order, 8)).value
    hi, lo = _q46_sigmas(s)
    return 1.0 - q1 - s.q * I_asym(hi, lo, s.q, s.L, min(s.order, 1))


def q4_asym(s: ScalingParams) -> float:
    """q4 assembled from its deformation pieces in the Gaussian limit.

    q4 = I(hi, lo) + 1 - Phi(hi) - (1/q) * Phi(lo) over the ordered
    (c11, c12) pair, where Phi denotes q4_single_asym; the single-piece
    signs and the 1/q residue weight come from the contour-level
    deformation identity.
    """
    order = min(s.order, 1)
    hi, lo = _q46_sigmas(s)
    double = I_asym(hi, lo, s.q, s.L, order)
    return (double + 1.0
            - q4_single_asym(hi, s.L, order)
            - q4_single_asym(lo, s.L, order) / s.q)


def convergence_rate(exact_fn: Callable[[float], float],
                     asym_fn: Callable[[float], float],
                     L_list) -> float:
    """Log-log least-squares slope of |exact(L) - asym(L)| against L."""
    Ls = [float(L) for L in L_list]
    if len(Ls) < 3:
        raise ParameterError("need at least 3 L values")
    errs = []
    for L in Ls:
        err = abs(exact_fn(L) - asym_fn(L))
        if err == 0.0 or not math.isfinite(err):
            raise ParameterError(f"degenerate error {err} at L={L}")
        errs.append(err)
    slope, _ = np.polyfit(np.log(Ls), np.log(errs), 1)
    return float(slope)
