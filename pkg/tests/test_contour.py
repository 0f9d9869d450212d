"""Contour quadrature tests: Cauchy checks, deformation identities, oracles."""

import math

import numpy as np
import pytest

from qtazrp import contour as ct
from qtazrp.errors import ContourError, ParameterError
from qtazrp.exact import LatticeParams
from qtazrp.specfun import poisson_cdf


def params(q=0.5, x1=0, x2=1, y1=2, y2=3, t=1.0, n1=1, n2=1):
    return LatticeParams(q=q, n1=n1, n2=n2, x1=x1, x2=x2, y1=y1, y2=y2, t=t)


class TestQuadClosed:
    def test_cauchy_unit_residue(self):
        c = ct.Contour("circle", 0.0, 1.5, 64)
        val = ct.quad_closed(c, lambda w: 1.0 / w)
        assert val.real == pytest.approx(1.0, abs=1e-12)
        assert abs(val.imag) < 1e-12

    def test_no_enclosed_pole(self):
        c = ct.Contour("circle", 1.0, 0.1, 64)
        val = ct.quad_closed(c, lambda w: 1.0 / w)
        assert abs(val) < 1e-12

    def test_residues_cancel(self):
        c = ct.Contour("circle", 0.0, 1.5, 256)
        val = ct.quad_closed(c, lambda w: 1.0 / (w * (1.0 - w)))
        assert abs(val) < 1e-10

    def test_orientation_flip(self):
        c = ct.Contour("circle", 0.0, 1.5, 64, orientation=-1)
        val = ct.quad_closed(c, lambda w: 1.0 / w)
        assert val.real == pytest.approx(-1.0, abs=1e-12)

    def test_segment_constant(self):
        seg = ct.Contour("vline", 0.5, 2.0, 257)
        # (1/2 pi i) * integral of 1 along the segment = (2h i)/(2 pi i)
        val = ct.quad_segment(seg, lambda w: np.ones_like(w))
        assert val == pytest.approx(2.0 / math.pi, rel=1e-12)

    def test_kind_mismatch(self):
        with pytest.raises(ParameterError):
            ct.quad_closed(ct.Contour("vline", 0.0, 1.0, 64), lambda w: w)


class TestQuadDouble:
    def test_product_of_cauchy_integrals(self):
        c = ct.Contour("circle", 0.0, 1.5, 128)
        val = ct.quad_double(c, c, lambda w1, w2: 1.0 / (w1 * w2))
        assert val.real == pytest.approx(1.0, abs=1e-12)

    def test_separable_fubini(self):
        c1 = ct.Contour("circle", 0.0, 1.2, 128)
        c2 = ct.Contour("circle", 1.0, 0.3, 128)
        f = lambda w: 1.0 / (w - 0.1)
        g = lambda w: 1.0 / (w - 1.05)
        prod = ct.quad_double(c1, c2, lambda w1, w2: f(w1) * g(w2))
        expected = ct.quad_closed(c1, f) * ct.quad_closed(c2, g)
        assert prod == pytest.approx(expected, abs=1e-12)

    def test_same_circle_kernel_never_collides(self):
        q = 0.9
        c = ct.Contour("circle", 0.0, 1.5, 256)
        w = c.points()
        dist = np.abs(w[:, None] - q * w[None, :])
        assert dist.min() >= 1.5 * (1.0 - q) - 1e-12


class TestFamilies:
    @pytest.mark.parametrize("q", [0.5, 0.9])
    def test_default_contours_windings(self, q):
        fam = ct.default_contours(q)
        assert ct.winding_number(fam.large, 0.0) == pytest.approx(1.0, abs=1e-6)
        assert ct.winding_number(fam.large, 1.0) == pytest.approx(1.0, abs=1e-6)
        assert ct.winding_number(fam.small_outer, 0.0) == pytest.approx(0.0, abs=1e-6)
        assert ct.winding_number(fam.small_outer, 1.0) == pytest.approx(1.0, abs=1e-6)
        assert ct.winding_number(fam.small_inner, 0.0) == pytest.approx(0.0, abs=1e-6)
        assert ct.winding_number(fam.small_inner, 1.0) == pytest.approx(1.0, abs=1e-6)

    def test_default_contours_q05_geometry(self):
        fam = ct.default_contours(0.5)
        assert fam.small_outer.center == pytest.approx(0.75)
        assert fam.small_outer.radius == pytest.approx(0.35)
        # q * inner = circle(0.5, 0.05) strictly inside the outer contour
        assert fam.pole_clearance() > 0.0

    def test_bad_family_rejected(self):
        fam = ct.ContourFamily(
            large=ct.Contour("circle", 0.0, 1.5, 128),
            small_outer=ct.Contour("circle", 1.0, 0.05, 128),  # misses q*inner
            small_inner=ct.Contour("circle", 1.0, 0.1, 128),
            q=0.5,
        )
        with pytest.raises(ContourError):
            fam.validate()

    def test_adapted_small_pair_valid(self):
        for q in (0.2, 0.5, 0.9):
            for m1, m2, t in [(0, 0, 0.0), (5, 30, 2.0), (40, 40, 10.0),
                              (-3, 12, 1.0)]:
                outer, inner = ct.adapted_small_pair(q, m1, m2, t)
                fam = ct.ContourFamily(
                    large=ct.Contour("circle", 0.0, 1.5, 128),
                    small_outer=outer, small_inner=inner, q=q)
                fam.validate(samples=12)


class TestSmallSingle:
    @pytest.mark.parametrize("t", [0.5, 2.0, 8.0])
    def test_poisson_residue_oracle(self, t):
        for m in range(0, 31):
            val = ct.eval_small_single(m, t)
            assert val == pytest.approx(
                ct.SMALL_SINGLE_SIGN * poisson_cdf(m, t), abs=1e-10)

    def test_analytic_inside_gives_zero(self):
        for t in (0.0, 1.0, 7.0):
            assert abs(ct.eval_small_single(-1, t)) < 1e-12
            assert abs(ct.eval_small_single(-4, t)) < 1e-12

    def test_explicit_contour(self):
        c = ct.Contour("circle", 1.0, 0.35, 256)
        assert ct.eval_small_single(0, 1.0, c) == pytest.approx(
            -math.exp(-1.0), abs=1e-11)


class TestKernelIntegrals:
    def test_q4_radius_invariance_large(self):
        p = params(y1=0, y2=0, t=0.0)
        v = []
        for radius in (1.3, 1.7):
            fam = ct.ContourFamily(
                large=ct.Contour("circle", 0.0, radius, 512),
                small_outer=ct.default_contours(p.q).small_outer,
                small_inner=ct.default_contours(p.q).small_inner,
                q=p.q)
            v.append(ct.eval_q4(p, fam))
        assert abs(v[0] - v[1]) < 1e-10

    def test_q4_t0_m0_is_zero(self):
        # residues at 0, 1, q cancel pairwise for unit exponents at t = 0
        p = params(y1=0, y2=0, t=0.0)
        assert ct.eval_q4(p) == pytest.approx(0.0, abs=1e-11)

    def test_q5_inner_radius_invariance(self):
        p = params(q=0.5, t=1.0)
        fam1 = ct.default_contours(0.5, nodes=512)
        v1 = ct.eval_q5(p, fam1)
        fam2 = ct.ContourFamily(
            large=fam1.large,
            small_outer=fam1.small_outer,
            small_inner=ct.Contour("circle", 1.0, 0.07, 512),
            q=0.5).validate()
        v2 = ct.eval_q5(p, fam2)
        v3 = ct.eval_q5(p)  # adapted geometry
        assert abs(v1 - v2) < 1e-9
        assert abs(v1 - v3) < 1e-9

    def test_q4_deformation_identity_sweep(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            q = rng.uniform(0.2, 0.9)
            t = rng.uniform(0.0, 10.0)
            x2 = int(rng.integers(1, 4))
            y1 = int(rng.integers(-3, 41))
            y2 = int(rng.integers(-3, 41))
            p = params(q=q, x2=x2, y1=y1, y2=y2, t=t)
            assert ct.eval_q4(p) == pytest.approx(
                ct.eval_q4_deformed(p), abs=1e-9)

    def test_imaginary_parts_negligible(self):
        p = params(q=0.7, y1=5, y2=8, t=3.0)
        assert ct._q5_full(p).imag_abs < 1e-9
        assert ct._q6_full(p, q1=0.3).imag_abs < 1e-9
        assert ct._q4_direct_full(p).imag_abs < 1e-9

    def test_q5_decays_at_large_time(self):
        p = params(q=0.5, y1=2, y2=3, t=50.0)
        assert abs(ct.eval_q5(p)) < 1e-6

    def test_node_doubling_stability(self):
        p = params(q=0.6, y1=7, y2=11, t=4.0)
        a = ct.eval_q5(p, nodes=256)
        b = ct.eval_q5(p, nodes=512)
        assert abs(a - b) < 1e-9


@pytest.mark.parametrize("q,m1,m2,t", [
    (0.5, 0, 0, 0.0),
    (0.5, 2, 3, 0.0),
    (0.3, 1, 2, 1.0),
    (0.8, 0, 2, 2.0),
])
def test_small_double_against_residue_oracle(q, m1, m2, t):
    """Independent oracle: two-variable residue sum done symbolically."""
    sp = pytest.importorskip("sympy")
    w1, w2 = sp.symbols("w1 w2")
    qq = sp.Rational(q).limit_denominator(100)
    tt = sp.Rational(t).limit_denominator(100)
    f = ((w1 - w2) / ((w1 - qq * w2) * w1 * w2)
         * (1 - w1) ** (-(m1 + 1)) * (1 - w2) ** (-(m2 + 1))
         * sp.exp(-(w1 + w2) * tt))
    inner = sp.residue(f, w2, 1)
    oracle = sp.residue(inner, w1, 1) + sp.residue(inner, w1, qq)
    oracle = float(sp.N(oracle, 30))
    got = ct._small_double_full(float(qq), m1, m2, float(tt))
    assert got.real == pytest.approx(oracle, abs=1e-11)


def test_q4_against_residue_oracle():
    sp = pytest.importorskip("sympy")
    w1, w2 = sp.symbols("w1 w2")
    q, m1, m2, t = sp.Rational(1, 2), 2, 3, 1
    f = ((w1 - w2) / ((w1 - q * w2) * w1 * w2)
         * (1 - w1) ** (-(m1 + 1)) * (1 - w2) ** (-(m2 + 1))
         * sp.exp(-(w1 + w2) * t))
    inner = sp.residue(f, w2, 0) + sp.residue(f, w2, 1)
    oracle = (sp.residue(inner, w1, 0) + sp.residue(inner, w1, 1)
              + sp.residue(inner, w1, q))
    oracle = float(sp.N(oracle, 30))
    p = params(q=0.5, x1=0, x2=1, y1=2, y2=3, t=1.0)
    assert ct.eval_q4(p) == pytest.approx(oracle, abs=1e-11)
    assert ct.eval_q4_deformed(p) == pytest.approx(oracle, abs=1e-11)
