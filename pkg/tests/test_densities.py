"""Density evaluation: kernels, forms, normalization, conditioning, domains."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnormal3d.densities import (
    DensityForm,
    MarginalForm,
    ModelParams,
    aw_parameters,
    f_3d,
    f_cn,
    f_n,
    f_r,
    f_x_given_yz,
    f_yz,
    f_yz_given_x,
    f_z,
    l_q,
    omega,
    pm_kernel,
)
from qnormal3d.errors import DomainError
from qnormal3d.qcore import support_halfwidth
from qnormal3d.quadrature import integrate1d, integrate2d

qs = st.floats(min_value=-0.9, max_value=0.9)
rhos = st.floats(min_value=-0.85, max_value=0.85)


def interior(q, frac):
    return frac * support_halfwidth(q)


class TestKernels:
    def test_l_q_values(self):
        assert l_q(2.0, 0.5, 0.0) == pytest.approx(0.25, abs=1e-15)
        assert l_q(0.0, 0.3, 0.7) == pytest.approx(1.69, abs=1e-15)
        assert l_q(1.4, 0.0, 0.5) == 1.0

    @given(x=st.floats(min_value=-2, max_value=2), a=rhos, q=qs)
    def test_l_q_even(self, x, a, q):
        assert l_q(x, a, q) == pytest.approx(l_q(-x, a, q), rel=1e-14)

    def test_omega_values(self):
        # the quadratic kernel at (1, 1, 0.5, 0.5):
        # 0.5625 - 0.5*0.5*1.25 + 0.5*0.25*2 = 0.5
        assert omega(1.0, 1.0, 0.5, 0.5) == pytest.approx(0.5, abs=1e-15)
        assert omega(0.4, -0.8, 0.0, 0.3) == 1.0

    @given(x=st.floats(min_value=-2, max_value=2), y=st.floats(min_value=-2, max_value=2), rho=rhos, q=qs)
    def test_omega_symmetric(self, x, y, rho, q):
        assert omega(x, y, rho, q) == pytest.approx(omega(y, x, rho, q), rel=1e-13, abs=1e-13)

    @given(x=st.floats(min_value=-1.9, max_value=1.9), r=st.floats(min_value=-0.8, max_value=0.8), q=qs)
    def test_omega_diagonal_collapses(self, x, r, q):
        assert omega(x, x, r, q) == pytest.approx(
            (1.0 - r) ** 2 * l_q(x, r, q), rel=1e-12, abs=1e-13
        )


class TestBaseDensity:
    def test_semicircle_at_q_zero(self):
        for x in (0.0, 0.5, -1.3, 1.9):
            assert f_n(x, 0.0) == pytest.approx(
                math.sqrt(4.0 - x * x) / (2.0 * math.pi), rel=1e-13
            )

    def test_vanishes_at_edge(self):
        for q in (-0.5, 0.0, 0.6):
            half = support_halfwidth(q)
            assert f_n(half, q) == pytest.approx(0.0, abs=1e-10)

    def test_outside_support_is_zero(self):
        assert f_n(2.5, 0.0) == 0.0
        assert f_n(-10.0, 0.5) == 0.0

    @given(q=qs)
    @settings(max_examples=25, deadline=None)
    def test_normalization(self, q):
        total = integrate1d(lambda x: f_n(x, q), q).value
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_rejects_bad_q(self):
        with pytest.raises(ValueError):
            f_n(0.0, 1.5)


class TestMarginalDensity:
    def test_frozen_kesten_mckay_value(self):
        assert f_r(0.7, 0.5, 0.0) == pytest.approx(0.22307483065827630, rel=1e-12)

    def test_reduces_to_base_at_zero(self):
        xs = np.linspace(-1.8, 1.8, 9)
        np.testing.assert_allclose(f_r(xs, 0.0, 0.5), f_n(xs, 0.5), rtol=1e-12)

    @given(r=st.floats(min_value=-0.75, max_value=0.75), q=qs)
    @settings(max_examples=20, deadline=None)
    def test_normalization(self, r, q):
        total = integrate1d(lambda x: f_r(x, r, q), q).value
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_rejects_bad_weight(self):
        with pytest.raises(ValueError):
            f_r(0.0, 1.0, 0.5)


class TestConditionalDensity:
    @given(y=st.floats(min_value=-1.5, max_value=1.5), rho=rhos, q=qs)
    @settings(max_examples=20, deadline=None)
    def test_normalization(self, y, rho, q):
        y0 = y * support_halfwidth(q) / 2.0
        total = integrate1d(lambda x: f_cn(x, y0, rho, q), q).value
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_zero_coupling_forgets_condition(self):
        xs = np.linspace(-1.7, 1.7, 11)
        np.testing.assert_allclose(f_cn(xs, 0.9, 0.0, 0.4), f_n(xs, 0.4), rtol=1e-12)

    def test_conditioning_point_outside_support(self):
        with pytest.raises(DomainError):
            f_cn(0.5, 99.0, 0.5, 0.5)


class TestPoissonMehlerKernel:
    @given(
        x=st.floats(min_value=-0.9, max_value=0.9),
        y=st.floats(min_value=-0.9, max_value=0.9),
        rho=st.floats(min_value=-0.7, max_value=0.7),
        q=qs,
    )
    @settings(max_examples=60, deadline=None)
    def test_forms_agree(self, x, y, rho, q):
        half = support_halfwidth(q)
        prod = pm_kernel(x * half, y * half, rho, q, form=DensityForm.PRODUCT)
        series = pm_kernel(x * half, y * half, rho, q, form=DensityForm.SERIES)
        assert series == pytest.approx(prod, rel=1e-9, abs=1e-12)

    def test_unit_at_zero_coupling(self):
        assert pm_kernel(0.3, -1.2, 0.0, 0.5) == pytest.approx(1.0, abs=1e-14)

    def test_conditional_factorization(self):
        # f_CN(x|y) = f_N(x) * kernel(x, y)
        x, y, rho, q = 0.4, -0.6, 0.55, 0.25
        assert f_cn(x, y, rho, q) == pytest.approx(
            f_n(x, q) * pm_kernel(x, y, rho, q), rel=1e-12
        )


class TestModelParams:
    def test_r_product(self):
        p = ModelParams(0.3, 0.4, 0.5, 0.5)
        assert p.r == pytest.approx(0.3 * 0.4 * 0.5, abs=1e-15)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ModelParams(1.0, 0.4, 0.5, 0.5)
        with pytest.raises(ValueError):
            ModelParams(0.3, 0.4, 0.5, 1.0)


class TestJointDensity:
    def test_three_forms_agree(self, params):
        gen = np.random.default_rng(11)
        half = support_halfwidth(params.q)
        pts = gen.uniform(-0.9 * half, 0.9 * half, size=(6, 3))
        ref = f_3d(pts[:, 0], pts[:, 1], pts[:, 2], params, form=DensityForm.PRODUCT)
        for form in (DensityForm.SERIES, DensityForm.CLOSED):
            alt = f_3d(pts[:, 0], pts[:, 1], pts[:, 2], params, form=form)
            np.testing.assert_allclose(alt, ref, rtol=1e-9)

    def test_pair_marginal_consistency(self, params):
        # integrating the joint density over x recovers the (y, z) margin
        y0, z0 = 0.5, -0.8
        got = integrate1d(lambda x: f_3d(x, y0, z0, params), params.q).value
        assert got == pytest.approx(f_yz(y0, z0, params), rel=1e-8)

    def test_independence_factorization(self):
        p = ModelParams(0.0, 0.0, 0.0, 0.4)
        x, y, z = 0.3, -0.7, 1.1
        assert f_3d(x, y, z, p) == pytest.approx(
            f_n(x, p.q) * f_n(y, p.q) * f_n(z, p.q), rel=1e-11
        )


class TestZMarginal:
    def test_all_forms_agree(self):
        r, q = 0.24, 0.5
        zs = np.linspace(-1.9, 1.9, 7)
        ref = f_z(zs, r, q, form=MarginalForm.ROGERS)
        for form in MarginalForm:
            np.testing.assert_allclose(f_z(zs, r, q, form=form), ref, rtol=1e-9)

    def test_matches_weighted_marginal(self):
        r, q = 0.15, 0.3
        for z in (0.0, 0.9, -1.4):
            assert f_z(z, r, q) == pytest.approx(f_r(z, r, q), rel=1e-11)


class TestConditionals:
    def test_forward_conditional_normalizes(self, params):
        y0, z0 = 0.6, -0.4
        total = integrate1d(lambda x: f_x_given_yz(x, y0, z0, params), params.q).value
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_reverse_conditional_normalizes(self, params):
        x0 = 0.8
        total = integrate2d(
            lambda y, z: f_yz_given_x(y, z, x0, params), params.q
        ).value
        assert total == pytest.approx(1.0, abs=1e-7)

    def test_bayes_consistency(self, params):
        x, y, z = 0.4, -0.3, 0.9
        joint = f_3d(x, y, z, params)
        assert f_x_given_yz(x, y, z, params) * f_yz(y, z, params) == pytest.approx(
            joint, rel=1e-10
        )
        fx = integrate2d(lambda yy, zz: f_3d(x, yy, zz, params), params.q).value
        assert f_yz_given_x(y, z, x, params) * fx == pytest.approx(joint, rel=1e-7)

    def test_aw_parameters_conjugate_pairs(self):
        a, b, c, d = aw_parameters(1.0, -0.5, 0.5, 0.4, 0.5)
        assert b == a.conjugate()
        assert d == c.conjugate()
        assert abs(a) == pytest.approx(0.5, rel=1e-13)
        assert abs(c) == pytest.approx(0.4, rel=1e-13)

    def test_aw_parameters_domain(self):
        with pytest.raises(DomainError):
            aw_parameters(99.0, 0.0, 0.5, 0.4, 0.5)
