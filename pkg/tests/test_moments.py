"""Closed-form moments against their quadrature oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnormal3d.densities import ModelParams
from qnormal3d.errors import DomainError, NonConvergence
from qnormal3d.moments import (
    ORACLES,
    CondMomentForm,
    MomentKind,
    MomentSpec,
    cond_exp_hn_x_given_yz,
    cond_exp_hn_y_given_z,
    cond_exp_x_given_yz,
    cond_exp_xy_given_z,
    cov_yz,
    covariance_matrix_limit,
    e_h2n_z,
    mixed_moment_h,
    var_z,
)
from qnormal3d.qcore import TruncationConfig

rhos = st.floats(min_value=-0.7, max_value=0.7)
qs = st.floats(min_value=-0.8, max_value=0.8)


class TestUnivariateClosedForms:
    def test_even_hermite_moment_plugin(self):
        assert e_h2n_z(1, 0.5, 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_variance_plugins(self):
        assert var_z(0.5, 0.0) == pytest.approx(1.5, abs=1e-15)
        assert var_z(0.3, 0.5) == pytest.approx(1.3 / 0.85, rel=1e-15)

    @given(r=st.floats(min_value=-0.7, max_value=0.7), q=qs)
    def test_variance_from_hermite_moment(self, r, q):
        # E z^2 = E H_2(z) + 1
        assert var_z(r, q) == pytest.approx(e_h2n_z(1, r, q) + 1.0, rel=1e-13)

    def test_covariance_plugin(self, params):
        # (rho23 + rho12 rho13) / (1 - r q)
        assert cov_yz(params) == pytest.approx(0.62 / 0.97, rel=1e-14)


class TestMixedMoments:
    def test_odd_parity_vanishes(self, params):
        assert mixed_moment_h(1, 2, params) == 0.0
        assert mixed_moment_h(3, 0, params) == 0.0

    def test_frozen_value(self, params):
        assert mixed_moment_h(2, 2, params) == pytest.approx(0.56062588309173689, rel=1e-12)

    def test_degenerate_truncation_raises(self, params):
        with pytest.raises(NonConvergence):
            mixed_moment_h(4, 4, params, s_max=4)

    def test_zero_zero_normalizes(self, params):
        assert mixed_moment_h(0, 0, params) == pytest.approx(1.0, rel=1e-12)


class TestOracleRegistry:
    def test_every_kind_has_closed_and_oracle(self, params):
        specs = {
            MomentKind.UNCONDITIONAL: MomentSpec(
                MomentKind.UNCONDITIONAL, (2,), params
            ),
            MomentKind.COND_X_GIVEN_YZ: MomentSpec(
                MomentKind.COND_X_GIVEN_YZ, (2,), params, (0.5, -0.3)
            ),
            MomentKind.COND_Y_GIVEN_Z: MomentSpec(
                MomentKind.COND_Y_GIVEN_Z, (2,), params, (0.4,)
            ),
            MomentKind.COND_XY_GIVEN_Z: MomentSpec(
                MomentKind.COND_XY_GIVEN_Z, (1, 1), params, (0.4,)
            ),
        }
        assert set(ORACLES) == set(MomentKind)
        for kind, spec in specs.items():
            closed_fn, oracle_fn = ORACLES[kind]
            closed = closed_fn(spec)
            oracle = oracle_fn(spec)
            assert closed == pytest.approx(oracle, rel=1e-6, abs=1e-8)

    def test_spec_validates_points(self, params):
        with pytest.raises(DomainError):
            MomentSpec(MomentKind.COND_Y_GIVEN_Z, (2,), params, (99.0,))

    def test_spec_validates_degrees(self, params):
        with pytest.raises(ValueError):
            MomentSpec(MomentKind.UNCONDITIONAL, (-1,), params)


class TestConditionalForms:
    @given(
        r12=rhos,
        r13=rhos,
        r23=rhos,
        q=st.floats(min_value=-0.6, max_value=0.6),
        n=st.integers(min_value=0, max_value=4),
    )
    @settings(max_examples=60, deadline=None)
    def test_three_routes_agree(self, r12, r13, r23, q, n):
        p = ModelParams(r12, r13, r23, q)
        y, z = 0.45, -0.25
        ref = cond_exp_hn_x_given_yz(n, y, z, p.rho12, p.rho13, q, form=CondMomentForm.ASC_EXPANSION)
        for form in (CondMomentForm.DOUBLE_SUM, CondMomentForm.ASC_IMAGE):
            alt = cond_exp_hn_x_given_yz(n, y, z, p.rho12, p.rho13, q, form=form)
            assert alt == pytest.approx(ref, rel=1e-9, abs=1e-9)

    def test_linear_case_closed_form(self, params):
        y, z = 0.6, -0.4
        r12, r13 = params.rho12, params.rho13
        expected = (y * r12 * (1 - r13**2) + z * r13 * (1 - r12**2)) / (
            1 - r12**2 * r13**2
        )
        assert cond_exp_x_given_yz(y, z, r12, r13, params.q) == pytest.approx(
            expected, rel=1e-12
        )
        assert cond_exp_hn_x_given_yz(
            1, y, z, params.rho12, params.rho13, params.q
        ) == pytest.approx(expected, rel=1e-12)

    def test_third_correlation_does_not_enter(self, params):
        # the forward conditional mean depends on rho12, rho13 only, so the
        # quadrature oracle must agree across different rho23
        _, oracle_fn = ORACLES[MomentKind.COND_X_GIVEN_YZ]
        other = ModelParams(params.rho12, params.rho13, -0.2, params.q)
        y, z = 0.7, 0.2
        a = oracle_fn(MomentSpec(MomentKind.COND_X_GIVEN_YZ, (1,), params, (y, z)))
        b = oracle_fn(MomentSpec(MomentKind.COND_X_GIVEN_YZ, (1,), other, (y, z)))
        assert a == pytest.approx(b, abs=1e-10)

    def test_decoupled_z_drops_out(self):
        p = ModelParams(0.5, 0.0, 0.3, 0.4)
        v1 = cond_exp_hn_x_given_yz(3, 0.5, 1.2, p.rho12, p.rho13, p.q)
        v2 = cond_exp_hn_x_given_yz(3, 0.5, -0.8, p.rho12, p.rho13, p.q)
        assert v1 == pytest.approx(v2, rel=1e-13)


class TestSingleConditionedMoments:
    def test_matches_oracle_low_degrees(self, params):
        closed_fn, oracle_fn = ORACLES[MomentKind.COND_Y_GIVEN_Z]
        for n in range(1, 5):
            for z in (0.0, 0.8, -1.1):
                spec = MomentSpec(MomentKind.COND_Y_GIVEN_Z, (n,), params, (z,))
                assert closed_fn(spec) == pytest.approx(
                    oracle_fn(spec), rel=1e-7, abs=1e-7
                )

    def test_tower_property(self, params):
        # averaging the conditional first moment over the margin recovers 0
        from qnormal3d.densities import f_z
        from qnormal3d.quadrature import integrate1d

        val = integrate1d(
            lambda z: np.array(
                [cond_exp_hn_y_given_z(1, float(zz), params) for zz in np.atleast_1d(z)]
            )
            * f_z(z, params.r, params.q),
            params.q,
        ).value
        assert val == pytest.approx(0.0, abs=1e-9)

    def test_product_moment_consistency(self, params):
        closed_fn, oracle_fn = ORACLES[MomentKind.COND_XY_GIVEN_Z]
        spec = MomentSpec(MomentKind.COND_XY_GIVEN_Z, (1, 1), params, (0.7,))
        assert closed_fn(spec) == pytest.approx(oracle_fn(spec), rel=1e-7, abs=1e-7)
        assert cond_exp_xy_given_z(0.7, params) == pytest.approx(closed_fn(spec), rel=1e-13)


class TestLimitCovariance:
    def test_matrix_values(self, params):
        mat = covariance_matrix_limit(params)
        d = (1 + params.r) / (1 - params.r)
        assert mat[0, 0] == pytest.approx(d, rel=1e-14)
        assert mat[0, 1] == pytest.approx(
            (params.rho12 + params.rho13 * params.rho23) / (1 - params.r), rel=1e-14
        )
        np.testing.assert_allclose(mat, mat.T, atol=0)

    def test_frozen_entry(self, params):
        assert covariance_matrix_limit(params)[0, 1] == pytest.approx(
            0.53191489361702127, rel=1e-13
        )

    def test_positive_definite_on_grid(self):
        for r23 in (0.3, -0.6):
            p = ModelParams(0.3, -0.6, r23, 0.7)
            eigvals = np.linalg.eigvalsh(covariance_matrix_limit(p))
            assert np.all(eigvals > 0)
