"""Recurrence-built polynomial families and their exact cross-relations."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnormal3d.polynomials import (
    PolySequence,
    asc_poly,
    chebyshev_U,
    h_squared_linearization,
    hermite_prob,
    q_hermite,
    rogers_C,
    rogers_monic,
    triple_product_integral,
    w_poly,
)
from qnormal3d.qcore import q_factorial, q_number, q_pochhammer

qs = st.floats(min_value=-0.9, max_value=0.9)
xs = st.floats(min_value=-1.8, max_value=1.8)
degrees = st.integers(min_value=0, max_value=10)


class TestQHermite:
    def test_low_degrees_closed_form(self):
        x, q = 1.2, 0.3
        vals = q_hermite(4, x, q).values
        assert vals[0] == 1.0
        assert vals[1] == x
        assert vals[2] == pytest.approx(x * x - 1.0, abs=1e-15)
        assert vals[3] == pytest.approx(x**3 - (2.0 + q) * x, abs=1e-14)
        assert vals[4] == pytest.approx(-1.85, abs=1e-14)

    def test_frozen_value(self):
        assert q_hermite(3, 1.0, 0.5).values[3] == pytest.approx(-1.5, abs=1e-15)

    @given(x=xs, q=qs, n=st.integers(min_value=1, max_value=12))
    @settings(max_examples=150)
    def test_recurrence(self, x, q, n):
        vals = q_hermite(n + 1, x, q).values
        lhs = vals[n + 1]
        rhs = x * vals[n] - q_number(n, q) * vals[n - 1]
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    @given(x=xs, n=st.integers(min_value=0, max_value=10))
    def test_q_one_is_probabilists_hermite(self, x, n):
        lhs = q_hermite(n, x, 1.0).values[n]
        rhs = hermite_prob(n, x).values[n]
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    @given(theta=st.floats(min_value=0.1, max_value=3.0), n=degrees)
    def test_q_zero_is_chebyshev(self, theta, n):
        c = np.cos(theta)
        lhs = q_hermite(n, 2.0 * c, 0.0).values[n]
        rhs = chebyshev_U(n, c).values[n]
        assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)

    def test_vector_points(self):
        xs_arr = np.linspace(-1.5, 1.5, 7)
        seq = q_hermite(5, xs_arr, 0.4)
        assert seq.values.shape == (6, 7)
        for i, x in enumerate(xs_arr):
            assert seq.values[3, i] == pytest.approx(q_hermite(3, float(x), 0.4).values[3])


class TestChebyshev:
    @given(theta=st.floats(min_value=0.2, max_value=2.9), n=degrees)
    def test_sine_ratio(self, theta, n):
        val = chebyshev_U(n, np.cos(theta)).values[n]
        assert val == pytest.approx(np.sin((n + 1) * theta) / np.sin(theta), rel=1e-10, abs=1e-10)


class TestAlSalamChihara:
    def test_reduces_to_q_hermite_at_zero_coupling(self):
        vals = asc_poly(4, 0.9, 0.2, 0.0, 0.5).values
        ref = q_hermite(4, 0.9, 0.5).values
        np.testing.assert_allclose(vals, ref, rtol=1e-14)

    @given(x=xs, y=xs, rho=st.floats(min_value=-0.85, max_value=0.85), q=qs)
    @settings(max_examples=150)
    def test_recurrence(self, x, y, rho, q):
        n = 4
        vals = asc_poly(n + 1, x, y, rho, q).values
        lhs = vals[n + 1]
        rhs = (x - rho * q**n * y) * vals[n] - (
            1.0 - rho * rho * q ** (n - 1)
        ) * q_number(n, q) * vals[n - 1]
        assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)

    def test_degree_zero_and_one(self):
        vals = asc_poly(1, 0.7, -0.4, 0.6, 0.3).values
        assert vals[0] == 1.0
        assert vals[1] == pytest.approx(0.7 - 0.6 * (-0.4), abs=1e-15)


class TestRogers:
    def test_reduces_to_q_hermite_at_zero(self):
        np.testing.assert_allclose(
            rogers_monic(5, 0.9, 0.0, 0.5).values,
            q_hermite(5, 0.9, 0.5).values,
            rtol=1e-14,
        )

    def test_q_zero_degree_two(self):
        # at q = 0 the monic family has p2 = x^2 - (1 + r)
        x, r = 1.1, 0.35
        assert rogers_monic(2, x, r, 0.0).values[2] == pytest.approx(
            x * x - (1.0 + r), abs=1e-14
        )

    @given(
        theta=st.floats(min_value=0.3, max_value=2.8),
        r=st.floats(min_value=-0.8, max_value=0.8),
        n=st.integers(min_value=2, max_value=8),
    )
    @settings(max_examples=100)
    def test_q_zero_chebyshev_combination(self, theta, r, n):
        # at q = 0, on the doubled argument, p_n = U_n - r U_{n-2};
        # the classically scaled family picks up the prefactor (1 - r)
        c = np.cos(theta)
        combo = chebyshev_U(n, c).values[n] - r * chebyshev_U(n - 2, c).values[n - 2]
        assert rogers_monic(n, 2.0 * c, r, 0.0).values[n] == pytest.approx(
            combo, rel=1e-10, abs=1e-10
        )
        assert rogers_C(n, c, r, 0.0).values[n] == pytest.approx(
            (1.0 - r) * combo, rel=1e-10, abs=1e-10
        )

    def test_scaled_matches_monic(self):
        # C_n(x|b,q) = ((b)_n / (q)_n) (1-q)^(n/2) p_n(2x/sqrt(1-q))
        n, x, b, q = 4, 0.45, 0.3, 0.6
        scale = (
            q_pochhammer(b, q, n)
            / q_pochhammer(q, q, n)
            * (1.0 - q) ** (n / 2.0)
        )
        monic = rogers_monic(n, 2.0 * x / np.sqrt(1.0 - q), b, q).values[n]
        assert rogers_C(n, x, b, q).values[n] == pytest.approx(scale * monic, rel=1e-12)


class TestTripleProduct:
    def test_parity_zero(self):
        assert triple_product_integral(1, 1, 1, 0.5) == 0.0
        assert triple_product_integral(2, 1, 0, 0.5) == 0.0

    def test_triangle_violation_zero(self):
        assert triple_product_integral(5, 1, 1, 0.5) == 0.0

    def test_frozen_value(self):
        # E H1 H1 H2 = [2]! / ([0]! [1]! [1]!) ... = q-multinomial form
        assert triple_product_integral(1, 1, 2, 0.5) == pytest.approx(1.5, abs=1e-14)

    @given(
        k=st.integers(min_value=0, max_value=5),
        m=st.integers(min_value=0, max_value=5),
        n=st.integers(min_value=0, max_value=5),
        q=qs,
    )
    @settings(max_examples=150)
    def test_symmetry(self, k, m, n, q):
        ref = triple_product_integral(k, m, n, q)
        assert triple_product_integral(m, k, n, q) == pytest.approx(ref, rel=1e-12)
        assert triple_product_integral(n, m, k, q) == pytest.approx(ref, rel=1e-12)


class TestHSquared:
    @given(j=st.integers(min_value=0, max_value=6), q=qs)
    def test_end_coefficients(self, j, q):
        # leading term is monic; the constant term carries the squared norm
        coeffs = h_squared_linearization(j, q)
        assert coeffs[j] == pytest.approx(1.0, rel=1e-12)
        assert coeffs[0] == pytest.approx(q_factorial(j, q), rel=1e-12)

    @given(x=xs, q=qs, j=st.integers(min_value=0, max_value=6))
    @settings(max_examples=150)
    def test_expansion_evaluates(self, x, q, j):
        coeffs = h_squared_linearization(j, q)
        evens = q_hermite(2 * j, x, q).values
        recombined = sum(coeffs[k] * evens[2 * k] for k in range(j + 1))
        direct = q_hermite(j, x, q).values[j] ** 2
        assert recombined == pytest.approx(direct, rel=1e-10, abs=1e-10)


class TestConnectionPolynomials:
    def test_boundary_values(self):
        assert w_poly(0, 0, 0.8, 0.3, 0.5) == pytest.approx(1.0, abs=1e-15)
        assert w_poly(1, 0, 0.8, 0.3, 0.5) == pytest.approx(0.8 / 1.3, rel=1e-14)

    def test_frozen_values(self):
        assert w_poly(1, 1, 0.8, 0.3, 0.5) == pytest.approx(0.67498993153443410, rel=1e-13)
        assert w_poly(2, 0, 0.8, 0.3, 0.5) == pytest.approx(-0.60894079742247280, rel=1e-13)

    @given(
        k=st.integers(min_value=0, max_value=4),
        m=st.integers(min_value=0, max_value=4),
        x=xs,
        r=st.floats(min_value=-0.8, max_value=0.8),
        q=qs,
    )
    @settings(max_examples=150)
    def test_symmetry(self, k, m, x, r, q):
        assert w_poly(k, m, x, r, q) == pytest.approx(
            w_poly(m, k, x, r, q), rel=1e-10, abs=1e-10
        )

    def test_defining_ratio_numerically(self):
        # sum_i r^i H_{i+k} H_{i+m} / [i]! == W_{k,m} * sum_i r^i H_i^2 / [i]!
        x, r, q, k, m = 0.6, 0.35, 0.45, 2, 1
        terms = 80
        vals = q_hermite(terms + max(k, m), x, q).values
        shifted = sum(
            r**i * vals[i + k] * vals[i + m] / q_factorial(i, q) for i in range(terms)
        )
        base = sum(r**i * vals[i] ** 2 / q_factorial(i, q) for i in range(terms))
        assert shifted / base == pytest.approx(w_poly(k, m, x, r, q), rel=1e-11)


class TestPolySequence:
    def test_shape_and_order(self):
        seq = q_hermite(3, 0.5, 0.2)
        assert isinstance(seq, PolySequence)
        assert seq.values.shape == (4,)
