"""Closed-form moments of the three-dimensional q-Normal law.

Every closed form exposed here is paired with a quadrature oracle through
the :data:`ORACLES` registry, so each formula can be checked against direct
numerical integration of the densities it summarizes.  The registry is part
of the public test surface: tests iterate it rather than hand-wiring pairs.

Unconditional moments cover the single-coordinate q-Hermite expectations
and the mixed two-coordinate expectation (a truncated double series).
Conditional moments cover E(H_n(X) | Y, Z) in three equivalent forms,
E(H_n(Y) | Z) as a finite combination of connection polynomials, and the
product moment E(XY | Z).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from .densities import ModelParams, f_3d, f_x_given_yz, f_yz, f_z
from .errors import DomainError, NonConvergence
from .polynomials import asc_poly, q_hermite, w_poly
from .qcore import (
    DEFAULT_TRUNCATION,
    TruncationConfig,
    q_binomial,
    q_factorial,
    q_number,
    q_pochhammer,
    support_halfwidth,
)
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, integrate1d, integrate2d


class MomentKind(enum.Enum):
    """Which conditioning structure a moment request refers to."""

    UNCONDITIONAL = "unconditional"
    COND_X_GIVEN_YZ = "cond-x-given-yz"
    COND_Y_GIVEN_Z = "cond-y-given-z"
    COND_XY_GIVEN_Z = "cond-xy-given-z"


class CondMomentForm(enum.Enum):
    """Evaluation routes for E(H_n(X) | Y, Z).

    ASC_EXPANSION expands H_n(x) against the Al-Salam-Chihara family in the
    conditioning variable y.  DOUBLE_SUM is the fully expanded double series
    in q-Hermite values of both conditioning variables.  ASC_IMAGE converts
    H_n numerically into the Al-Salam-Chihara basis and pushes each basis
    element through its one-line conditional expectation.
    """

    ASC_EXPANSION = "asc-expansion"
    DOUBLE_SUM = "double-sum"
    ASC_IMAGE = "asc-image"


@dataclass(frozen=True)
class MomentSpec:
    """A single moment request: what to average, under which law, where.

    ``degrees`` holds the q-Hermite degrees involved: one entry for a
    single-coordinate moment, two for a mixed or product moment.  ``points``
    holds the conditioning values (empty for unconditional moments, (y, z)
    for conditioning on both coordinates, (z,) for conditioning on one).
    """

    kind: MomentKind
    degrees: Tuple[int, ...]
    params: ModelParams
    points: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not self.degrees:
            raise ValueError("degrees must be a nonempty tuple")
        if any((not isinstance(d, int)) or d < 0 for d in self.degrees):
            raise ValueError(f"degrees must be nonnegative integers, got {self.degrees}")
        half = support_halfwidth(self.params.q)
        for pt in self.points:
            if abs(pt) > half:
                raise DomainError(
                    f"conditioning point {pt} outside the support [-{half}, {half}]"
                )


def e_h2n_z(n: int, r: float, q: float) -> float:
    """E H_{2n}(Z) for Z following the one-coordinate marginal with ratio r.

    Closed form r^n [2n]_q! / ([n]_q! (rq; q)_n).  The degree argument is n,
    half the q-Hermite degree; odd-degree expectations vanish by symmetry
    and are handled by :func:`closed_form` rather than here.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if abs(r) >= 1 or abs(q) >= 1:
        raise ValueError(f"need |r| < 1 and |q| < 1, got r={r}, q={q}")
    if n == 0:
        return 1.0
    return (
        r**n
        * q_factorial(2 * n, q)
        / (q_factorial(n, q) * q_pochhammer(r * q, q, n))
    )


def var_z(r: float, q: float) -> float:
    """Variance (1 + r) / (1 - rq) of the one-coordinate marginal."""
    if abs(r) >= 1 or abs(q) >= 1:
        raise ValueError(f"need |r| < 1 and |q| < 1, got r={r}, q={q}")
    return (1.0 + r) / (1.0 - r * q)


def cov_yz(p: ModelParams) -> float:
    """Covariance (rho23 + rho12 rho13) / (1 - rq) of two coordinates."""
    if abs(p.q) >= 1:
        raise ValueError(f"need |q| < 1, got q={p.q}")
    return (p.rho23 + p.rho12 * p.rho13) / (1.0 - p.r * p.q)


def mixed_moment_h(
    m: int,
    n: int,
    p: ModelParams,
    s_max: int | None = None,
    cfg: TruncationConfig = DEFAULT_TRUNCATION,
) -> float:
    """E H_m(Y) H_n(Z) as a truncated double series.

    The series runs over bands s >= max(m, n) of total linearization degree,
    each band a short sum over k with q-binomial weights; band size decays
    geometrically in max(|rho23|, |rho12 rho13|).  The prefactor (1 - r)
    multiplies the whole series.  Raises NonConvergence when the final band
    still contributes more than ``cfg.tail_tol`` relative to the total.
    """
    if m < 0 or n < 0:
        raise ValueError(f"degrees must be nonnegative, got ({m}, {n})")
    if abs(p.q) >= 1:
        raise ValueError(f"need |q| < 1, got q={p.q}")
    if (m - n) % 2:
        return 0.0
    if s_max is None:
        s_max = m + n + 60
    q = p.q
    a = p.rho23
    b = p.rho12 * p.rho13
    fact = [1.0]
    for i in range(1, s_max + 2):
        fact.append(fact[-1] * q_number(i, q))
    total = 0.0
    last_band = 0.0
    mu = min(m, n)
    for s in range(max(m, n), s_max + 1, 2):
        pref = 1.0 / (fact[(s - m) // 2] * fact[(s - n) // 2])
        band = 0.0
        for k in range((s - mu) // 2, (s + mu) // 2 + 1):
            cm = q_binomial(m, k - (s - m) // 2, q)
            cn = q_binomial(n, k - (s - n) // 2, q)
            if cm == 0.0 or cn == 0.0:
                continue
            band += a**k * b ** (s - k) * cm * cn * fact[k] * fact[s - k]
        band *= pref
        total += band
        last_band = abs(band)
    scale = max(1.0, abs(total))
    if last_band > cfg.tail_tol * scale:
        raise NonConvergence(
            f"mixed moment series tail {last_band:.3e} above tolerance "
            f"{cfg.tail_tol:.1e} at s_max={s_max}; increase s_max"
        )
    return (1.0 - p.r) * total


def _asc_basis_coeffs(n: int, y: float, rho12: float, q: float) -> np.ndarray:
    """Coefficients writing H_n(x) in the Al-Salam-Chihara basis in x.

    Solved numerically from values on n + 1 spread-out nodes instead of by
    coefficient recursion, so no basis-change convention is needed.
    """
    half = support_halfwidth(q)
    nodes = np.linspace(-0.9 * half, 0.9 * half, n + 1)
    basis = asc_poly(n, nodes, y, rho12, q).values
    target = q_hermite(n, nodes, q).values[n]
    return np.linalg.solve(basis.T, target)


def cond_exp_pn_x_given_yz(
    n: int, y: float, z: float, rho12: float, rho13: float, q: float
) -> float:
    """E(P_n(X | y, rho12) | Y=y, Z=z) for the Al-Salam-Chihara family.

    The image is a single Al-Salam-Chihara polynomial in z with shifted
    parameter rho12 rho13, scaled by a Pochhammer ratio.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    half = support_halfwidth(q)
    if abs(y) > half or abs(z) > half:
        raise DomainError(f"conditioning point outside the support [-{half}, {half}]")
    num = q_pochhammer(rho12**2, q, n)
    den = q_pochhammer(rho12**2 * rho13**2, q, n)
    pz = asc_poly(n, z, y, rho12 * rho13, q).values[n]
    return float(rho13**n * num / den * pz)


def cond_exp_hn_x_given_yz(
    n: int,
    y: float,
    z: float,
    rho12: float,
    rho13: float,
    q: float,
    form: CondMomentForm = CondMomentForm.ASC_EXPANSION,
) -> float:
    """E(H_n(X) | Y=y, Z=z), a polynomial of total degree n in (y, z).

    The conditional law of X given both other coordinates depends only on
    rho12 and rho13, so rho23 does not appear.  All three forms agree to
    near machine precision; they differ in how the answer is organized.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    half = support_halfwidth(q)
    if abs(y) > half or abs(z) > half:
        raise DomainError(f"conditioning point outside the support [-{half}, {half}]")
    if n == 0:
        return 1.0
    if form is CondMomentForm.ASC_EXPANSION:
        hy = q_hermite(n, y, q).values
        pz = asc_poly(n, z, y, rho12 * rho13, q).values
        total = 0.0
        for s in range(n + 1):
            total += (
                q_binomial(n, s, q)
                * rho12 ** (n - s)
                * rho13**s
                * q_pochhammer(rho12**2, q, s)
                / q_pochhammer(rho12**2 * rho13**2, q, s)
                * hy[n - s]
                * pz[s]
            )
        return float(total)
    if form is CondMomentForm.DOUBLE_SUM:
        hz = q_hermite(n, z, q).values
        hy = q_hermite(n, y, q).values
        total = 0.0
        for k in range(n // 2 + 1):
            outer = (
                (-1) ** k
                * q ** (k * (k - 1) // 2)
                * q_binomial(n, 2 * k, q)
                * q_binomial(2 * k, k, q)
                * q_factorial(k, q)
                * (rho12 * rho13) ** (2 * k)
                * q_pochhammer(rho12**2, q, k)
                * q_pochhammer(rho13**2, q, k)
            )
            inner = 0.0
            for j in range(n - 2 * k + 1):
                inner += (
                    q_binomial(n - 2 * k, j, q)
                    * q_pochhammer(rho12**2 * q**k, q, j)
                    * q_pochhammer(rho13**2 * q**k, q, n - 2 * k - j)
                    * rho12 ** (n - 2 * k - j)
                    * rho13**j
                    * hz[j]
                    * hy[n - 2 * k - j]
                )
            total += outer * inner
        return float(total / q_pochhammer(rho12**2 * rho13**2, q, n))
    if form is CondMomentForm.ASC_IMAGE:
        coeffs = _asc_basis_coeffs(n, float(y), rho12, q)
        total = 0.0
        for s in range(n + 1):
            total += coeffs[s] * cond_exp_pn_x_given_yz(s, y, z, rho12, rho13, q)
        return float(total)
    raise ValueError(f"unknown form {form!r}")


def cond_exp_x_given_yz(y: float, z: float, rho12: float, rho13: float, q: float) -> float:
    """E(X | Y=y, Z=z): linear in (y, z) with an explicit closed form."""
    half = support_halfwidth(q)
    if abs(y) > half or abs(z) > half:
        raise DomainError(f"conditioning point outside the support [-{half}, {half}]")
    r1sq = rho12 * rho12
    r2sq = rho13 * rho13
    return (y * rho12 * (1.0 - r2sq) + z * rho13 * (1.0 - r1sq)) / (1.0 - r1sq * r2sq)


def cond_exp_hn_y_given_z(n: int, z: float, p: ModelParams) -> float:
    """E(H_n(Y) | Z=z), a polynomial of degree at most n in z.

    Finite combination of connection polynomials W_{s, n-s}(z | r, q) with
    q-binomial weights.  The correlation weight of each term pairs the power
    s on one channel with n - s on the other, symmetrically in the two
    channels rho23 and rho12 rho13; the even case carries one extra middle
    term with weight r^{n/2}.  This coefficient pattern was validated
    against direct quadrature of the two-coordinate marginal.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    half = support_halfwidth(p.q)
    if abs(z) > half:
        raise DomainError(f"conditioning point outside the support [-{half}, {half}]")
    if n == 0:
        return 1.0
    q = p.q
    r = p.r
    a = p.rho23
    b = p.rho12 * p.rho13
    m = n // 2
    total = 0.0
    if n % 2 == 0:
        total += q_binomial(n, m, q) * r**m * float(w_poly(m, m, z, r, q))
    upper = m + 1 if n % 2 else m
    for s in range(upper):
        weight = a**s * b ** (n - s) + a ** (n - s) * b**s
        total += q_binomial(n, s, q) * weight * float(w_poly(s, n - s, z, r, q))
    return float(total)


def cond_exp_y_given_z(z: float, p: ModelParams) -> float:
    """E(Y | Z=z) = (rho23 + rho12 rho13) z / (1 + r)."""
    half = support_halfwidth(p.q)
    if abs(z) > half:
        raise DomainError(f"conditioning point outside the support [-{half}, {half}]")
    return (p.rho23 + p.rho12 * p.rho13) * z / (1.0 + p.r)


def cond_exp_y2_given_z(z: float, p: ModelParams) -> float:
    """E(Y^2 | Z=z): explicit quadratic in z.

    Kept separate from the degree-2 q-Hermite route so the two can be
    cross-checked; E(H_2(Y) | Z=z) = E(Y^2 | Z=z) - 1.
    """
    half = support_halfwidth(p.q)
    if abs(z) > half:
        raise DomainError(f"conditioning point outside the support [-{half}, {half}]")
    q = p.q
    r = p.r
    ssum = p.rho23**2 + (p.rho12 * p.rho13) ** 2
    lead = (ssum * (1.0 - q * r) + r * (1.0 - r) * (1.0 + q)) / (
        (1.0 + r) * (1.0 - q * r**2)
    )
    const = (1.0 + r**2 - ssum) / (1.0 - q * r**2)
    return lead * z**2 + const


def cond_exp_xy_given_z(z: float, p: ModelParams) -> float:
    """E(XY | Z=z): explicit quadratic in z."""
    half = support_halfwidth(p.q)
    if abs(z) > half:
        raise DomainError(f"conditioning point outside the support [-{half}, {half}]")
    q = p.q
    r = p.r
    lead = (
        p.rho12 * (p.rho13**2 + p.rho23**2) * (1.0 - q * r)
        + (1.0 - r) * (p.rho13 * p.rho23 + q * r * p.rho12)
    ) / ((1.0 + r) * (1.0 - q * r**2))
    const = p.rho12 * (1.0 - p.rho13**2) * (1.0 - p.rho23**2) / (1.0 - q * r**2)
    return lead * z**2 + const


def covariance_matrix_limit(p: ModelParams) -> np.ndarray:
    """The q -> 1 covariance matrix of the triple (X, Y, Z).

    Diagonal entries (1 + r) / (1 - r); each off-diagonal entry pairs the
    direct correlation with the product of the other two.
    """
    r = p.r
    if abs(r) >= 1:
        raise ValueError(f"need |r| < 1, got r={r}")
    d = (1.0 + r) / (1.0 - r)
    m01 = (p.rho12 + p.rho13 * p.rho23) / (1.0 - r)
    m02 = (p.rho13 + p.rho12 * p.rho23) / (1.0 - r)
    m12 = (p.rho23 + p.rho12 * p.rho13) / (1.0 - r)
    return np.array([[d, m01, m02], [m01, d, m12], [m02, m12, d]])


def closed_form(spec: MomentSpec) -> float:
    """Evaluate a moment request by its closed form."""
    p = spec.params
    if spec.kind is MomentKind.UNCONDITIONAL:
        if len(spec.degrees) == 1:
            n = spec.degrees[0]
            if n % 2:
                return 0.0
            return e_h2n_z(n // 2, p.r, p.q)
        if len(spec.degrees) == 2:
            return mixed_moment_h(spec.degrees[0], spec.degrees[1], p)
        raise ValueError("unconditional moments take one or two degrees")
    if spec.kind is MomentKind.COND_X_GIVEN_YZ:
        (n,) = spec.degrees
        y, z = spec.points
        return cond_exp_hn_x_given_yz(n, y, z, p.rho12, p.rho13, p.q)
    if spec.kind is MomentKind.COND_Y_GIVEN_Z:
        (n,) = spec.degrees
        (z,) = spec.points
        return cond_exp_hn_y_given_z(n, z, p)
    if spec.kind is MomentKind.COND_XY_GIVEN_Z:
        (z,) = spec.points
        return cond_exp_xy_given_z(z, p)
    raise ValueError(f"unknown moment kind {spec.kind!r}")


def quadrature_oracle(
    spec: MomentSpec, quad: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """Evaluate the same moment request by direct numerical integration."""
    p = spec.params
    q = p.q
    if spec.kind is MomentKind.UNCONDITIONAL:
        if len(spec.degrees) == 1:
            n = spec.degrees[0]

            def g_z(zz: np.ndarray) -> np.ndarray:
                return q_hermite(n, zz, q).values[n] * f_z(zz, p.r, q)

            return integrate1d(g_z, q, quad).value
        if len(spec.degrees) == 2:
            m, n = spec.degrees

            def g_yz(yy: np.ndarray, zz: np.ndarray) -> np.ndarray:
                return (
                    q_hermite(m, yy, q).values[m]
                    * q_hermite(n, zz, q).values[n]
                    * f_yz(yy, zz, p)
                )

            return integrate2d(g_yz, q, quad).value
        raise ValueError("unconditional moments take one or two degrees")
    if spec.kind is MomentKind.COND_X_GIVEN_YZ:
        (n,) = spec.degrees
        y, z = spec.points

        def g_x(xx: np.ndarray) -> np.ndarray:
            return q_hermite(n, xx, q).values[n] * f_x_given_yz(xx, y, z, p)

        return integrate1d(g_x, q, quad).value
    if spec.kind is MomentKind.COND_Y_GIVEN_Z:
        (n,) = spec.degrees
        (z,) = spec.points

        def g_y(yy: np.ndarray) -> np.ndarray:
            return q_hermite(n, yy, q).values[n] * f_yz(yy, z, p)

        return integrate1d(g_y, q, quad).value / f_z(z, p.r, q)
    if spec.kind is MomentKind.COND_XY_GIVEN_Z:
        (z,) = spec.points

        def g_xy(xx: np.ndarray, yy: np.ndarray) -> np.ndarray:
            return xx * yy * f_3d(xx, yy, z, p)

        return integrate2d(g_xy, q, quad).value / f_z(z, p.r, q)
    raise ValueError(f"unknown moment kind {spec.kind!r}")


ORACLES: Dict[MomentKind, Tuple[Callable[[MomentSpec], float], Callable[..., float]]] = {
    kind: (closed_form, quadrature_oracle) for kind in MomentKind
}
"""Registry pairing every moment kind with its closed form and its oracle."""
