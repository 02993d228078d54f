"""Densities of the three-dimensional q-Normal family.

The univariate q-Normal density on S(q) = [-2/sqrt(1-q), 2/sqrt(1-q)]:

    f_N(x|q) = (q;q)_inf sqrt(1-q) sqrt(4 - (1-q) x^2) / (2 pi)
               * prod_{i>=1} l(x | q^i)

with the quadratic kernel l(x|a) = (1+a)^2 - (1-q) a x^2.  Conditioning one
q-Normal coordinate on another with correlation rho multiplies f_N by

    (rho^2; q)_inf / prod_{i>=0} w(x, y | rho q^i),

    w(x, y|r) = (1-r^2)^2 - (1-q) x y r (1+r^2) + (1-q) r^2 (x^2 + y^2),

and the trivariate density with correlations (rho12, rho13, rho23) is the
cyclic product of three such conditionals times the normalizing constant
1 - rho12 rho13 rho23.

All infinite products and the constants in front of them are accumulated in
log space: near q = 1 the products grow past the double range while the
densities themselves stay perfectly representable.  Inside the product loops
plain factors are multiplied in blocks of 32 and the log is taken once per
block, which keeps the log overhead negligible.

Point arguments accept scalars or broadcastable numpy arrays.  Unconditional
densities extend by zero outside the support; conditional densities and the
complex parameter map raise DomainError instead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConditioning, DomainError, NonConvergence
from .qcore import (
    DEFAULT_TRUNCATION,
    TruncationConfig,
    log_q_pochhammer_inf,
    support_halfwidth,
)

__all__ = [
    "ModelParams",
    "DensityForm",
    "MarginalForm",
    "l_q",
    "omega",
    "f_n",
    "f_cn",
    "f_r",
    "f_3d",
    "f_yz",
    "f_z",
    "f_x_given_yz",
    "f_yz_given_x",
    "pm_kernel",
    "aw_parameters",
    "FORM_RTOL",
    "FORM_ATOL",
    "DENOM_FLOOR",
]

_LOG_2PI = math.log(2.0 * math.pi)
_BLOCK = 32

# Agreement tolerances for alternative evaluation routes of one density,
# and the floor below which a conditional denominator counts as degenerate.
FORM_RTOL = 1e-8
FORM_ATOL = 1e-12
DENOM_FLOOR = 1e-300
_LOG_FLOOR = math.log(DENOM_FLOOR)


class DensityForm(enum.Enum):
    PRODUCT = "product"
    SERIES = "series"
    CLOSED = "closed"


class MarginalForm(enum.Enum):
    """Evaluation routes for the one-dimensional marginal f_Z."""

    HERMITE_SERIES = "hermite-series"
    ROGERS = "rogers"
    EVEN_SERIES = "even-series"
    EDGE_PRODUCT = "edge-product"


@dataclass(frozen=True)
class ModelParams:
    """Correlations and deformation parameter of the trivariate model."""

    rho12: float
    rho13: float
    rho23: float
    q: float

    def __post_init__(self) -> None:
        for name in ("rho12", "rho13", "rho23"):
            if not abs(getattr(self, name)) < 1.0:
                raise ValueError(f"|{name}| must be < 1")
        if not abs(self.q) < 1.0:
            raise ValueError("|q| must be < 1")

    @property
    def r(self) -> float:
        """Product of the three correlations; normalizer is 1 - r."""
        return self.rho12 * self.rho13 * self.rho23


def _check_q(q: float) -> None:
    if not abs(q) < 1.0:
        raise ValueError("density evaluation requires |q| < 1")


def _check_rho(rho: float, name: str = "rho") -> None:
    if not abs(rho) < 1.0:
        raise ValueError(f"|{name}| must be < 1")


def _points(*xs) -> tuple[list[np.ndarray], bool]:
    arrs = [np.asarray(x, dtype=float) for x in xs]
    scalar = all(a.ndim == 0 for a in arrs)
    return arrs, scalar


def _ret(value: np.ndarray, scalar: bool):
    return float(value) if scalar else value


def _factor_count(a0: float, q: float, cfg: TruncationConfig, margin: float) -> int:
    """Factors to keep so the first omitted kernel factor deviates from 1
    by less than product_tol; deviation is bounded by margin * |a0 q^K|."""
    a = abs(a0) * margin
    if a < cfg.product_tol:
        return 0
    aq = abs(q)
    if aq == 0.0:
        return 1
    n = max(1, math.ceil(math.log(cfg.product_tol / a) / math.log(aq)))
    while a * aq**n >= cfg.product_tol:
        n += 1
    if n > cfg.max_terms:
        raise NonConvergence(
            f"kernel product needs {n} factors, cap is {cfg.max_terms}"
        )
    return n


def l_q(x, a: float, q: float):
    """Quadratic kernel l(x|a) = (1+a)^2 - (1-q) a x^2."""
    (xb,), scalar = _points(x)
    val = (1.0 + a) ** 2 - (1.0 - q) * a * xb**2
    return _ret(val, scalar)


def omega(x, y, rho: float, q: float):
    """Coupling kernel w(x,y|rho) of the conditional density products."""
    (xb, yb), scalar = _points(x, y)
    val = (
        (1.0 - rho**2) ** 2
        - (1.0 - q) * xb * yb * rho * (1.0 + rho**2)
        + (1.0 - q) * rho**2 * (xb**2 + yb**2)
    )
    return _ret(val, scalar)


def _log_blocks(values_iter, shape) -> np.ndarray:
    """Sum of logs of a stream of positive factor arrays, taking logs once
    per _BLOCK factors to limit transcendental cost."""
    total = np.zeros(shape)
    block = np.ones(shape)
    count = 0
    for factor in values_iter:
        block = block * factor
        count += 1
        if count == _BLOCK:
            total += np.log(block)
            block = np.ones(shape)
            count = 0
    if count:
        total += np.log(block)
    return total


def _log_lq_product(x: np.ndarray, a0: float, q: float, cfg: TruncationConfig) -> np.ndarray:
    """sum_{i>=0} log l(x | a0 q^i) for x inside the support."""
    n = _factor_count(a0, q, cfg, margin=6.0)
    one_minus_q = 1.0 - q
    xsq = x**2

    def factors():
        a = a0
        for _ in range(n):
            yield (1.0 + a) ** 2 - one_minus_q * a * xsq
            a *= q

    return _log_blocks(factors(), xsq.shape)


def _log_omega_product(
    x: np.ndarray, y: np.ndarray, rho: float, q: float, cfg: TruncationConfig
) -> np.ndarray:
    """sum_{i>=0} log w(x, y | rho q^i) for x, y inside the support."""
    n = _factor_count(rho, q, cfg, margin=16.0)
    one_minus_q = 1.0 - q
    xy = x * y
    ssq = x**2 + y**2
    shape = np.broadcast_shapes(x.shape, y.shape)

    def factors():
        a = rho
        for _ in range(n):
            yield (1.0 - a**2) ** 2 - one_minus_q * xy * a * (1.0 + a**2) + (
                one_minus_q * a**2
            ) * ssq
            a *= q

    return _log_blocks(factors(), shape)


def _log_f_n(x: np.ndarray, q: float, cfg: TruncationConfig) -> np.ndarray:
    """log f_N on points already inside the support (-inf at the edge)."""
    edge = 4.0 - (1.0 - q) * x**2
    with np.errstate(divide="ignore"):
        log_edge = np.log(np.maximum(edge, 0.0))
    return (
        log_q_pochhammer_inf(q, q, cfg)
        + 0.5 * math.log(1.0 - q)
        + 0.5 * log_edge
        - _LOG_2PI
        + _log_lq_product(x, q, q, cfg)
    )


def _log_f_cn(
    x: np.ndarray, y: np.ndarray, rho: float, q: float, cfg: TruncationConfig
) -> np.ndarray:
    """log f_CN(x|y) on in-support points."""
    return (
        _log_f_n(x, q, cfg)
        + log_q_pochhammer_inf(rho**2, q, cfg)
        - _log_omega_product(x, y, rho, q, cfg)
    )


def _inside(arr: np.ndarray, half: float) -> np.ndarray:
    return np.abs(arr) <= half


def _clip(arr: np.ndarray, half: float) -> np.ndarray:
    return np.clip(arr, -half, half)


def f_n(x, q: float, cfg: TruncationConfig = DEFAULT_TRUNCATION):
    """Univariate q-Normal density; zero outside the support interval."""
    _check_q(q)
    (xb,), scalar = _points(x)
    half = support_halfwidth(q)
    inside = _inside(xb, half)
    val = np.exp(_log_f_n(_clip(xb, half), q, cfg))
    return _ret(np.where(inside, val, 0.0), scalar)


def f_cn(x, y, rho: float, q: float, cfg: TruncationConfig = DEFAULT_TRUNCATION):
    """Conditional q-Normal density in x given a coordinate at y with
    correlation rho.  The conditioning point must lie in the support."""
    _check_q(q)
    _check_rho(rho)
    (xb, yb), scalar = _points(x, y)
    half = support_halfwidth(q)
    if not np.all(_inside(yb, half)):
        raise DomainError("conditioning point y outside the support interval")
    inside = _inside(xb, half)
    val = np.exp(_log_f_cn(_clip(xb, half), yb, rho, q, cfg))
    return _ret(np.where(inside, val, 0.0), scalar)


def f_r(x, beta: float, q: float, cfg: TruncationConfig = DEFAULT_TRUNCATION):
    """Rogers-orthogonality density; zero outside the support."""
    _check_q(q)
    _check_rho(beta, "beta")
    (xb,), scalar = _points(x)
    half = support_halfwidth(q)
    inside = _inside(xb, half)
    xc = _clip(xb, half)
    log_val = (
        _log_f_n(xc, q, cfg)
        + log_q_pochhammer_inf(beta**2, q, cfg)
        - log_q_pochhammer_inf(beta, q, cfg)
        - log_q_pochhammer_inf(beta * q, q, cfg)
        - _log_lq_product(xc, beta, q, cfg)
    )
    return _ret(np.where(inside, np.exp(log_val), 0.0), scalar)


def _pm_series(
    x: np.ndarray, y: np.ndarray, rho: float, q: float, cfg: TruncationConfig
) -> np.ndarray:
    """Bilinear q-Hermite kernel sum_j rho^j H_j(x) H_j(y) / [j]_q!."""
    shape = np.broadcast_shapes(x.shape, y.shape)
    total = np.ones(shape)
    if rho == 0.0:
        return total
    hx_prev = np.ones(shape)
    hy_prev = np.ones(shape)
    hx = np.broadcast_to(x, shape).copy()
    hy = np.broadcast_to(y, shape).copy()
    coef = 1.0
    qnum = 0.0
    qpow = 1.0
    small = 0
    for j in range(1, cfg.max_terms + 1):
        qnum += qpow  # [j]_q
        qpow *= q
        coef *= rho / qnum
        term = coef * hx * hy
        total += term
        if np.max(np.abs(term)) < cfg.tail_tol:
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
        hx, hx_prev = x * hx - qnum * hx_prev, hx
        hy, hy_prev = y * hy - qnum * hy_prev, hy
    raise NonConvergence(
        f"bilinear kernel series not below tail_tol within {cfg.max_terms} terms"
    )


def pm_kernel(
    x,
    y,
    rho: float,
    q: float,
    cfg: TruncationConfig = DEFAULT_TRUNCATION,
    form: DensityForm = DensityForm.PRODUCT,
):
    """Bilinear kernel f_CN(x|y) / f_N(x), by series or closed product."""
    _check_q(q)
    _check_rho(rho)
    (xb, yb), scalar = _points(x, y)
    half = support_halfwidth(q)
    if not (np.all(_inside(xb, half)) and np.all(_inside(yb, half))):
        raise DomainError("kernel arguments outside the support interval")
    if form == DensityForm.SERIES:
        val = _pm_series(xb, yb, rho, q, cfg)
    elif form in (DensityForm.PRODUCT, DensityForm.CLOSED):
        val = np.exp(
            log_q_pochhammer_inf(rho**2, q, cfg)
            - _log_omega_product(xb, yb, rho, q, cfg)
        )
    else:
        raise ValueError(f"unknown form {form}")
    return _ret(val, scalar)


def f_3d(
    x,
    y,
    z,
    params: ModelParams,
    cfg: TruncationConfig = DEFAULT_TRUNCATION,
    form: DensityForm = DensityForm.PRODUCT,
):
    """Trivariate density; zero outside the support cube.

    Product form chains the three pairwise conditionals, closed form expands
    them into one constant and six kernel products, series form replaces each
    coupling by its bilinear q-Hermite series.  All three agree pointwise to
    FORM_RTOL and exist as separate code paths on purpose.
    """
    p = params
    _check_q(p.q)
    (xb, yb, zb), scalar = _points(x, y, z)
    half = support_halfwidth(p.q)
    inside = _inside(xb, half) & _inside(yb, half) & _inside(zb, half)
    xc, yc, zc = (_clip(a, half) for a in (xb, yb, zb))
    log_c = math.log1p(-p.r)
    if form == DensityForm.PRODUCT:
        log_val = (
            log_c
            + _log_f_cn(xc, yc, p.rho12, p.q, cfg)
            + _log_f_cn(yc, zc, p.rho23, p.q, cfg)
            + _log_f_cn(zc, xc, p.rho13, p.q, cfg)
        )
        val = np.exp(log_val)
    elif form == DensityForm.CLOSED:
        log_val = (
            log_c
            + _log_f_n(xc, p.q, cfg)
            + _log_f_n(yc, p.q, cfg)
            + _log_f_n(zc, p.q, cfg)
            + log_q_pochhammer_inf(p.rho12**2, p.q, cfg)
            + log_q_pochhammer_inf(p.rho13**2, p.q, cfg)
            + log_q_pochhammer_inf(p.rho23**2, p.q, cfg)
            - _log_omega_product(xc, yc, p.rho12, p.q, cfg)
            - _log_omega_product(xc, zc, p.rho13, p.q, cfg)
            - _log_omega_product(yc, zc, p.rho23, p.q, cfg)
        )
        val = np.exp(log_val)
    elif form == DensityForm.SERIES:
        base = np.exp(
            log_c
            + _log_f_n(xc, p.q, cfg)
            + _log_f_n(yc, p.q, cfg)
            + _log_f_n(zc, p.q, cfg)
        )
        val = (
            base
            * _pm_series(xc, yc, p.rho12, p.q, cfg)
            * _pm_series(yc, zc, p.rho23, p.q, cfg)
            * _pm_series(xc, zc, p.rho13, p.q, cfg)
        )
    else:
        raise ValueError(f"unknown form {form}")
    return _ret(np.where(inside, val, 0.0), scalar)


def f_yz(y, z, params: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNCATION):
    """Bivariate (Y, Z) marginal: couples rho23 directly and the product
    rho12 rho13 through the integrated-out coordinate."""
    p = params
    _check_q(p.q)
    (yb, zb), scalar = _points(y, z)
    half = support_halfwidth(p.q)
    inside = _inside(yb, half) & _inside(zb, half)
    yc, zc = _clip(yb, half), _clip(zb, half)
    log_val = (
        math.log1p(-p.r)
        + _log_f_cn(yc, zc, p.rho23, p.q, cfg)
        + _log_f_cn(zc, yc, p.rho12 * p.rho13, p.q, cfg)
    )
    return _ret(np.where(inside, np.exp(log_val), 0.0), scalar)


def f_z(
    z,
    r: float,
    q: float,
    cfg: TruncationConfig = DEFAULT_TRUNCATION,
    form: MarginalForm = MarginalForm.ROGERS,
):
    """Univariate marginal of the trivariate model; depends on the three
    correlations only through their product r.

    Four evaluation routes are kept: a bilinear q-Hermite series on the
    diagonal, the Rogers-density closed form, an even-degree q-Hermite
    series, and a fully factored edge product.
    """
    _check_q(q)
    _check_rho(r, "r")
    (zb,), scalar = _points(z)
    half = support_halfwidth(q)
    inside = _inside(zb, half)
    zc = _clip(zb, half)
    if form == MarginalForm.HERMITE_SERIES:
        val = (1.0 - r) * np.exp(_log_f_n(zc, q, cfg)) * _pm_series(zc, zc, r, q, cfg)
    elif form == MarginalForm.ROGERS:
        log_val = (
            math.log1p(-r)
            + _log_f_n(zc, q, cfg)
            + log_q_pochhammer_inf(r**2, q, cfg)
            - 2.0 * log_q_pochhammer_inf(r, q, cfg)
            - _log_lq_product(zc, r, q, cfg)
        )
        val = np.exp(log_val)
    elif form == MarginalForm.EVEN_SERIES:
        val = (1.0 - r) * np.exp(_log_f_n(zc, q, cfg)) * _even_series(zc, r, q, cfg)
    elif form == MarginalForm.EDGE_PRODUCT:
        edge = 4.0 - (1.0 - q) * zc**2
        with np.errstate(divide="ignore"):
            log_edge = np.log(np.maximum(edge, 0.0))
        log_val = (
            math.log1p(r)
            + 0.5 * math.log(1.0 - q)
            + 0.5 * log_edge
            + log_q_pochhammer_inf(q, q, cfg)
            + log_q_pochhammer_inf(r**2 * q, q, cfg)
            - _LOG_2PI
            - np.log((1.0 + r) ** 2 - (1.0 - q) * r * zc**2)
            - 2.0 * log_q_pochhammer_inf(r * q, q, cfg)
            + _log_lq_product(zc, q, q, cfg)
            - _log_lq_product(zc, r * q, q, cfg)
        )
        val = np.exp(log_val)
    else:
        raise ValueError(f"unknown form {form}")
    return _ret(np.where(inside, val, 0.0), scalar)


def _even_series(z: np.ndarray, r: float, q: float, cfg: TruncationConfig) -> np.ndarray:
    """sum_k r^k H_{2k}(z|q) / ([k]_q! (r;q)_{k+1}) via an incrementally
    extended q-Hermite recurrence."""
    h_prev = np.zeros(z.shape)  # H_{deg-1} seeded at degree -1
    h_cur = np.ones(z.shape)  # H_deg with deg = 0
    deg_qnum = 0.0  # [deg]_q
    deg_qpow = 1.0  # q^deg
    coef = 1.0 / (1.0 - r)
    total = coef * np.ones(z.shape)  # k = 0 term is H_0 / (r;q)_1
    if r == 0.0:
        return total
    k_qnum = 0.0  # [k]_q
    k_qpow = 1.0  # q^(k-1) ahead of the update
    rq = r * q  # r q^k inside (r;q)_{k+1} / (r;q)_k
    small = 0
    for _ in range(1, cfg.max_terms + 1):
        for _ in range(2):
            h_cur, h_prev = z * h_cur - deg_qnum * h_prev, h_cur
            deg_qnum += deg_qpow
            deg_qpow *= q
        k_qnum += k_qpow
        k_qpow *= q
        coef *= r / (k_qnum * (1.0 - rq))
        rq *= q
        term = coef * h_cur
        total += term
        if np.max(np.abs(term)) < cfg.tail_tol:
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise NonConvergence(
        f"even-degree series not below tail_tol within {cfg.max_terms} terms"
    )


def f_x_given_yz(
    x, y, z, params: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNCATION
):
    """Conditional density of the first coordinate given the other two,
    as a ratio of pairwise conditionals."""
    p = params
    _check_q(p.q)
    (xb, yb, zb), scalar = _points(x, y, z)
    half = support_halfwidth(p.q)
    if not (
        np.all(_inside(xb, half))
        and np.all(_inside(yb, half))
        and np.all(_inside(zb, half))
    ):
        raise DomainError("conditional density requires all points in the support")
    log_den = _log_f_cn(zb, yb, p.rho12 * p.rho13, p.q, cfg)
    if np.any(log_den < _LOG_FLOOR):
        raise DegenerateConditioning("conditional denominator below the floor")
    log_val = (
        _log_f_cn(xb, yb, p.rho12, p.q, cfg)
        + _log_f_cn(zb, xb, p.rho13, p.q, cfg)
        - log_den
    )
    return _ret(np.exp(log_val), scalar)


def f_yz_given_x(
    y, z, x, params: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNCATION
):
    """Conditional density of the last two coordinates given the first."""
    p = params
    _check_q(p.q)
    (yb, zb, xb), scalar = _points(y, z, x)
    half = support_halfwidth(p.q)
    if not (
        np.all(_inside(xb, half))
        and np.all(_inside(yb, half))
        and np.all(_inside(zb, half))
    ):
        raise DomainError("conditional density requires all points in the support")
    log_den = _log_f_cn(xb, xb, p.r, p.q, cfg)
    if np.any(log_den < _LOG_FLOOR):
        raise DegenerateConditioning("conditional denominator below the floor")
    log_val = (
        _log_f_cn(xb, yb, p.rho12, p.q, cfg)
        + _log_f_cn(yb, zb, p.rho23, p.q, cfg)
        + _log_f_cn(zb, xb, p.rho13, p.q, cfg)
        - log_den
    )
    return _ret(np.exp(log_val), scalar)


def aw_parameters(
    y: float, z: float, rho1: float, rho2: float, q: float
) -> tuple[complex, complex, complex, complex]:
    """Complex conjugate parameter quadruple (a, b, c, d) encoding the two
    conditioning points: a = sqrt(1-q)/2 rho1 (y - i sqrt(4/(1-q) - y^2)),
    b its conjugate, and (c, d) likewise from (rho2, z).

    |a| = |rho1| and |c| = |rho2| for in-support points.
    """
    _check_q(q)
    _check_rho(rho1, "rho1")
    _check_rho(rho2, "rho2")
    half = support_halfwidth(q)
    if abs(y) > half or abs(z) > half:
        raise DomainError("parameter map requires y, z in the support interval")
    s = math.sqrt(1.0 - q) / 2.0
    ty = math.sqrt(max(4.0 / (1.0 - q) - y * y, 0.0))
    tz = math.sqrt(max(4.0 / (1.0 - q) - z * z, 0.0))
    a = s * rho1 * complex(y, -ty)
    c = s * rho2 * complex(z, -tz)
    return (a, a.conjugate(), c, c.conjugate())
