"""Orthogonal polynomial families attached to the q-Normal world.

Every evaluator returns the whole sequence of values p_0(x), ..., p_n(x)
from its three-term recurrence, seeded with the degree -1 element equal to 0
and p_0 = 1.  Point arguments may be scalars or numpy arrays (broadcast
together); the returned ``values`` array has shape (n+1,) + point-shape.

Families:

    continuous q-Hermite     H_{n+1}(x) = x H_n(x) - [n]_q H_{n-1}(x)
    Al-Salam-Chihara         P_{n+1}(x) = (x - rho y q^n) P_n(x)
                                          - (1 - rho^2 q^(n-1)) [n]_q P_{n-1}(x)
    Rogers / q-ultraspherical, classical normalization:
        2x (1 - b q^n) C_n(x) = (1 - q^(n+1)) C_{n+1}(x)
                                + (1 - b^2 q^(n-1)) C_{n-1}(x)
    Rogers, monic:
        y R_n = R_{n+1} + [n]_q (1 - b^2 q^(n-1))
                / ((1 - b q^(n-1))(1 - b q^n)) R_{n-1}
    Chebyshev U              U_{n+1}(x) = 2x U_n(x) - U_{n-1}(x)
    probabilists' Hermite    He_{n+1}(x) = x He_n(x) - n He_{n-1}(x)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DegenerateRecurrence
from .qcore import q_factorial, q_number, q_pochhammer

__all__ = [
    "PolyFamily",
    "PolySequence",
    "q_hermite",
    "asc_poly",
    "rogers_C",
    "rogers_monic",
    "chebyshev_U",
    "hermite_prob",
    "triple_product_integral",
    "h_squared_linearization",
    "w_poly",
]

_SINGULAR = 1e-15


class PolyFamily(enum.Enum):
    Q_HERMITE = "q-hermite"
    AL_SALAM_CHIHARA = "al-salam-chihara"
    ROGERS = "rogers"
    ROGERS_MONIC = "rogers-monic"
    CHEBYSHEV_U = "chebyshev-u"
    HERMITE_PROB = "hermite-prob"


@dataclass(frozen=True, eq=False)
class PolySequence:
    """Values of one polynomial family at fixed parameters and points."""

    family: PolyFamily
    params: Mapping[str, float]
    values: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> np.ndarray:
        return self.values[k]


def _alloc(n: int, *points: object) -> tuple[np.ndarray, list[np.ndarray]]:
    arrs = [np.asarray(p, dtype=float) for p in points]
    shape = np.broadcast_shapes(*(a.shape for a in arrs)) if arrs else ()
    values = np.empty((n + 1,) + shape)
    values[0] = 1.0
    return values, [np.broadcast_to(a, shape) for a in arrs]


def q_hermite(n: int, x, q: float) -> PolySequence:
    """Continuous q-Hermite values H_0(x|q) .. H_n(x|q)."""
    values, (xb,) = _alloc(n, x)
    if n >= 1:
        values[1] = xb
    for k in range(1, n):
        values[k + 1] = xb * values[k] - q_number(k, q) * values[k - 1]
    return PolySequence(PolyFamily.Q_HERMITE, {"q": q}, values)


def asc_poly(n: int, x, y, rho: float, q: float) -> PolySequence:
    """Al-Salam-Chihara values P_0 .. P_n at x, with parameters (y, rho, q).

    At rho = 0 the recurrence collapses to the continuous q-Hermite one.
    """
    values, (xb, yb) = _alloc(n, x, y)
    if n >= 1:
        values[1] = xb - rho * yb
    for k in range(1, n):
        values[k + 1] = (xb - rho * yb * q**k) * values[k] - (
            1.0 - rho**2 * q ** (k - 1)
        ) * q_number(k, q) * values[k - 1]
    return PolySequence(
        PolyFamily.AL_SALAM_CHIHARA, {"y": y, "rho": rho, "q": q}, values
    )


def rogers_C(n: int, x, beta: float, q: float) -> PolySequence:
    """Rogers (q-ultraspherical) values C_0(x|beta,q) .. C_n(x|beta,q)."""
    values, (xb,) = _alloc(n, x)
    for k in range(n):
        lead = 1.0 - q ** (k + 1)
        if abs(lead) < _SINGULAR:
            raise DegenerateRecurrence(
                f"Rogers recurrence coefficient 1 - q^{k + 1} vanishes"
            )
        acc = 2.0 * xb * (1.0 - beta * q**k) * values[k]
        if k >= 1:
            acc = acc - (1.0 - beta**2 * q ** (k - 1)) * values[k - 1]
        values[k + 1] = acc / lead
    return PolySequence(PolyFamily.ROGERS, {"beta": beta, "q": q}, values)


def rogers_monic(n: int, y, beta: float, q: float) -> PolySequence:
    """Monic Rogers values R_0(y|beta,q) .. R_n(y|beta,q)."""
    values, (yb,) = _alloc(n, y)
    if n >= 1:
        values[1] = yb
    for k in range(1, n):
        den = (1.0 - beta * q ** (k - 1)) * (1.0 - beta * q**k)
        if abs(den) < _SINGULAR:
            raise DegenerateRecurrence(
                f"monic Rogers recurrence denominator vanishes at degree {k + 1}"
            )
        coef = q_number(k, q) * (1.0 - beta**2 * q ** (k - 1)) / den
        values[k + 1] = yb * values[k] - coef * values[k - 1]
    return PolySequence(PolyFamily.ROGERS_MONIC, {"beta": beta, "q": q}, values)


def chebyshev_U(n: int, x) -> PolySequence:
    """Chebyshev second-kind values U_0(x) .. U_n(x)."""
    values, (xb,) = _alloc(n, x)
    if n >= 1:
        values[1] = 2.0 * xb
    for k in range(1, n):
        values[k + 1] = 2.0 * xb * values[k] - values[k - 1]
    return PolySequence(PolyFamily.CHEBYSHEV_U, {}, values)


def hermite_prob(n: int, x) -> PolySequence:
    """Probabilists' Hermite values He_0(x) .. He_n(x)."""
    values, (xb,) = _alloc(n, x)
    if n >= 1:
        values[1] = xb
    for k in range(1, n):
        values[k + 1] = xb * values[k] - float(k) * values[k - 1]
    return PolySequence(PolyFamily.HERMITE_PROB, {}, values)


def triple_product_integral(k: int, m: int, n: int, q: float) -> float:
    """Integral of H_k H_m H_n against the q-Normal density.

    Nonzero only when k + m + n is even and (k, m, n) satisfy the triangle
    inequalities, in which case it equals

        [m]_q! [n]_q! [k]_q!
        / ([ (m+n-k)/2 ]_q! [ (m+k-n)/2 ]_q! [ (n+k-m)/2 ]_q!)

    The half indices are formed in integer arithmetic after the parity check.
    """
    if min(k, m, n) < 0:
        return 0.0
    if (k + m + n) % 2 != 0:
        return 0.0
    if m + n < k or m + k < n or n + k < m:
        return 0.0
    a = (m + n - k) // 2
    b = (m + k - n) // 2
    c = (n + k - m) // 2
    num = q_factorial(m, q) * q_factorial(n, q) * q_factorial(k, q)
    den = q_factorial(a, q) * q_factorial(b, q) * q_factorial(c, q)
    return num / den


def h_squared_linearization(j: int, q: float) -> np.ndarray:
    """Coefficients c_0..c_j with H_j(x|q)^2 = sum_k c_k H_{2k}(x|q).

    c_k = ([j]_q!)^2 / (([k]_q!)^2 [j-k]_q!).
    """
    if j < 0:
        raise ValueError("h_squared_linearization requires j >= 0")
    fj = q_factorial(j, q)
    out = np.empty(j + 1)
    for k in range(j + 1):
        out[k] = fj * fj / (q_factorial(k, q) ** 2 * q_factorial(j - k, q))
    return out


def w_poly(k: int, m: int, x, r: float, q: float):
    """Connection polynomial W_{k,m}(x|r,q): the ratio of the doubly shifted
    bilinear q-Hermite sum to the unshifted one,

        sum_i r^i H_{i+k} H_{i+m} / [i]_q!
            = W_{k,m}  *  sum_i r^i H_i H_i / [i]_q!.

    Computed exactly by the ladder recurrence

        W_{s,j} = x W_{s-1,j} - [s-1]_q W_{s-2,j} - q^(s-1) r W_{s-1,j+1}

    from the boundary W_{0,j} = (r;q)_j / (r^2;q)_j R_j(x|r,q), which follows
    from shifting the recurrence of the q-Hermite factor.  The single-sum
    shortcut sometimes quoted for W_{k,m} reproduces these values only for
    k <= 1; the degree-(k+m) products it combines become linearly dependent
    beyond that, so this ladder is the defining evaluation.  W is symmetric
    in (k, m); W_{0,0} = 1, W_{1,0}(x) = x / (1+r).
    """
    if k < 0 or m < 0:
        raise ValueError("w_poly requires k, m >= 0")
    total_deg = k + m
    rg = rogers_monic(total_deg, x, r, q).values
    row = [
        q_pochhammer(r, q, j) / q_pochhammer(r * r, q, j) * rg[j]
        for j in range(total_deg + 1)
    ]
    xb = np.asarray(x, dtype=float)
    prev: list | None = None
    for s in range(1, k + 1):
        qn = q_number(s - 1, q)
        qpow = q ** (s - 1)
        new = [
            xb * row[j]
            - (qn * prev[j] if s >= 2 else 0.0)
            - qpow * r * row[j + 1]
            for j in range(total_deg - s + 1)
        ]
        prev, row = row, new
    val = row[m]
    if np.ndim(x) == 0:
        return float(val)
    return val
