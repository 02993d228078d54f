"""q-series arithmetic: q-numbers, q-factorials, q-binomials, q-Pochhammer
symbols and the support interval of the q-Normal family.

Conventions used throughout the package:

    [n]_q  = 1 + q + ... + q^(n-1),          [0]_q  = 0
    [n]_q! = [1]_q [2]_q ... [n]_q,          [0]_q! = 1
    (a; q)_j   = prod_{k=1..j} (1 - a q^(k-1)),   (a; q)_0 = 1
    (a; q)_inf = prod_{k>=1}  (1 - a q^(k-1))     for |q| < 1

All functions are pure and accept plain Python scalars.  Infinite products
are truncated once the first omitted factor is within ``product_tol`` of 1,
with a hard cap of ``max_terms`` factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonConvergence

__all__ = [
    "TruncationConfig",
    "DEFAULT_TRUNCATION",
    "q_number",
    "q_factorial",
    "q_binomial",
    "q_pochhammer",
    "q_pochhammer_inf",
    "log_q_pochhammer_inf",
    "support",
    "support_halfwidth",
]


@dataclass(frozen=True)
class TruncationConfig:
    """Caps and tolerances for truncated series and infinite products.

    max_terms    hard cap on the number of retained terms/factors
    tail_tol     absolute size below which series terms are considered spent
    product_tol  how close to 1 the first omitted product factor must be
    """

    max_terms: int = 200_000
    tail_tol: float = 1e-12
    product_tol: float = 1e-14

    def __post_init__(self) -> None:
        if self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")
        if not (self.tail_tol > 0.0) or not (self.product_tol > 0.0):
            raise ValueError("tolerances must be positive")


DEFAULT_TRUNCATION = TruncationConfig()


def q_number(n: int, q: float) -> float:
    """[n]_q = 1 + q + ... + q^(n-1), the q-analogue of n."""
    if n < 0:
        raise ValueError("q_number requires n >= 0")
    total = 0.0
    power = 1.0
    for _ in range(n):
        total += power
        power *= q
    return total


def q_factorial(n: int, q: float) -> float:
    """[n]_q! = [1]_q [2]_q ... [n]_q with [0]_q! = 1."""
    if n < 0:
        raise ValueError("q_factorial requires n >= 0")
    out = 1.0
    for k in range(1, n + 1):
        out *= q_number(k, q)
    return out


def q_binomial(n: int, k: int, q: float) -> float:
    """Gaussian binomial coefficient [n choose k]_q; 0 outside 0 <= k <= n."""
    if k < 0 or k > n or n < 0:
        return 0.0
    return q_factorial(n, q) / (q_factorial(k, q) * q_factorial(n - k, q))


def q_pochhammer(a: float, q: float, j: int) -> float:
    """Finite q-Pochhammer symbol (a; q)_j, with (a; q)_0 = 1."""
    if j < 0:
        raise ValueError("q_pochhammer requires j >= 0")
    out = 1.0
    term = a
    for _ in range(j):
        out *= 1.0 - term
        term *= q
    return out


def _factors_needed(a: float, q: float, cfg: TruncationConfig) -> int:
    """Smallest K with |a| |q|^K < product_tol, i.e. the count of factors
    to keep so the first omitted factor 1 - a q^K is within tolerance of 1.
    """
    a = abs(a)
    q = abs(q)
    if a < cfg.product_tol:
        return 0
    if q == 0.0:
        return 1
    if q >= 1.0:
        raise NonConvergence(f"infinite product requires |q| < 1, got |q|={q}")
    k = math.log(cfg.product_tol / a) / math.log(q)
    n = max(1, math.ceil(k))
    # Guard against log round-off putting us one factor short.
    while a * q**n >= cfg.product_tol:
        n += 1
    if n > cfg.max_terms:
        raise NonConvergence(
            f"q-Pochhammer product needs {n} factors, cap is {cfg.max_terms}"
        )
    return n


def q_pochhammer_inf(a: float, q: float, cfg: TruncationConfig = DEFAULT_TRUNCATION) -> float:
    """Truncated infinite q-Pochhammer symbol (a; q)_inf for |q| < 1.

    Deterministic for a fixed cfg: the factor count is computed in advance
    from the geometric decay of a q^k.  Raises NonConvergence when max_terms
    factors are not enough.
    """
    n = _factors_needed(a, q, cfg)
    return q_pochhammer(a, q, n)


def log_q_pochhammer_inf(a: float, q: float, cfg: TruncationConfig = DEFAULT_TRUNCATION) -> float:
    """log (a; q)_inf, valid for |a| < 1, |q| < 1 where every factor is positive.

    The log form stays finite where the plain product would over- or
    underflow (q close to 1).
    """
    if abs(a) >= 1.0:
        raise ValueError("log_q_pochhammer_inf requires |a| < 1")
    n = _factors_needed(a, q, cfg)
    total = 0.0
    term = a
    for _ in range(n):
        total += math.log1p(-term)
        term *= q
    return total


def support_halfwidth(q: float) -> float:
    """Half-width 2 / sqrt(1 - q) of the support interval; inf at q = 1."""
    if abs(q) > 1.0:
        raise ValueError("support requires |q| <= 1")
    if q == 1.0:
        return math.inf
    return 2.0 / math.sqrt(1.0 - q)


def support(q: float) -> tuple[float, float]:
    """Support interval of the q-Normal density.

    [-2/sqrt(1-q), 2/sqrt(1-q)] for |q| < 1; the whole real line at q = 1.
    """
    half = support_halfwidth(q)
    return (-half, half)
