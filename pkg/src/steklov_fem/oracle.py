"""Closed-form reference eigenvalues."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class OracleValue:
    index: int
    value: float
    derivation: str


def coth(x: float) -> float:
    """``coth x = 1 + 2 / (exp(2x) - 1)``, via ``exp(-2x)`` for large ``x`` to avoid overflow."""
    if x <= 0:
        raise ValueError("coth is only needed for positive arguments here")
    if x > 1.0:
        e = math.exp(-2.0 * x)
        return 1.0 + 2.0 * e / (1.0 - e)
    return 1.0 + 2.0 / math.expm1(2.0 * x)


def strip_mixed_eigenvalue(k: int, w: float = 1.0, d: float = 1.0) -> float:
    """k-th eigenvalue (k >= 1) of the mixed problem on ``(0, w) x (-d, 0)``.

    Steklov on the top, Dirichlet elsewhere. Separation of variables gives
    ``u = sin(k pi x1 / w) sinh(k pi (x2 + d) / w)`` with eigenvalue
    ``(k pi / w) coth(k pi d / w)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    q = k * math.pi / w
    return q * coth(q * d)


def disk_eigenvalue(n: int) -> float:
    """Steklov spectrum of the unit disk: 0, 1, 1, 2, 2, 3, 3, ..."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return float((n + 1) // 2)


def strip_values(count: int, w: float = 1.0, d: float = 1.0) -> list[OracleValue]:
    return [OracleValue(k, strip_mixed_eigenvalue(k, w, d), "separation of variables, mixed strip") for k in range(1, count + 1)]


def disk_values(count: int) -> list[OracleValue]:
    return [OracleValue(n, disk_eigenvalue(n), "r^k cos/sin(k theta) on the unit disk") for n in range(count)]
