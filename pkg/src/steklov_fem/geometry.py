"""Periodic boundary profiles and the oscillating strip family.

The strip is ``W x (-d, 0)`` with ``W = (0, w)``; its perturbed version
``Omega_eps`` has top boundary ``x2 = g_eps(x1) = eps**alpha * b(x1 / eps)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

PROFILE_KINDS = ("triangle-wave", "raised-cosine", "zero")

# 5-point Gauss-Legendre rule on [-1, 1]
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


class GeometryError(ValueError):
    """Invalid geometric parameters or out-of-range evaluation."""


@dataclass(frozen=True)
class ProfileSpec:
    """A 1-periodic, nonnegative Lipschitz profile ``b`` on the cell Y = (-1/2, 1/2).

    ``triangle-wave`` is ``amplitude * dist(t, Z)``; ``raised-cosine`` is
    ``amplitude * (1 - cos(2 pi t)) / 4``. Both have maximum ``amplitude / 2``
    and mean ``amplitude / 4``.
    """

    kind: str = "triangle-wave"
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise GeometryError(f"unknown profile kind {self.kind!r}; expected one of {PROFILE_KINDS}")
        if not (self.amplitude >= 0 and math.isfinite(self.amplitude)):
            raise GeometryError("profile amplitude must be a finite nonnegative number")

    @property
    def max_value(self) -> float:
        return 0.0 if self.kind == "zero" else 0.5 * self.amplitude

    @property
    def mean_value(self) -> float:
        return 0.0 if self.kind == "zero" else 0.25 * self.amplitude

    @property
    def lipschitz(self) -> float:
        if self.kind == "triangle-wave":
            return self.amplitude
        if self.kind == "raised-cosine":
            return 0.5 * math.pi * self.amplitude
        return 0.0

    @property
    def kinks(self) -> tuple[float, ...]:
        """Points in [0, 1) where the slope jumps."""
        return (0.0, 0.5) if self.kind == "triangle-wave" and self.amplitude > 0 else ()

    @property
    def piecewise_constant_slope(self) -> bool:
        return self.kind in ("triangle-wave", "zero") or self.amplitude == 0

    def __call__(self, t):
        return eval_profile(self, t)


def _centered(t):
    # t - rint(t) is exact, so a shift by an integer that is itself exact
    # leaves the reduced argument bitwise unchanged.
    return t - np.rint(t)


def eval_profile(profile: ProfileSpec, t):
    """Return ``(b(t), b'(t))``; works elementwise on arrays.

    At the kinks of the triangle wave the right-hand slope is returned
    (``+a`` on ``[k, k + 1/2)``, ``-a`` on ``[k + 1/2, k + 1)``).
    """
    scalar = np.ndim(t) == 0
    r = _centered(np.asarray(t, dtype=float))
    a = profile.amplitude
    if profile.kind == "triangle-wave":
        value = a * np.abs(r)
        slope = np.where((r >= 0.0) & (r < 0.5), a, -a)
    elif profile.kind == "raised-cosine":
        value = 0.25 * a * (1.0 - np.cos(2.0 * math.pi * r))
        slope = 0.5 * math.pi * a * np.sin(2.0 * math.pi * r)
    else:
        value = np.zeros_like(r)
        slope = np.zeros_like(r)
    if scalar:
        return float(value), float(slope)
    return value, slope


def _slope_abs_fraction(profile: ProfileSpec, bound: float) -> float:
    """Fraction of one period on which ``|b'| <= bound``."""
    if bound < 0:
        return 0.0
    if profile.kind == "zero" or profile.amplitude == 0:
        return 1.0
    if profile.kind == "triangle-wave":
        return 1.0 if profile.amplitude <= bound else 0.0
    # |b'| = L |sin(2 pi t)|, L = pi a / 2
    ratio = bound / profile.lipschitz
    if ratio >= 1.0:
        return 1.0
    return 2.0 * math.asin(ratio) / math.pi


@dataclass(frozen=True)
class DomainSpec:
    """The strip ``(0, w) x (-d, g_eps)`` with ``g_eps = eps**alpha b(x1/eps)``.

    ``eps = 0`` is the unperturbed rectangle. The perturbation must stay
    below ``d / 2`` so the sheared mesh never approaches the bottom.
    """

    alpha: float = 1.0
    eps: float = 0.0
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    width: float = 1.0
    depth: float = 1.0

    def __post_init__(self):
        if not (self.width > 0 and self.depth > 0):
            raise GeometryError("width and depth must be positive")
        if not self.alpha > 0:
            raise GeometryError("alpha must be positive")
        if not self.eps >= 0:
            raise GeometryError("eps must be nonnegative")
        if self.amplitude_bound >= 0.5 * self.depth:
            raise GeometryError(
                f"perturbation height {self.amplitude_bound:.6g} must stay below depth/2 = {0.5 * self.depth:.6g}"
            )

    @property
    def scale(self) -> float:
        """``eps**alpha`` (0 for the unperturbed domain)."""
        return 0.0 if self.eps == 0 else self.eps**self.alpha

    @property
    def amplitude_bound(self) -> float:
        """``sup g_eps = eps**alpha * max b``."""
        return self.scale * self.profile.max_value

    @property
    def periods(self) -> float:
        return math.inf if self.eps == 0 else self.width / self.eps

    @property
    def whole_periods(self) -> bool:
        if self.eps == 0:
            return True
        p = self.periods
        return abs(p - round(p)) <= 1e-12 * max(1.0, p)

    def with_eps(self, eps: float) -> "DomainSpec":
        return DomainSpec(self.alpha, eps, self.profile, self.width, self.depth)

    def kink_points(self) -> np.ndarray:
        """Abscissae in [0, w] where ``g_eps'`` jumps, plus the endpoints."""
        pts = [0.0, self.width]
        if self.eps > 0 and self.profile.kinks:
            n = math.ceil(self.width / self.eps) + 1
            for k in range(n):
                for s in self.profile.kinks:
                    x = (k + s) * self.eps
                    if 0.0 < x < self.width:
                        pts.append(x)
        return np.unique(np.asarray(pts))


def g_eps(domain: DomainSpec, x1):
    """Return ``(g_eps(x1), g_eps'(x1))`` for ``x1`` in ``[0, w]`` (scalar or array)."""
    x = np.asarray(x1, dtype=float)
    if np.any(x < 0.0) or np.any(x > domain.width) or np.any(np.isnan(x)):
        raise GeometryError(f"x1 must lie in [0, {domain.width}]")
    if domain.eps == 0:
        if x.ndim == 0:
            return 0.0, 0.0
        return np.zeros_like(x), np.zeros_like(x)
    b, db = eval_profile(domain.profile, x / domain.eps)
    value = domain.scale * b
    slope = domain.eps ** (domain.alpha - 1.0) * db
    return value, slope


def piecewise_gauss(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints,
    panels: int = 1,
) -> float:
    """Composite 5-point Gauss-Legendre quadrature over consecutive breakpoints.

    Each interval ``[breakpoints[i], breakpoints[i+1]]`` is split into
    ``panels`` equal sub-panels. ``f`` is called once on all nodes.
    """
    bp = np.asarray(breakpoints, dtype=float)
    edges = np.concatenate(
        [np.linspace(a, b, panels + 1)[:-1] for a, b in zip(bp[:-1], bp[1:])] + [bp[-1:]]
    )
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    weights = half[:, None] * _GL_WEIGHTS[None, :]
    values = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return float(np.sum(weights * values))


def c_b(profile: ProfileSpec, panels: int = 64) -> float:
    """Cell average of the surface element, ``C_b = int_Y sqrt(1 + b'(y)^2) dy``."""
    if profile.piecewise_constant_slope:
        panels = 1
    breakpoints = sorted({-0.5, 0.5, *[k - 1.0 if k > 0.5 else k for k in profile.kinks]})
    return piecewise_gauss(lambda y: np.sqrt(1.0 + eval_profile(profile, y)[1] ** 2), breakpoints, panels)


class PerimeterResult(NamedTuple):
    value: float
    whole_periods: bool
    note: str


def _top_panels(domain: DomainSpec) -> int:
    if domain.eps == 0 or domain.profile.piecewise_constant_slope:
        return 1
    # smooth profile: resolve each period
    return 16


def _top_breakpoints(domain: DomainSpec) -> np.ndarray:
    pts = domain.kink_points()
    if domain.eps > 0 and not domain.profile.kinks:
        # smooth profile: one breakpoint per period keeps panels aligned with the oscillation
        n = math.floor(domain.width / domain.eps + 1e-12)
        pts = np.unique(np.concatenate([pts, domain.eps * np.arange(1, n + 1)]))
        pts = pts[pts <= domain.width]
    return pts


def exact_perimeter(domain: DomainSpec) -> PerimeterResult:
    """Perimeter of ``Omega_eps``: bottom + both sides + length of the top graph."""
    g0 = g_eps(domain, 0.0)[0]
    gw = g_eps(domain, domain.width)[0]

    def surface(x):
        return np.sqrt(1.0 + g_eps(domain, np.clip(x, 0.0, domain.width))[1] ** 2)

    top = piecewise_gauss(surface, _top_breakpoints(domain), _top_panels(domain))
    value = domain.width + (domain.depth + g0) + (domain.depth + gw) + top
    whole = domain.whole_periods
    note = "" if whole else "w/eps is not an integer: the last period is cut and side heights differ"
    return PerimeterResult(value, whole, note)


def area(domain: DomainSpec) -> float:
    """``w d + int_0^w g_eps``."""
    return domain.width * domain.depth + piecewise_gauss(
        lambda x: g_eps(domain, np.clip(x, 0.0, domain.width))[0],
        _top_breakpoints(domain),
        _top_panels(domain),
    )
