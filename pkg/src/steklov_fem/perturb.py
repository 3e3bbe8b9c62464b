"""Connecting map between ``Omega_eps`` and ``Omega``, transported norms and limit diagnostics.

``Phi_eps(x1, x2) = (x1, x2 - h_eps(x1, x2))`` pulls ``Omega_eps`` back onto
the flat strip. ``h_eps`` vanishes below ``g~ = g_eps - k_eps`` and grows
quadratically to ``g_eps`` across the blend layer ``[g~, g_eps]``, whose
thickness is ``k_eps = k_hat * ||g_eps||_inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .fem import FeFunction, assemble_stiffness, assemble_volume_mass, interpolate_onto
from .geometry import DomainSpec, _slope_abs_fraction, c_b, g_eps, piecewise_gauss
from .mesh import GAMMA, SIGMA, Mesh, PointNotFoundError

JACOBIAN_BOUNDS = (0.5, 1.5)


class ConnectingMapError(ValueError):
    pass


@dataclass(frozen=True)
class JacobianCertificate:
    min: float
    max: float
    samples: int


@dataclass(frozen=True)
class ConnectingMap:
    domain: DomainSpec
    k_hat: float
    kappa: float
    k_eps: float
    certificate: JacobianCertificate

    def g_tilde(self, x1):
        return g_eps(self.domain, x1)[0] - self.k_eps

    def h(self, x1, x2):
        """The vertical displacement ``h_eps``; zero at and below ``g~``."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if self.kappa == 0:
            return np.zeros(np.broadcast(x1, x2).shape)
        g, _ = g_eps(self.domain, x1)
        gt = g - self.k_eps
        s = (x2 - gt) / (g - gt)
        return np.where(x2 > gt, g * s * s, 0.0)

    def dh_dx2(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if self.kappa == 0:
            return np.zeros(np.broadcast(x1, x2).shape)
        g, _ = g_eps(self.domain, x1)
        gt = g - self.k_eps
        den = g - gt
        return np.where(x2 > gt, 2.0 * g * (x2 - gt) / (den * den), 0.0)

    def jacobian(self, x1, x2):
        """``det D Phi_eps = 1 - dh/dx2``."""
        return 1.0 - self.dh_dx2(x1, x2)

    def __call__(self, points):
        p = np.asarray(points, dtype=float)
        out = p.copy()
        out[..., 1] = p[..., 1] - self.h(p[..., 0], p[..., 1])
        return out


def connecting_map(domain: DomainSpec, k_hat: float = 8.0, samples_per_period: int = 64, layers: int = 16) -> ConnectingMap:
    """Build ``Phi_eps`` for ``domain`` and certify its Jacobian on a sample grid.

    Samples: ``samples_per_period`` abscissae per period (at least 64 over
    ``W``) times ``layers`` heights at the midpoints of equal slices of the
    open blend layer, plus one point below it.
    """
    if not k_hat > 4:
        raise ConnectingMapError("k_hat must be > 4")
    kappa = domain.amplitude_bound
    k_eps = k_hat * kappa
    if k_eps >= domain.depth:
        raise ConnectingMapError(
            f"blend layer thickness k_eps = {k_eps:.6g} reaches the bottom (depth {domain.depth}); "
            f"reduce eps or k_hat"
        )
    if domain.eps > 0:
        n = max(64, int(math.ceil(samples_per_period * domain.width / domain.eps)))
    else:
        n = 64
    x1 = domain.width * (np.arange(n) + 0.5) / n
    x1 = np.concatenate([x1, domain.kink_points()])
    g, _ = g_eps(domain, x1)
    frac = (np.arange(layers) + 0.5) / layers
    X1 = np.repeat(x1, layers + 1)
    X2 = np.concatenate([np.concatenate([[gi - k_eps - 0.5 * (domain.depth - k_eps)], gi - k_eps + frac * k_eps]) for gi in g])
    proto = ConnectingMap(domain, k_hat, kappa, k_eps, JacobianCertificate(1.0, 1.0, 0))
    jac = proto.jacobian(X1, X2)
    cert = JacobianCertificate(float(jac.min()), float(jac.max()), int(jac.size))
    lo, hi = JACOBIAN_BOUNDS
    if not (lo <= cert.min and cert.max <= hi):
        raise ConnectingMapError(f"Jacobian certificate [{cert.min}, {cert.max}] leaves [{lo}, {hi}]")
    return ConnectingMap(domain, k_hat, kappa, k_eps, cert)


def apply_E(u: FeFunction, eps_mesh: Mesh, cmap: ConnectingMap) -> FeFunction:
    """``(E_eps u)(x) = u(Phi_eps(x))`` at every vertex of ``eps_mesh``."""
    pts = cmap(eps_mesh.vertices)
    tri, bary = u.mesh.locate(pts)
    missing = np.nonzero(tri < 0)[0]
    if missing.size:
        k = int(missing[0])
        raise PointNotFoundError(f"Phi_eps maps vertex {k} to {tuple(pts[k])}, outside the reference mesh")
    return FeFunction(eps_mesh, kernels.evaluate(u.coeffs, u.mesh.triangles, tri, bary))


def h1_intersection_error(u_eps: FeFunction, u: FeFunction, align_sign: bool = True) -> float:
    """Full H1 norm over ``Omega`` (= ``Omega_eps`` cap ``Omega`` when ``g_eps >= 0``) of ``u_eps - u``.

    ``u_eps`` is interpolated onto the mesh of ``u``. With ``align_sign``
    the sign of ``u_eps`` minimizing the error is used.
    """
    mesh = u.mesh
    w = interpolate_onto(u_eps.mesh, u_eps, mesh).coeffs
    A = assemble_stiffness(mesh) + assemble_volume_mass(mesh)
    best = math.inf
    for sign in ((1.0, -1.0) if align_sign else (1.0,)):
        diff = sign * w - u.coeffs
        best = min(best, math.sqrt(max(float(diff @ (A @ diff)), 0.0)))
    return best


def _surface_breakpoints(domain: DomainSpec):
    pts = domain.kink_points()
    if domain.eps > 0 and not domain.profile.kinks:
        n = math.floor(domain.width / domain.eps + 1e-12)
        pts = np.unique(np.concatenate([pts, domain.eps * np.arange(1, n + 1)]))
        pts = pts[pts <= domain.width]
    return pts


def weak_l1_residual(domain: DomainSpec, phi: Callable, target_weight: float, panels: int = 8) -> float:
    """``|int_W (sqrt(1 + g_eps'^2) - target) phi dx1|`` by kink-aware composite Gauss quadrature."""
    if not domain.eps > 0:
        raise ValueError("eps must be positive")
    if domain.profile.piecewise_constant_slope:
        panels = max(panels, 1)

    def integrand(x):
        x = np.clip(x, 0.0, domain.width)
        s = np.sqrt(1.0 + g_eps(domain, x)[1] ** 2)
        return (s - target_weight) * np.asarray(phi(x), dtype=float)

    return abs(piecewise_gauss(integrand, _surface_breakpoints(domain), panels))


def sublevel_measure(domain: DomainSpec, t: float) -> float:
    """Length of ``{x1 in W : sqrt(1 + g_eps'(x1)^2) <= t}``.

    Exact for piecewise-constant slopes and, on whole periods, for the
    raised cosine; a trailing partial period of a smooth profile is
    resolved by midpoint sampling.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    w = domain.width
    if t < 1:
        return 0.0
    if domain.eps == 0:
        return w
    # sqrt(1 + s^2) <= t  <=>  |s| <= sqrt(t^2 - 1); g' = eps^(alpha-1) b'
    bound = math.sqrt(t * t - 1.0) / domain.eps ** (domain.alpha - 1.0)
    if domain.profile.piecewise_constant_slope:
        pts = domain.kink_points()
        mid = 0.5 * (pts[:-1] + pts[1:])
        _, slope = g_eps(domain, mid)
        ok = np.sqrt(1.0 + slope**2) <= t
        return float(np.sum(np.diff(pts)[ok]))
    full = math.floor(w / domain.eps + 1e-12)
    measure = full * domain.eps * _slope_abs_fraction(domain.profile, bound)
    rest = w - full * domain.eps
    if rest > 1e-15 * w:
        n = 10_000
        x = full * domain.eps + rest * (np.arange(n) + 0.5) / n
        _, slope = g_eps(domain, x)
        measure += rest * float(np.mean(np.sqrt(1.0 + slope**2) <= t))
    return float(measure)


@dataclass(frozen=True)
class LimitDescriptor:
    """Limit data for the oscillating family: ``C_b`` and the boundary weight ``gamma``."""

    alpha: float
    c_b: float

    @property
    def regime(self) -> str:
        if self.alpha > 1:
            return "stability"
        if self.alpha == 1:
            return "weighted-limit"
        return "degeneration"

    @property
    def gamma(self) -> dict:
        """Boundary weight per edge tag: ``C_b`` on Gamma, 1 on Sigma."""
        return {GAMMA: self.c_b, SIGMA: 1.0}

    def predicted(self, mu0: float) -> float:
        """Limit of ``mu_n^eps`` given the unperturbed ``mu_n^0``."""
        if self.alpha > 1:
            return mu0
        if self.alpha == 1:
            return mu0 / self.c_b
        return 0.0


def limit_descriptor(domain: DomainSpec) -> LimitDescriptor:
    return LimitDescriptor(domain.alpha, c_b(domain.profile))
