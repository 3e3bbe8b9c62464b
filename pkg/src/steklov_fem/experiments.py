"""Parameter studies over the oscillating family: eigenvalue series, transported norms, eigenfunction errors."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fem import FeFunction, fe_norms
from .geometry import DomainSpec, ProfileSpec
from .mesh import MeshResolution, build_strip_mesh, required_nx
from .perturb import apply_E, connecting_map, h1_intersection_error, limit_descriptor
from .steklov import solve_steklov

DYADIC_EPS = (1 / 4, 1 / 8, 1 / 16, 1 / 32)


def shared_resolution(base: DomainSpec, eps_list: Sequence[float], per_period: int, rows: int) -> MeshResolution:
    """One grid for the whole eps list: ``per_period`` columns per period of the finest eps.

    Sharing the grid keeps the mesh connectivity fixed across eps, so the
    eps = 0 reference and every perturbed mesh differ only by the shear.
    """
    finest = min(eps_list)
    nx = round(per_period * base.width / finest)
    for eps in eps_list:
        nx = required_nx(base.with_eps(eps), nx)
    return MeshResolution(nx, rows)


@dataclass(frozen=True)
class MixedSeries:
    alpha: float
    eps: tuple
    mu0: np.ndarray  # (n_modes,)
    mu: np.ndarray  # (len(eps), n_modes)
    residuals: np.ndarray
    dofs: np.ndarray
    ms: np.ndarray
    c_b: float

    def predicted(self) -> np.ndarray:
        lim = limit_descriptor(DomainSpec(alpha=self.alpha))
        return np.array([lim.predicted(m) for m in self.mu0])


def reference_spectrum(
    res: MeshResolution, profile: ProfileSpec, n_modes: int, tol: float = 1e-9, width=1.0, depth=1.0, seed: int = 0
):
    mesh = build_strip_mesh(DomainSpec(1.0, 0.0, profile, width, depth), res)
    return solve_steklov(mesh, "mixed", n_modes, tol=tol, seed=seed)


def solve_cell(domain: DomainSpec, res: MeshResolution, n_modes: int, tol: float = 1e-9, seed: int = 0):
    """Mixed problem on one ``Omega_eps``; returns (spectrum, free dofs, wall ms)."""
    t0 = time.perf_counter()
    mesh = build_strip_mesh(domain, res)
    spec = solve_steklov(mesh, "mixed", n_modes, tol=tol, seed=seed)
    dofs = mesh.n_vertices - mesh.boundary_vertices(("Sigma",)).size
    return spec, dofs, 1e3 * (time.perf_counter() - t0)


def mixed_series(
    alpha: float,
    eps_list: Sequence[float] = DYADIC_EPS,
    profile: ProfileSpec = ProfileSpec(),
    per_period: int = 8,
    rows: int = 64,
    n_modes: int = 1,
    tol: float = 1e-9,
) -> MixedSeries:
    base = DomainSpec(alpha, 0.0, profile)
    res = shared_resolution(base, eps_list, per_period, rows)
    ref = reference_spectrum(res, profile, n_modes, tol)
    mus, resid, dofs, ms = [], [], [], []
    for eps in eps_list:
        spec, nd, t = solve_cell(base.with_eps(eps), res, n_modes, tol)
        mus.append(spec.lambdas)
        resid.append(spec.residuals)
        dofs.append(nd)
        ms.append(t)
    return MixedSeries(
        alpha, tuple(eps_list), ref.lambdas, np.array(mus), np.array(resid), np.array(dofs), np.array(ms),
        limit_descriptor(base).c_b,
    )


def emap_resolution(domain: DomainSpec) -> MeshResolution:
    """Grid with ``h <= eps^2`` in both directions (and the oscillation rule)."""
    eps = domain.eps
    ny = int(math.ceil(domain.depth / eps**2 - 1e-9))
    nx = required_nx(domain, int(math.ceil(domain.width / eps**2 - 1e-9)))
    return MeshResolution(nx, ny)


@dataclass(frozen=True)
class EmapRecord:
    alpha: float
    eps: float
    nx: int
    ny: int
    norm_E: float
    norm_0: float
    norm_gamma: float
    target: float  # nan in the degeneration regime
    rel_gap: float
    jac_min: float
    jac_max: float


def emap_point(domain: DomainSpec, f: Callable = lambda x1, x2: x1 + x2, k_hat: float = 8.0, res: MeshResolution | None = None) -> EmapRecord:
    """``||E_eps u||_eps`` against ``||u||_0`` / ``||u||_gamma`` for the interpolant ``u`` of ``f``."""
    cmap = connecting_map(domain, k_hat)
    res = emap_resolution(domain) if res is None else res
    ref_mesh = build_strip_mesh(domain.with_eps(0.0), res)
    eps_mesh = build_strip_mesh(domain, res)
    u = FeFunction.interpolate(ref_mesh, f)
    Eu = apply_E(u, eps_mesh, cmap)
    lim = limit_descriptor(domain)
    norm_E = fe_norms(eps_mesh, Eu).combined
    norm_0 = fe_norms(ref_mesh, u).combined
    norm_g = fe_norms(ref_mesh, u, weight=lim.gamma).combined
    target = {"stability": norm_0, "weighted-limit": norm_g}.get(lim.regime, math.nan)
    return EmapRecord(
        domain.alpha, domain.eps, res.nx, res.ny, norm_E, norm_0, norm_g, target,
        abs(norm_E - target) / target, cmap.certificate.min, cmap.certificate.max,
    )


def eigenfunction_errors(
    alpha: float,
    eps_list: Sequence[float] = DYADIC_EPS,
    profile: ProfileSpec = ProfileSpec(),
    per_period: int = 8,
    rows: int = 64,
    mode_index: int = 0,
) -> np.ndarray:
    """H1(Omega) errors between sign-aligned mixed eigenfunctions on ``Omega_eps`` and on ``Omega``."""
    base = DomainSpec(alpha, 0.0, profile)
    res = shared_resolution(base, eps_list, per_period, rows)
    ref = reference_spectrum(res, profile, mode_index + 1)
    u = ref.eigenfunction(mode_index)
    out = []
    for eps in eps_list:
        spec, _, _ = solve_cell(base.with_eps(eps), res, mode_index + 1)
        out.append(h1_intersection_error(spec.eigenfunction(mode_index), u))
    return np.array(out)
