"""Full, mixed Dirichlet-Steklov and constant-weight Steklov problems on a mesh.

Eigenvalues are stored ascending and indexed from 0. In ``full`` mode
``lambdas[0]`` is the zero eigenvalue with constant eigenfunction; in
``mixed`` and ``weighted`` modes ``lambdas[0]`` is the first (positive)
eigenvalue ``mu_1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la

from .eigsolve import (
    OperatorBundle,
    SPDSolver,
    dtn_schur,
    make_bundle,
    solve_gevp_dense,
    solve_via_resolvent,
)
from .fem import FeFunction, assemble_boundary_mass, assemble_stiffness
from .mesh import GAMMA, SIGMA, TAGS, Mesh

MODES = ("full", "mixed", "weighted")
CLUSTER_RTOL = 1e-6


class SteklovError(ValueError):
    pass


class UnboundedQuotientError(ArithmeticError):
    """The trial function has zero boundary trace; the Rayleigh quotient is +infinity along it."""


@dataclass(frozen=True, eq=False)
class ProblemMatrices:
    mode: str
    weight: float
    K: object  # full stiffness
    M: object  # full Steklov-boundary mass (weighted)
    dirichlet: np.ndarray
    steklov_tags: tuple

    def bundle(self) -> OperatorBundle:
        return make_bundle(self.K, self.M, self.dirichlet)


def problem_matrices(mesh: Mesh, mode: str = "full", weight: float = 1.0) -> ProblemMatrices:
    """Stiffness, Steklov-boundary mass and Dirichlet vertex set for ``mode``.

    ``full``: the whole boundary carries the Steklov condition.
    ``mixed``: Steklov on Gamma, ``u = 0`` on Sigma (vertices on any Sigma edge).
    ``weighted``: as mixed with the Gamma mass multiplied by ``weight``.
    """
    if mode not in MODES:
        raise SteklovError(f"unknown mode {mode!r}; expected one of {MODES}")
    K = assemble_stiffness(mesh)
    if mode == "full":
        return ProblemMatrices(mode, 1.0, K, assemble_boundary_mass(mesh, TAGS), np.array([], dtype=np.int64), TAGS)
    if not np.any(mesh.edge_tags == SIGMA):
        raise SteklovError(f"{mode} mode needs Sigma-tagged (Dirichlet) edges")
    c = float(weight) if mode == "weighted" else 1.0
    M = assemble_boundary_mass(mesh, (GAMMA,), c)
    return ProblemMatrices(mode, c, K, M, mesh.boundary_vertices((SIGMA,)), (GAMMA,))


@dataclass(frozen=True, eq=False)
class SteklovSpectrum:
    mode: str
    weight: float
    mesh: Mesh
    lambdas: np.ndarray
    vectors: np.ndarray  # (n_vertices, n_modes), boundary-normalized
    residuals: np.ndarray
    iterations: int = 0

    @property
    def n_modes(self) -> int:
        return self.lambdas.size

    @property
    def eigenfunctions(self) -> list[FeFunction]:
        return [FeFunction(self.mesh, self.vectors[:, k]) for k in range(self.n_modes)]

    def eigenfunction(self, k: int) -> FeFunction:
        return FeFunction(self.mesh, self.vectors[:, k])

    def clusters(self, rtol: float = CLUSTER_RTOL) -> list[list[int]]:
        """Group consecutive indices whose eigenvalues agree to ``rtol`` relative."""
        groups: list[list[int]] = []
        for k, lam in enumerate(self.lambdas):
            if groups:
                ref = self.lambdas[groups[-1][0]]
                if abs(lam - ref) <= rtol * max(abs(lam), abs(ref), 1e-300) or (abs(lam) < 1e-8 and abs(ref) < 1e-8):
                    groups[-1].append(k)
                    continue
            groups.append([k])
        return groups


def _normalize(vectors: np.ndarray, pm: ProblemMatrices) -> np.ndarray:
    M = pm.M
    M_gamma_unweighted = M / pm.weight
    out = np.empty_like(vectors)
    steklov_dofs = np.nonzero(M.diagonal() > 0)[0]
    for k in range(vectors.shape[1]):
        v = vectors[:, k]
        v = v / np.sqrt(float(v @ (M @ v)))
        s = float(np.sum(M_gamma_unweighted @ v))
        if abs(s) >= 1e-12:
            flip = s < 0
        else:
            nz = steklov_dofs[np.abs(v[steklov_dofs]) > 0]
            flip = nz.size > 0 and v[nz[0]] < 0
        out[:, k] = -v if flip else v
    return out


def solve_steklov(
    mesh: Mesh,
    mode: str = "full",
    n_modes: int = 4,
    weight: float = 1.0,
    tol: float = 1e-9,
    method: str = "resolvent",
    seed: int = 0,
) -> SteklovSpectrum:
    """Smallest ``n_modes`` eigenpairs of the Steklov problem on ``mesh``.

    Eigenfunctions satisfy ``int weight u^2 dS = 1`` over the Steklov
    boundary and ``int u dS >= 0`` (fallback: first nonzero boundary
    coefficient positive). ``method`` is ``"resolvent"`` (subspace
    iteration) or ``"dtn"`` (dense boundary Schur complement).
    """
    if n_modes < 1:
        raise SteklovError("n_modes must be >= 1")
    pm = problem_matrices(mesh, mode, weight)
    bundle = pm.bundle()
    n_bnd = bundle.boundary.size
    if n_modes > n_bnd:
        raise SteklovError(f"n_modes={n_modes} exceeds the {n_bnd} Steklov boundary dofs")
    if method == "resolvent":
        pairs = solve_via_resolvent(bundle, n_modes, tol=tol, seed=seed)
        free_vectors = pairs.vectors
    elif method == "dtn":
        pairs, free_vectors = _solve_dtn(bundle, n_modes)
    else:
        raise SteklovError(f"unknown method {method!r}")
    vectors = _normalize(bundle.expand(free_vectors), pm)
    return SteklovSpectrum(mode, pm.weight, mesh, pairs.lambdas, vectors, pairs.residuals, pairs.iterations)


def _solve_dtn(bundle: OperatorBundle, n_modes: int):
    b = bundle.boundary
    interior = np.setdiff1d(np.arange(bundle.n), b)
    D = dtn_schur(bundle.K, b, interior)
    B = bundle.M[b][:, b].toarray()
    pairs = solve_gevp_dense(D, B, n_modes)
    # harmonic extension of the boundary eigenvectors
    V = np.zeros((bundle.n, n_modes))
    V[b] = pairs.vectors
    if interior.size:
        Kii = bundle.K[interior][:, interior]
        Kib = bundle.K[interior][:, b]
        V[interior] = -SPDSolver(Kii).solve(Kib @ pairs.vectors)
    return pairs, V


def rayleigh_quotient(mesh: Mesh, u: FeFunction, mode: str = "full", weight: float = 1.0) -> float:
    """``u^T K u / u^T M u`` with the boundary form of ``mode``."""
    pm = problem_matrices(mesh, mode, weight)
    c = u.coeffs
    den = float(c @ (pm.M @ c))
    if not den > 0:
        raise UnboundedQuotientError(
            "trial function has zero trace on the Steklov boundary; the quotient is unbounded (+inf)"
        )
    return float(c @ (pm.K @ c)) / den


@dataclass(frozen=True)
class GramReport:
    boundary: np.ndarray
    stiffness: np.ndarray
    boundary_deviation: float
    stiffness_deviation: float
    boundary_offdiag: float
    stiffness_offdiag: float


def orthogonality_gram(spec: SteklovSpectrum, mesh: Optional[Mesh] = None) -> GramReport:
    """Boundary and stiffness Gram matrices of the eigenfunctions.

    Deviations are measured blockwise: entries between different clusters
    must vanish; inside a cluster the boundary block must be the identity
    and the stiffness block ``diag(lambda)``.
    """
    mesh = spec.mesh if mesh is None else mesh
    pm = problem_matrices(mesh, spec.mode, spec.weight)
    U = spec.vectors
    GM = U.T @ (pm.M @ U)
    GK = U.T @ (pm.K @ U)
    n = spec.n_modes
    # inside a cluster a rotated basis may mix stiffness entries by up to the cluster spread
    allowance = np.zeros((n, n))
    for group in spec.clusters():
        spread = float(np.ptp(spec.lambdas[group]))
        allowance[np.ix_(group, group)] = spread
    off = ~np.eye(n, dtype=bool)
    dev_m = np.abs(GM - np.eye(n))
    dev_k = np.abs(GK - np.diag(spec.lambdas))
    return GramReport(
        GM,
        GK,
        float(dev_m.max(initial=0.0)),
        float(dev_k.max(initial=0.0)),
        float(np.max(np.abs(GM)[off], initial=0.0)),
        float(np.max(np.clip(np.abs(GK) - allowance, 0.0, None)[off], initial=0.0)),
    )


def minimax_check(spec: SteklovSpectrum, mesh: Optional[Mesh] = None, n: int = 0, extra_vectors=None) -> float:
    """Max of the Rayleigh quotient over span(first n+1 eigenfunctions [+ extra_vectors]).

    Computed as the largest eigenvalue of the projected pencil; equals
    ``lambdas[n]`` when no extra vectors are added.
    """
    mesh = spec.mesh if mesh is None else mesh
    if n + 1 > spec.n_modes:
        raise SteklovError(f"need {n + 1} eigenfunctions, spectrum has {spec.n_modes}")
    pm = problem_matrices(mesh, spec.mode, spec.weight)
    U = spec.vectors[:, : n + 1]
    if extra_vectors is not None:
        extra = np.asarray(extra_vectors, dtype=float).reshape(mesh.n_vertices, -1).copy()
        extra[pm.dirichlet] = 0.0
        U = np.column_stack([U, extra])
    A = U.T @ (pm.K @ U)
    B = U.T @ (pm.M @ U)
    w = la.eigh(0.5 * (A + A.T), 0.5 * (B + B.T), eigvals_only=True)
    return float(w[-1])
