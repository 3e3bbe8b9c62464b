"""Discrete Steklov eigenproblem ``K v = lambda M v`` by two independent routes.

1. Subspace iteration on the resolvent ``S = T^{-1} M`` with ``T = K + M``;
   an eigenvalue ``mu`` of ``S`` gives ``lambda = 1/mu - 1``.
2. Dense reduction to the boundary: the Dirichlet-to-Neumann Schur
   complement against the boundary mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DIRECT_MAX = 50_000


class EigenSolverError(RuntimeError):
    pass


class NotSPDError(EigenSolverError):
    pass


class ConvergenceError(EigenSolverError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class SPDSolver:
    """Solves ``A x = b`` for sparse SPD ``A``.

    Direct symmetric factorization (SuperLU in symmetric mode with a
    symmetric fill-reducing ordering and no pivoting, i.e. ``L D L^T``)
    up to ``direct_max`` unknowns; Jacobi-preconditioned CG above that.
    """

    def __init__(self, A, direct_max: int = DIRECT_MAX, cg_rtol: float = 1e-12):
        A = sp.csc_matrix(A)
        self.n = A.shape[0]
        self.A = A
        self.cg_rtol = cg_rtol
        diag = A.diagonal()
        if np.any(diag <= 0):
            raise NotSPDError("matrix has a nonpositive diagonal entry")
        if self.n <= direct_max:
            self.method = "cholesky"
            try:
                lu = spla.splu(
                    A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                    options={"SymmetricMode": True},
                )
            except RuntimeError as exc:
                raise NotSPDError(f"factorization failed: {exc}") from exc
            pivots = lu.U.diagonal()
            if not np.array_equal(lu.perm_r, lu.perm_c) or np.any(pivots <= 0):
                raise NotSPDError("matrix is not symmetric positive definite (nonpositive pivot)")
            self._lu = lu
        else:
            self.method = "cg"
            self._jacobi = spla.LinearOperator(A.shape, matvec=lambda x: x / diag, dtype=float)

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self.method == "cholesky":
            return self._lu.solve(b)
        cols = b.reshape(self.n, -1)
        out = np.empty_like(cols)
        for j in range(cols.shape[1]):
            x, info = spla.cg(self.A, cols[:, j], rtol=self.cg_rtol, atol=0.0, M=self._jacobi, maxiter=20 * self.n)
            if info != 0:
                raise ConvergenceError(f"CG did not converge on column {j} (info={info})")
            out[:, j] = x
        return out.reshape(b.shape)


@dataclass(frozen=True, eq=False)
class OperatorBundle:
    """Stiffness ``K`` and boundary mass ``M`` restricted to the free dofs, and ``T = K + M``."""

    K: sp.csr_matrix
    M: sp.csr_matrix
    T: sp.csr_matrix
    free: np.ndarray
    n_total: int

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @property
    def boundary(self) -> np.ndarray:
        """Free-dof indices (local numbering) that carry boundary mass."""
        return np.nonzero(self.M.diagonal() > 0)[0]

    def expand(self, vectors: np.ndarray) -> np.ndarray:
        """Lift free-dof vectors to full length, zero on eliminated dofs."""
        out = np.zeros((self.n_total,) + vectors.shape[1:])
        out[self.free] = vectors
        return out


def make_bundle(K, M, dirichlet=()) -> OperatorBundle:
    """Eliminate ``dirichlet`` rows and columns and form ``T = K + M``."""
    n = K.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[np.asarray(dirichlet, dtype=np.int64)] = False
    free = np.nonzero(mask)[0]
    K = sp.csr_matrix(K)[free][:, free].tocsr()
    M = sp.csr_matrix(M)[free][:, free].tocsr()
    return OperatorBundle(K, M, (K + M).tocsr(), free, n)


@dataclass(frozen=True, eq=False)
class EigenPairs:
    lambdas: np.ndarray  # ascending
    vectors: np.ndarray  # columns
    residuals: np.ndarray
    iterations: int = 0

    @property
    def mu(self) -> np.ndarray:
        """Eigenvalues of the resolvent, ``1 / (1 + lambda)``, descending."""
        return 1.0 / (1.0 + self.lambdas)


def _t_orthonormalize(Z, T):
    # Cholesky QR, applied twice for stability
    for _ in range(2):
        G = Z.T @ (T @ Z)
        G = 0.5 * (G + G.T)
        try:
            L = la.cholesky(G, lower=True)
        except la.LinAlgError as exc:
            raise EigenSolverError("iteration block lost rank") from exc
        Z = la.solve_triangular(L, Z.T, lower=True).T
    return Z


def solve_via_resolvent(
    bundle: OperatorBundle,
    n_modes: int,
    tol: float = 1e-9,
    max_iter: int = 500,
    seed: int = 0,
    direct_max: int = DIRECT_MAX,
) -> EigenPairs:
    """The ``n_modes`` smallest eigenvalues by block subspace iteration on ``S = T^{-1} M``.

    Each sweep applies ``S`` to a block of ``n_modes + 5`` vectors,
    T-orthonormalizes, and performs Rayleigh-Ritz. Stops when every wanted
    residual ``||K v - lambda M v|| / ||v||_T`` is below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n_bnd = bundle.boundary.size
    if not 1 <= n_modes <= n_bnd:
        raise ValueError(f"n_modes must be between 1 and the number of boundary dofs ({n_bnd})")
    K, M, T = bundle.K, bundle.M, bundle.T
    solver = SPDSolver(T, direct_max=direct_max)
    p = min(n_modes + 5, n_bnd)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((bundle.n, p))
    res = np.full(n_modes, np.inf)
    for it in range(1, max_iter + 1):
        Z = solver.solve(M @ X)
        Q = _t_orthonormalize(Z, T)
        A = Q.T @ (M @ Q)
        mu, C = la.eigh(0.5 * (A + A.T))
        order = np.argsort(mu)[::-1]
        mu, C = mu[order], C[:, order]
        X = Q @ C
        lam = 1.0 / mu[:n_modes] - 1.0
        V = X[:, :n_modes]
        R = K @ V - (M @ V) * lam[None, :]
        tnorm = np.sqrt(np.einsum("ij,ij->j", V, T @ V))
        res = np.linalg.norm(R, axis=0) / tnorm
        if np.all(res < tol):
            return EigenPairs(lam, V, res, it)
    raise ConvergenceError(
        f"subspace iteration did not converge in {max_iter} iterations; residuals {res}", residuals=res
    )


def dtn_schur(K, boundary, interior, direct_max: int = DIRECT_MAX) -> np.ndarray:
    """Dense Dirichlet-to-Neumann matrix ``K_bb - K_bi K_ii^{-1} K_ib``."""
    K = sp.csr_matrix(K)
    b = np.asarray(boundary, dtype=np.int64)
    i = np.asarray(interior, dtype=np.int64)
    Kbb = K[b][:, b].toarray()
    if i.size == 0:
        return Kbb
    Kii = K[i][:, i]
    Kib = K[i][:, b].toarray()
    try:
        solver = SPDSolver(Kii, direct_max=direct_max)
    except NotSPDError as exc:
        raise NotSPDError(f"interior block is singular or indefinite: {exc}") from exc
    X = solver.solve(Kib)
    S = Kbb - Kib.T @ X
    return 0.5 * (S + S.T)


def solve_gevp_dense(A, B, n_modes: Optional[int] = None) -> EigenPairs:
    """All (or the first ``n_modes``) eigenpairs of ``A v = lambda B v``, ascending.

    ``B = L L^T`` by Cholesky; the symmetric matrix ``L^{-1} A L^{-T}`` is
    diagonalized and eigenvectors mapped back with ``L^{-T}``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    try:
        L = la.cholesky(B, lower=True)
    except la.LinAlgError as exc:
        raise NotSPDError("B is not symmetric positive definite") from exc
    C = la.solve_triangular(L, la.solve_triangular(L, A, lower=True).T, lower=True)
    w, Y = la.eigh(0.5 * (C + C.T))
    V = la.solve_triangular(L.T, Y, lower=False)
    if n_modes is not None:
        w, V = w[:n_modes], V[:, :n_modes]
    R = A @ V - (B @ V) * w[None, :]
    bnorm = np.sqrt(np.einsum("ij,ij->j", V, B @ V))
    return EigenPairs(w, V, np.linalg.norm(R, axis=0) / bnorm)
