import numpy as np
import pytest
import scipy.sparse as sp

from steklov_fem.eigsolve import (
    ConvergenceError,
    NotSPDError,
    SPDSolver,
    dtn_schur,
    make_bundle,
    solve_gevp_dense,
    solve_via_resolvent,
)


def laplacian_1d(n):
    return sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")


def test_spd_solver_direct_and_cg():
    A = laplacian_1d(200) + sp.identity(200) * 1e-3
    b = np.random.default_rng(0).standard_normal(200)
    direct = SPDSolver(A)
    cg = SPDSolver(A, direct_max=10)
    assert (direct.method, cg.method) == ("cholesky", "cg")
    x = direct.solve(b)
    np.testing.assert_allclose(A @ x, b, atol=1e-10)
    np.testing.assert_allclose(cg.solve(b), x, rtol=1e-7)
    X = direct.solve(np.column_stack([b, 2 * b]))
    np.testing.assert_allclose(X[:, 1], 2 * x, rtol=1e-12)


def test_spd_solver_rejects_indefinite():
    with pytest.raises(NotSPDError):
        SPDSolver(sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]])))
    with pytest.raises(NotSPDError):
        SPDSolver(sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 1.0]])))


def test_diagonal_pencil():
    K = sp.diags([2.0, 5.0, 9.0, 14.0, 20.0, 30.0, 44.0, 60.0])
    M = sp.identity(8, format="csr")
    pairs = solve_via_resolvent(make_bundle(K, M), 2)
    np.testing.assert_allclose(pairs.lambdas, [2.0, 5.0], rtol=1e-12)
    np.testing.assert_allclose(pairs.mu, [1 / 3, 1 / 6], rtol=1e-12)
    assert np.all(pairs.residuals < 1e-9)


def test_dirichlet_elimination():
    K = laplacian_1d(6)
    b = make_bundle(K, sp.identity(6, format="csr"), dirichlet=[0, 5])
    assert b.n == 4 and b.n_total == 6
    lifted = b.expand(np.ones((4, 2)))
    assert lifted[0, 0] == 0 and lifted[5, 1] == 0 and lifted[1, 0] == 1


def test_resolvent_matches_dense():
    rng = np.random.default_rng(4)
    n = 60
    K = laplacian_1d(n) + sp.identity(n) * 0.1
    d = rng.uniform(1.0, 2.0, n)
    M = sp.diags(d, format="csr")
    pairs = solve_via_resolvent(make_bundle(K, M), 4, seed=3)
    dense = solve_gevp_dense(K.toarray(), M.toarray(), 4)
    np.testing.assert_allclose(pairs.lambdas, dense.lambdas, rtol=1e-12)


def test_resolvent_seed_determinism():
    K = laplacian_1d(80) + sp.identity(80)
    M = sp.identity(80, format="csr")
    a = solve_via_resolvent(make_bundle(K, M), 3, seed=7)
    b = solve_via_resolvent(make_bundle(K, M), 3, seed=7)
    np.testing.assert_array_equal(a.lambdas, b.lambdas)
    np.testing.assert_array_equal(a.vectors, b.vectors)


def test_resolvent_nonconvergence_reports_residuals():
    K = laplacian_1d(400) + sp.identity(400) * 1e-4
    M = sp.identity(400, format="csr")
    with pytest.raises(ConvergenceError) as info:
        solve_via_resolvent(make_bundle(K, M), 3, max_iter=2, tol=1e-14)
    assert info.value.residuals is not None


def test_dtn_schur_two_node_chain():
    # path 0 - 1 - 2 with unit springs; eliminating node 1 gives a spring of stiffness 1/2
    K = laplacian_1d(3).tolil()
    K[0, 0] = K[2, 2] = 1.0
    D = dtn_schur(K.tocsr(), [0, 2], [1])
    np.testing.assert_allclose(D, [[0.5, -0.5], [-0.5, 0.5]])
    np.testing.assert_array_equal(dtn_schur(K.tocsr(), [0, 1, 2], []), K.toarray())


def test_dense_gevp_rejects_indefinite_b():
    with pytest.raises(NotSPDError):
        solve_gevp_dense(np.eye(2), np.diag([1.0, -1.0]))
