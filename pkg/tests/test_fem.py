import math

import numpy as np
import pytest

from steklov_fem.fem import (
    FeFunction,
    assemble_boundary_mass,
    assemble_stiffness,
    assemble_volume_mass,
    fe_norms,
    interpolate_onto,
)
from steklov_fem.geometry import DomainSpec, ProfileSpec
from steklov_fem.mesh import GAMMA, SIGMA, Mesh, MeshError, MeshResolution, PointNotFoundError, build_strip_mesh


def reference_triangle():
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return Mesh(v, [[0, 1, 2]], [[0, 1], [1, 2], [2, 0]], [SIGMA, GAMMA, SIGMA])


def test_reference_element_matrices():
    mesh = reference_triangle()
    K = assemble_stiffness(mesh).toarray()
    np.testing.assert_allclose(K, 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]]), atol=1e-15)
    M = assemble_volume_mass(mesh).toarray()
    np.testing.assert_allclose(M, np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 24)
    B = assemble_boundary_mass(mesh, (GAMMA,)).toarray()
    s = math.sqrt(2) / 6
    np.testing.assert_allclose(B[1:, 1:], s * np.array([[2, 1], [1, 2]]))


def test_stiffness_kernel_and_symmetry(wavy_strip):
    K = assemble_stiffness(wavy_strip)
    assert abs(K - K.T).max() == 0.0
    assert np.abs(K @ np.ones(wavy_strip.n_vertices)).max() < 1e-12


def test_linear_energy_exact(wavy_strip):
    # |grad(a x1 + b x2)|^2 integrated is (a^2 + b^2) |Omega|
    from steklov_fem.geometry import area

    u = FeFunction.interpolate(wavy_strip, lambda x, y: 2 * x - y)
    K = assemble_stiffness(wavy_strip)
    assert u.coeffs @ (K @ u.coeffs) == pytest.approx(5.0 * area(wavy_strip.domain), rel=1e-13)


def test_mass_totals(wavy_strip):
    one = np.ones(wavy_strip.n_vertices)
    B = assemble_boundary_mass(wavy_strip, (GAMMA,))
    assert one @ (B @ one) == pytest.approx(math.sqrt(2.0), rel=1e-14)
    Bs = assemble_boundary_mass(wavy_strip, (SIGMA,))
    assert one @ (Bs @ one) == pytest.approx(3.0, rel=1e-14)


def test_weighted_boundary_mass(strip16):
    B1 = assemble_boundary_mass(strip16, (GAMMA,))
    B2 = assemble_boundary_mass(strip16, (GAMMA,), 2.5)
    np.testing.assert_allclose(B2.toarray(), 2.5 * B1.toarray())
    Bt = assemble_boundary_mass(strip16, weight={GAMMA: 2.0, SIGMA: 1.0})
    one = np.ones(strip16.n_vertices)
    assert one @ (Bt @ one) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        assemble_boundary_mass(strip16, weight=0.5)
    with pytest.raises(MeshError):
        assemble_boundary_mass(strip16, ("Nothing",))


def test_fe_norms_linear(strip16):
    u = FeFunction.interpolate(strip16, lambda x, y: x)
    r = fe_norms(strip16, u)
    assert r.h1_semi == pytest.approx(1.0)
    # boundary: top 1/3 + bottom 1/3 + right side 1
    assert r.boundary_l2 ** 2 == pytest.approx(1 / 3 + 1 / 3 + 1.0)
    assert r.combined ** 2 == pytest.approx(1.0 + 5 / 3)


def test_evaluation_reproduces_linears(strip16):
    u = FeFunction.interpolate(strip16, lambda x, y: 3 * x + 2 * y - 1)
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.random(200), -rng.random(200)])
    np.testing.assert_allclose(u(pts), 3 * pts[:, 0] + 2 * pts[:, 1] - 1, atol=1e-13)
    c = FeFunction.interpolate(strip16, lambda x, y: 7.25 + 0 * x)
    assert np.all(c(pts) == 7.25)


def test_interpolate_onto_errors(strip16, wavy_strip):
    u = FeFunction.interpolate(strip16, lambda x, y: x)
    with pytest.raises(PointNotFoundError, match="vertex"):
        interpolate_onto(strip16, u, wavy_strip)
    with pytest.raises(ValueError):
        interpolate_onto(wavy_strip, u, strip16)


def test_fefunction_shape_check(strip16):
    with pytest.raises(ValueError):
        FeFunction(strip16, np.zeros(3))
