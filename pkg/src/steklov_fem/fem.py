"""P1 assembly of the stiffness, boundary-mass and volume-mass forms, norms, interpolation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np
import scipy.sparse as sp

from . import kernels
from .mesh import TAGS, Mesh, MeshError, PointNotFoundError, _as_tags

Weight = Union[None, float, Mapping[str, float], Callable[[np.ndarray], float]]


@dataclass(frozen=True, eq=False)
class FeFunction:
    """Nodal coefficients of a continuous piecewise-linear function on ``mesh``."""

    mesh: Mesh
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.shape != (self.mesh.n_vertices,):
            raise ValueError(f"expected {self.mesh.n_vertices} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def interpolate(cls, mesh: Mesh, f: Callable) -> "FeFunction":
        """Nodal interpolant of ``f(x1, x2)``."""
        v = mesh.vertices
        vals = np.broadcast_to(np.asarray(f(v[:, 0], v[:, 1]), dtype=float), (mesh.n_vertices,))
        return cls(mesh, np.array(vals))

    def __call__(self, points) -> np.ndarray:
        tri, bary = self.mesh.locate(points)
        if np.any(tri < 0):
            raise PointNotFoundError(f"point {int(np.argmax(tri < 0))} is outside the mesh")
        return kernels.evaluate(self.coeffs, self.mesh.triangles, tri, bary)


@dataclass(frozen=True)
class NormReport:
    h1_semi: float
    l2: float
    boundary_l2: float
    combined: float


def _element_data(mesh: Mesh, backend=None):
    area, stiff, mass = kernels.get_backend(backend).element_matrices(mesh.vertices, mesh.triangles)
    bad = np.nonzero(area <= 0)[0]
    if bad.size:
        raise MeshError(f"degenerate triangle {int(bad[0])} (signed area {area[bad[0]]:.3e})")
    return area, stiff, mass


def _assemble(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    # coo -> csr sums duplicates in input order, which is fixed by the triangle order
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_stiffness(mesh: Mesh, backend=None) -> sp.csr_matrix:
    """Global ``int grad u . grad v`` with exact element integrals ``|T| G^T G``."""
    _, stiff, _ = _element_data(mesh, backend)
    return _assemble(mesh, stiff)


def assemble_volume_mass(mesh: Mesh, backend=None) -> sp.csr_matrix:
    """Global ``int u v`` with local matrices ``|T|/12 [[2,1,1],[1,2,1],[1,1,2]]``."""
    _, _, mass = _element_data(mesh, backend)
    return _assemble(mesh, mass)


def edge_weights(mesh: Mesh, weight: Weight, edges: np.ndarray) -> np.ndarray:
    """Constant weight per selected boundary edge.

    ``weight`` may be None (1), a number, a ``{tag: value}`` mapping, or a
    callable sampled at edge midpoints.
    """
    if weight is None:
        return np.ones(edges.size)
    if isinstance(weight, Mapping):
        tags = mesh.edge_tags[edges]
        return np.array([float(weight.get(tag, 1.0)) for tag in tags])
    if callable(weight):
        e = mesh.boundary_edges[edges]
        mid = 0.5 * (mesh.vertices[e[:, 0]] + mesh.vertices[e[:, 1]])
        return np.array([float(weight(p)) for p in mid])
    return np.full(edges.size, float(weight))


def assemble_boundary_mass(mesh: Mesh, tags=TAGS, weight: Weight = None) -> sp.csr_matrix:
    """Global ``int_{tagged boundary} weight u v dS``.

    Each edge of length ``l`` and weight ``c`` contributes ``c l / 6 [[2, 1], [1, 2]]``.
    Weights must be >= 1.
    """
    tags = _as_tags(tags)
    edges = np.nonzero(np.isin(mesh.edge_tags, list(tags)))[0]
    if edges.size == 0:
        raise MeshError(f"no boundary edges carry tags {tags}")
    c = edge_weights(mesh, weight, edges)
    if np.any(~np.isfinite(c)) or np.any(c < 1.0):
        raise ValueError("boundary weight must be finite and >= 1")
    e = mesh.boundary_edges[edges]
    lengths = mesh.edge_lengths()[edges]
    s = c * lengths / 6.0
    local = np.stack([2.0 * s, s, s, 2.0 * s], axis=1)
    rows = np.column_stack([e[:, 0], e[:, 0], e[:, 1], e[:, 1]]).ravel()
    cols = np.column_stack([e[:, 0], e[:, 1], e[:, 0], e[:, 1]]).ravel()
    n = mesh.n_vertices
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _quad(A, u, v=None) -> float:
    v = u if v is None else v
    return float(u @ (A @ v))


def fe_norms(mesh: Mesh, u: FeFunction, tags=TAGS, weight: Weight = None) -> NormReport:
    """Seminorm, L2 norm, weighted boundary norm and the combined norm sqrt(|u|_1^2 + |u|_dOmega^2)."""
    c = u.coeffs
    semi2 = _quad(assemble_stiffness(mesh), c)
    l2 = _quad(assemble_volume_mass(mesh), c)
    bnd2 = _quad(assemble_boundary_mass(mesh, tags, weight), c)
    semi2, l2, bnd2 = max(semi2, 0.0), max(l2, 0.0), max(bnd2, 0.0)
    return NormReport(math.sqrt(semi2), math.sqrt(l2), math.sqrt(bnd2), math.sqrt(semi2 + bnd2))


def interpolate_onto(src_mesh: Mesh, u: FeFunction, dst_mesh: Mesh) -> FeFunction:
    """Evaluate ``u`` (living on ``src_mesh``) at every vertex of ``dst_mesh``."""
    if u.mesh is not src_mesh:
        raise ValueError("u must live on src_mesh")
    tri, bary = src_mesh.locate(dst_mesh.vertices)
    missing = np.nonzero(tri < 0)[0]
    if missing.size:
        k = int(missing[0])
        raise PointNotFoundError(
            f"destination vertex {k} at {tuple(dst_mesh.vertices[k])} is outside the source mesh"
            f" ({missing.size} vertices not located)"
        )
    return FeFunction(dst_mesh, kernels.evaluate(u.coeffs, src_mesh.triangles, tri, bary))
