"""Conforming P1 triangulations with tagged boundary edges."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import kernels
from .geometry import DomainSpec, g_eps

GAMMA = "Gamma"
SIGMA = "Sigma"
TAGS = (GAMMA, SIGMA)


class MeshError(ValueError):
    pass


class PointNotFoundError(LookupError):
    pass


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Vertices, counter-clockwise triangles, and a closed loop of tagged boundary edges."""

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_tags: np.ndarray
    domain: Optional[DomainSpec] = None
    shape: Optional[tuple] = None  # (nx, ny) for structured strip meshes

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(self.vertices, np.float64))
        object.__setattr__(self, "triangles", _frozen(self.triangles, np.int64))
        object.__setattr__(self, "boundary_edges", _frozen(self.boundary_edges, np.int64))
        object.__setattr__(self, "edge_tags", _frozen(self.edge_tags, "<U5"))
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MeshError("vertices must have shape (n, 2)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must have shape (m, 3)")
        if len(self.edge_tags) != len(self.boundary_edges):
            raise MeshError("one tag per boundary edge required")
        bad = set(np.unique(self.edge_tags)) - set(TAGS)
        if bad:
            raise MeshError(f"unknown edge tags {sorted(bad)}")

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @cached_property
    def signed_areas(self) -> np.ndarray:
        v, t = self.vertices, self.triangles
        d1 = v[t[:, 1]] - v[t[:, 0]]
        d2 = v[t[:, 2]] - v[t[:, 0]]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d2[:, 0] * d1[:, 1])

    @cached_property
    def h(self) -> float:
        """Longest edge."""
        v, t = self.vertices, self.triangles
        lengths = [np.hypot(*(v[t[:, (i + 1) % 3]] - v[t[:, i]]).T) for i in range(3)]
        return float(max(np.max(l) for l in lengths))

    @cached_property
    def max_aspect_ratio(self) -> float:
        """max over triangles of sqrt(3) L^2 / (4 A); 1 for an equilateral triangle."""
        v, t = self.vertices, self.triangles
        longest = np.max(
            np.stack([np.sum((v[t[:, (i + 1) % 3]] - v[t[:, i]]) ** 2, axis=1) for i in range(3)]), axis=0
        )
        return float(np.max(math.sqrt(3.0) * longest / (4.0 * np.abs(self.signed_areas))))

    def edge_lengths(self) -> np.ndarray:
        e = self.boundary_edges
        d = self.vertices[e[:, 1]] - self.vertices[e[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def boundary_vertices(self, tags=TAGS) -> np.ndarray:
        sel = np.isin(self.edge_tags, list(_as_tags(tags)))
        return np.unique(self.boundary_edges[sel])

    def validate(self) -> None:
        bad = np.nonzero(self.signed_areas <= 0)[0]
        if bad.size:
            raise MeshError(f"degenerate or inverted triangle {int(bad[0])} (signed area {self.signed_areas[bad[0]]:.3e})")

    @cached_property
    def locator(self) -> "BucketLocator":
        return BucketLocator(self)

    def locate(self, points, backend=None):
        """Locate points; see :func:`locate_point`."""
        return self.locator.locate(points, backend=backend)


def _as_tags(tags):
    if isinstance(tags, str):
        return (tags,)
    return tuple(tags)


@dataclass(frozen=True)
class MeshResolution:
    """Structured grid size: ``nx`` columns, ``ny`` rows."""

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise MeshError("nx and ny must be positive")

    @classmethod
    def per_period(cls, domain: DomainSpec, subdivisions: int, rows: int) -> "MeshResolution":
        return cls(round(subdivisions * domain.width / domain.eps), rows)

    def h(self, domain: DomainSpec) -> float:
        return math.hypot(domain.width / self.nx, domain.depth / self.ny)


def required_nx(domain: DomainSpec, nx: int) -> int:
    """Smallest admissible column count >= nx: a multiple of 2 w/eps with >= 8 per period."""
    if domain.eps == 0:
        return nx
    periods = round(domain.width / domain.eps)
    step = 2 * periods
    need = max(nx, 8 * periods)
    return step * math.ceil(need / step)


def build_strip_mesh(domain: DomainSpec, res: MeshResolution) -> Mesh:
    """Structured mesh of ``Omega_eps`` obtained by shearing a grid of the reference strip.

    Cells are split along the lower-left to upper-right diagonal; the map
    ``x2 -> x2 + (1 + x2/d) g_eps(x1)`` fixes the bottom and lays the top
    row exactly on the graph of ``g_eps``.
    """
    nx, ny = res.nx, res.ny
    w, d = domain.width, domain.depth
    if domain.eps > 0:
        if not domain.whole_periods:
            raise MeshError(f"w/eps = {domain.periods:.6g} must be an integer for a kink-resolving mesh")
        periods = round(w / domain.eps)
        if nx % (2 * periods) != 0 or nx < 8 * periods:
            raise MeshError(
                f"nx={nx} violates the oscillation-resolution rule; use nx={required_nx(domain, nx)} "
                f"(a multiple of {2 * periods} with at least 8 subdivisions per period)"
            )
    x1 = w * np.arange(nx + 1) / nx
    y_ref = -d + d * np.arange(ny + 1) / ny
    y_ref[-1] = 0.0
    g, _ = g_eps(domain, x1)
    X = np.broadcast_to(x1[None, :], (ny + 1, nx + 1))
    Y = y_ref[:, None] + (1.0 + y_ref[:, None] / d) * np.asarray(g)[None, :]
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    idx = np.arange((ny + 1) * (nx + 1)).reshape(ny + 1, nx + 1)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, 1:].ravel()
    dd = idx[1:, :-1].ravel()
    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([a, b, c])
    triangles[1::2] = np.column_stack([a, c, dd])

    bottom = np.column_stack([idx[0, :-1], idx[0, 1:]])
    right = np.column_stack([idx[:-1, -1], idx[1:, -1]])
    top = np.column_stack([idx[-1, 1:], idx[-1, :-1]])[::-1]
    left = np.column_stack([idx[1:, 0], idx[:-1, 0]])[::-1]
    edges = np.vstack([bottom, right, top, left])
    tags = np.array([SIGMA] * nx + [SIGMA] * ny + [GAMMA] * nx + [SIGMA] * ny)
    mesh = Mesh(vertices, triangles, edges, tags, domain=domain, shape=(nx, ny))
    mesh.validate()
    return mesh


def build_disk_mesh(n_rings: int, n_sectors: int) -> Mesh:
    """Unit-disk polygon: a centre fan plus ``n_rings - 1`` quadrilateral bands, each split in two."""
    if n_rings < 2:
        raise MeshError("n_rings must be >= 2")
    if n_sectors < 8:
        raise MeshError("n_sectors must be >= 8")
    theta = 2.0 * math.pi * np.arange(n_sectors) / n_sectors
    pts = [np.zeros((1, 2))]
    for r in range(1, n_rings + 1):
        rad = r / n_rings
        pts.append(np.column_stack([rad * np.cos(theta), rad * np.sin(theta)]))
    vertices = np.vstack(pts)

    def ring(r):
        return 1 + (r - 1) * n_sectors + np.arange(n_sectors)

    k = np.arange(n_sectors)
    kn = (k + 1) % n_sectors
    tris = [np.column_stack([np.zeros(n_sectors, dtype=np.int64), ring(1)[k], ring(1)[kn]])]
    for r in range(1, n_rings):
        inner, outer = ring(r), ring(r + 1)
        tris.append(np.column_stack([inner[k], outer[k], outer[kn]]))
        tris.append(np.column_stack([inner[k], outer[kn], inner[kn]]))
    triangles = np.vstack(tris)
    outer = ring(n_rings)
    edges = np.column_stack([outer[k], outer[kn]])
    mesh = Mesh(vertices, triangles, edges, np.full(n_sectors, GAMMA))
    mesh.validate()
    return mesh


class BucketLocator:
    """Uniform background grid; each bucket lists the triangles whose bounding box meets it."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        v, t = mesh.vertices, mesh.triangles
        self.tol = 1e-12 * mesh.h
        lo = v.min(axis=0)
        hi = v.max(axis=0)
        span = np.maximum(hi - lo, 1e-300)
        m = max(mesh.n_triangles, 1)
        # roughly one triangle per bucket
        aspect = span[0] / span[1]
        nx = max(1, int(math.sqrt(m * aspect)))
        ny = max(1, int(math.ceil(m / nx)))
        self.shape = (nx, ny)
        self.origin = lo
        self.inv_size = np.array([nx / span[0], ny / span[1]])

        tx = v[t, 0]
        ty = v[t, 1]
        pad = self.tol
        ix0 = np.clip(np.floor((tx.min(axis=1) - pad - lo[0]) * self.inv_size[0]).astype(np.int64), 0, nx - 1)
        ix1 = np.clip(np.floor((tx.max(axis=1) + pad - lo[0]) * self.inv_size[0]).astype(np.int64), 0, nx - 1)
        iy0 = np.clip(np.floor((ty.min(axis=1) - pad - lo[1]) * self.inv_size[1]).astype(np.int64), 0, ny - 1)
        iy1 = np.clip(np.floor((ty.max(axis=1) + pad - lo[1]) * self.inv_size[1]).astype(np.int64), 0, ny - 1)
        wx = ix1 - ix0 + 1
        wy = iy1 - iy0 + 1
        counts = wx * wy
        owner = np.repeat(np.arange(m, dtype=np.int64), counts)
        offset = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        cx = ix0[owner] + offset % wx[owner]
        cy = iy0[owner] + offset // wx[owner]
        cell = cy * nx + cx
        order = np.argsort(cell, kind="stable")
        self.cell_tris = np.ascontiguousarray(owner[order])
        self.cell_ptr = np.zeros(nx * ny + 1, dtype=np.int64)
        np.cumsum(np.bincount(cell, minlength=nx * ny), out=self.cell_ptr[1:])

    def locate(self, points, backend=None):
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
        k = kernels.get_backend(backend)
        return k.locate(
            self.mesh.vertices, self.mesh.triangles, self.cell_ptr, self.cell_tris,
            self.origin, self.inv_size, self.shape, pts, self.tol,
        )


def locate_point(mesh: Mesh, p, backend=None):
    """Return ``(triangle index, barycentric coordinates)`` of the triangle containing ``p``.

    A point counts as inside when its signed distance to every edge is at
    least ``-1e-12 h``. Raises :class:`PointNotFoundError` otherwise.
    """
    tri, bary = mesh.locate(np.asarray(p, dtype=float).reshape(1, 2), backend=backend)
    if tri[0] < 0:
        raise PointNotFoundError(f"point {tuple(np.ravel(p))} lies outside the mesh")
    return int(tri[0]), bary[0]


def boundary_loops(mesh: Mesh) -> list[list[int]]:
    """Chain the boundary edges into closed vertex loops."""
    nxt = {}
    for a, b in mesh.boundary_edges:
        if a in nxt:
            raise MeshError(f"vertex {a} starts two boundary edges")
        nxt[int(a)] = int(b)
    loops, seen = [], set()
    for start in nxt:
        if start in seen:
            continue
        loop, cur = [], start
        while cur not in seen:
            seen.add(cur)
            loop.append(cur)
            if cur not in nxt:
                raise MeshError(f"boundary chain is open at vertex {cur}")
            cur = nxt[cur]
        if cur != start:
            raise MeshError("boundary edges do not form simple loops")
        loops.append(loop)
    return loops


def edge_incidence(mesh: Mesh) -> dict:
    """Map each undirected edge to the list of (triangle, oriented edge) using it."""
    inc: dict = {}
    for ti, (a, b, c) in enumerate(mesh.triangles.tolist()):
        for p, q in ((a, b), (b, c), (c, a)):
            inc.setdefault((min(p, q), max(p, q)), []).append((ti, (p, q)))
    return inc


def write_vtk(mesh: Mesh, path) -> None:
    """Legacy ASCII VTK polydata: boundary edges as LINES, triangles as POLYGONS.

    Cell data ``tag``: 1 = Gamma edge, 2 = Sigma edge, 0 = triangle.
    """
    v, t, e = mesh.vertices, mesh.triangles, mesh.boundary_edges
    lines = ["# vtk DataFile Version 3.0", "steklov_fem mesh", "ASCII", "DATASET POLYDATA"]
    lines.append(f"POINTS {len(v)} double")
    lines.extend(f"{x:.17g} {y:.17g} 0" for x, y in v)
    lines.append(f"LINES {len(e)} {3 * len(e)}")
    lines.extend(f"2 {a} {b}" for a, b in e)
    lines.append(f"POLYGONS {len(t)} {4 * len(t)}")
    lines.extend(f"3 {a} {b} {c}" for a, b, c in t)
    lines.append(f"CELL_DATA {len(e) + len(t)}")
    lines.append("SCALARS tag int 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend("1" if tag == GAMMA else "2" for tag in mesh.edge_tags)
    lines.extend("0" for _ in range(len(t)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
