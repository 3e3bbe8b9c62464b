"""Pure numpy implementations of the hot kernels.

Same signatures and arithmetic order as the compiled ``_core`` module, so
the two backends agree to rounding.
"""

import numpy as np


def element_matrices(vertices, triangles):
    """P1 element data for every triangle.

    Returns ``(signed_area, stiffness, mass)`` with shapes ``(m,)``,
    ``(m, 3, 3)`` and ``(m, 3, 3)``.
    """
    v = np.asarray(vertices, dtype=np.float64)
    t = np.asarray(triangles, dtype=np.int64)
    x0, y0 = v[t[:, 0], 0], v[t[:, 0], 1]
    x1, y1 = v[t[:, 1], 0], v[t[:, 1], 1]
    x2, y2 = v[t[:, 2], 0], v[t[:, 2], 1]
    twice = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    area = 0.5 * twice
    # gradient numerators: grad phi_a = (b_a, c_a) / (2A)
    b = np.stack([y1 - y2, y2 - y0, y0 - y1], axis=1)
    c = np.stack([x2 - x1, x0 - x2, x1 - x0], axis=1)
    denom = 2.0 * twice
    stiff = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / denom[:, None, None]
    mass = (area / 12.0)[:, None, None] * (np.ones((3, 3)) + np.eye(3))[None, :, :]
    return area, stiff, mass


def locate(vertices, triangles, cell_ptr, cell_tris, origin, inv_size, shape, points, tol):
    """Bucket-grid point location.

    For each point, scans the triangles registered in its bucket and keeps
    the first one with the largest minimum signed edge distance, provided
    that distance is ``>= -tol``. Returns ``(tri, bary)``; ``tri = -1``
    marks points that were not found. Barycentric coordinates whose edge
    distance is within ``tol`` of zero are snapped to 0.
    """
    v = np.asarray(vertices, dtype=np.float64)
    t = np.asarray(triangles, dtype=np.int64)
    p = np.asarray(points, dtype=np.float64)
    npts = p.shape[0]
    nx, ny = int(shape[0]), int(shape[1])
    ix = np.floor((p[:, 0] - origin[0]) * inv_size[0]).astype(np.int64)
    iy = np.floor((p[:, 1] - origin[1]) * inv_size[1]).astype(np.int64)
    inside = (ix >= -1) & (ix <= nx) & (iy >= -1) & (iy <= ny)
    ix = np.clip(ix, 0, nx - 1)
    iy = np.clip(iy, 0, ny - 1)
    cell = iy * nx + ix
    start = np.where(inside, cell_ptr[cell], 0)
    count = np.where(inside, cell_ptr[cell + 1] - cell_ptr[cell], 0)

    best_tri = np.full(npts, -1, dtype=np.int64)
    best_d = np.full(npts, -np.inf)
    best_cross = np.zeros((npts, 3))
    best_edge = np.ones((npts, 3))
    best_twice = np.ones(npts)
    px, py = p[:, 0], p[:, 1]
    for s in range(int(count.max()) if npts else 0):
        idx = np.nonzero(count > s)[0]
        tri = cell_tris[start[idx] + s]
        xs = v[t[tri], 0]
        ys = v[t[tri], 1]
        qx, qy = px[idx], py[idx]
        cross = np.empty((idx.size, 3))
        edge = np.empty((idx.size, 3))
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            ex = xs[:, k] - xs[:, j]
            ey = ys[:, k] - ys[:, j]
            cross[:, i] = ex * (qy - ys[:, j]) - ey * (qx - xs[:, j])
            edge[:, i] = np.sqrt(ex * ex + ey * ey)
        dmin = np.min(cross / edge, axis=1)
        take = (dmin >= -tol) & (dmin > best_d[idx])
        sel = idx[take]
        best_tri[sel] = tri[take]
        best_d[sel] = dmin[take]
        best_cross[sel] = cross[take]
        best_edge[sel] = edge[take]
        best_twice[sel] = ((xs[:, 1] - xs[:, 0]) * (ys[:, 2] - ys[:, 0]) - (xs[:, 2] - xs[:, 0]) * (ys[:, 1] - ys[:, 0]))[take]

    bary = best_cross / best_twice[:, None]
    snap = np.abs(best_cross / best_edge) <= tol
    bary[snap] = 0.0
    base = np.argmax(bary, axis=1)
    rows = np.arange(npts)
    others = bary.copy()
    others[rows, base] = 0.0
    bary[rows, base] = 1.0 - (others[:, 0] + others[:, 1] + others[:, 2])
    bary[best_tri < 0] = np.nan
    return best_tri, bary


def evaluate(values, triangles, tri, bary):
    """Evaluate P1 coefficients at located points.

    ``u[base] + sum_k bary_k (u[k] - u[base])`` with ``base`` the vertex of
    largest weight, so constants and functions constant along the located
    edge are reproduced exactly.
    """
    u = np.asarray(values, dtype=np.float64)
    t = np.asarray(triangles, dtype=np.int64)[tri]
    uu = u[t]
    base = np.argmax(bary, axis=1)
    rows = np.arange(tri.shape[0])
    ub = uu[rows, base]
    out = ub.copy()
    for k in range(3):
        contrib = bary[:, k] * (uu[:, k] - ub)
        out = out + np.where(base == k, 0.0, contrib)
    return out
