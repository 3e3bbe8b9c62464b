"""Time the compiled and numpy kernel backends on a sheared strip mesh.

Usage: python benchmarks/bench_kernels.py [--nx 1024] [--ny 256] [--repeat 3]
"""

import argparse
import time

import numpy as np

from steklov_fem import kernels
from steklov_fem.geometry import DomainSpec, ProfileSpec
from steklov_fem.mesh import MeshResolution, build_strip_mesh


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nx", type=int, default=1024)
    p.add_argument("--ny", type=int, default=256)
    p.add_argument("--points", type=int, default=200_000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    dom = DomainSpec(1.0, 1 / 32, ProfileSpec("triangle-wave"))
    mesh = build_strip_mesh(dom, MeshResolution(args.nx, args.ny))
    loc = mesh.locator
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.random(args.points), -rng.random(args.points)])
    values = np.sin(3 * mesh.vertices[:, 0]) * mesh.vertices[:, 1]
    print(f"mesh: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles; {args.points} query points")

    results = {}
    for name in kernels.available_backends():
        k = kernels.get_backend(name)
        tri, bary = k.locate(mesh.vertices, mesh.triangles, loc.cell_ptr, loc.cell_tris,
                             loc.origin, loc.inv_size, loc.shape, pts, loc.tol)
        ok = np.asarray(tri) >= 0
        results[name] = {
            "element_matrices": best_of(lambda: k.element_matrices(mesh.vertices, mesh.triangles), args.repeat),
            "locate": best_of(lambda: k.locate(mesh.vertices, mesh.triangles, loc.cell_ptr, loc.cell_tris,
                                               loc.origin, loc.inv_size, loc.shape, pts, loc.tol), args.repeat),
            "evaluate": best_of(lambda: k.evaluate(values, mesh.triangles, np.asarray(tri)[ok], np.asarray(bary)[ok]),
                                args.repeat),
        }

    names = list(results)
    print(f"{'kernel':<18}" + "".join(f"{n + ' [s]':>14}" for n in names) + ("   speedup" if len(names) == 2 else ""))
    for kernel in results[names[0]]:
        row = f"{kernel:<18}" + "".join(f"{results[n][kernel]:>14.4f}" for n in names)
        if len(names) == 2:
            row += f"{results['python'][kernel] / results['cython'][kernel]:>10.1f}x"
        print(row)


if __name__ == "__main__":
    main()
