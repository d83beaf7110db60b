"""Compare the compiled and pure-NumPy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--h 0.05] [--repeat 3]

Times CSR assembly, matrix-vector products, Jacobi-PCG and the bisection
closure on a sphere mesh, and checks that both backends agree.
"""

import argparse
import time

import numpy as np

from surfem import kernels
from surfem.fem import build_system, eigenfunction_benchmark, element_matrices
from surfem.geometry import Sphere
from surfem.mesh import build_initial_mesh


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--h", type=float, default=0.05, help="sphere mesh size")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    mesh = build_initial_mesh(Sphere(), args.h)
    K = element_matrices(mesh)
    system = build_system(mesh, eigenfunction_benchmark()[1])
    x = np.random.default_rng(0).normal(size=system.n)
    ev, tri_edges, _ = mesh.edges
    lloc = mesh.longest_edge_local()
    seed = np.zeros(ev.shape[0], dtype=bool)
    seed[:: max(1, ev.shape[0] // 50)] = True

    cases = {
        "assemble_csr": lambda b: b.assemble_csr(mesh.triangles, K, mesh.n_vertices),
        "csr_matvec x100": lambda b: [b.csr_matvec(system.indptr, system.indices, system.data, x) for _ in range(100)],
        "pcg_jacobi": lambda b: b.pcg_jacobi(system.indptr, system.indices, system.data, system.rhs, 1e-10,
                                             10 * system.n, True),
        "mark_closure": lambda b: b.mark_closure(tri_edges, lloc, seed.copy(), 100),
    }
    backends = kernels.backends()
    print(f"sphere mesh: {mesh.n_triangles} triangles, {mesh.n_vertices} vertices; selected backend: {kernels.BACKEND}")
    print(f"{'kernel':<18s}" + "".join(f"{name:>12s}" for name in backends) + "     speedup")
    for label, fn in cases.items():
        row, outs = [], []
        for b in backends.values():
            t, out = best_of(lambda: fn(b), args.repeat)
            row.append(t)
            outs.append(out)
        speed = f"{row[0] / row[1]:10.1f}x" if len(row) == 2 else ""
        print(f"{label:<18s}" + "".join(f"{t:12.4f}" for t in row) + speed)
        if label == "pcg_jacobi" and len(outs) == 2:
            diff = np.abs(outs[0][0] - outs[1][0]).max()
            print(f"{'':<18s}max solution difference {diff:.2e}, iterations {outs[0][1]} / {outs[1][1]}")


if __name__ == "__main__":
    main()
