"""Piecewise-linear finite elements for ``-Delta_Gamma u = f`` on a surface mesh.

Closed surfaces carry a mean-zero constraint imposed inside the conjugate
gradient iteration; surfaces with boundary get homogeneous (or prescribed)
Dirichlet values on boundary vertices, eliminated before the solve.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.sparse as sp

from . import kernels
from .errors import MaxIterExceeded
from .lift import global_indicators, hat_gradients
from .quadrature import BARY, WEIGHTS

MEAN_ZERO = "mean_zero"
DIRICHLET = "dirichlet"
_CHUNK = 20_000


@dataclass
class SparseSystem:
    """Symmetric CSR matrix, right-hand side and constraint.

    ``fixed`` flags Dirichlet dofs and ``values`` their prescribed values;
    ``mass`` holds lumped-mass weights used to normalise mean-zero solutions.
    """

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    rhs: np.ndarray
    constraint: str = MEAN_ZERO
    fixed: np.ndarray | None = None
    values: np.ndarray | None = None
    mass: np.ndarray | None = None

    @property
    def n(self):
        return self.indptr.size - 1

    def matrix(self):
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.n))


@dataclass
class SolveReport:
    coefficients: np.ndarray
    cg_iterations: int
    residual: float
    converged: bool
    h: float = float("nan")
    dof_count: int = 0
    Psi_h: float = float("nan")
    Lambda_h: float = float("nan")
    errors: tuple | None = None
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)


def element_matrices(mesh):
    """``area_T * B B^T`` per triangle, shape ``(nt, 3, 3)``."""
    B = hat_gradients(mesh.edge_matrices())
    return mesh.areas()[:, None, None] * np.einsum("nid,njd->nij", B, B)


def assemble_stiffness(mesh):
    """Stiffness matrix as CSR arrays ``(indptr, indices, data)``."""
    return kernels.assemble_csr(mesh.triangles, element_matrices(mesh), mesh.n_vertices)


def pullback_values(mesh, f):
    """``f(a(x))`` at the quadrature nodes, shape ``(nt, 6)``."""
    out = np.empty((mesh.n_triangles, BARY.shape[0]))
    for s in range(0, mesh.n_triangles, _CHUNK):
        idx = np.arange(s, min(s + _CHUNK, mesh.n_triangles))
        out[idx] = np.asarray(f(mesh.lift(BARY, idx).point), dtype=float).reshape(idx.size, -1)
    return out


def pullback_mean(mesh, f, values=None):
    """``(1/|Gamma_h|) int_{Gamma_h} f(a(x)) dA_h``."""
    vals = pullback_values(mesh, f) if values is None else values
    area = mesh.areas()
    return float(np.sum(area * (vals @ WEIGHTS)) / area.sum())


def assemble_load(mesh, f, mean_correct=None):
    """Load vector ``rhs_i = int_{Gamma_h} f_h phi_i dA_h``.

    ``f_h`` is the pullback ``f o a``; on closed surfaces (or when
    ``mean_correct`` is true) its mean over ``Gamma_h`` is subtracted first.
    """
    if mean_correct is None:
        mean_correct = mesh.surface.closed
    vals = pullback_values(mesh, f)
    if mean_correct:
        vals = vals - pullback_mean(mesh, f, vals)
    area = mesh.areas()
    local = area[:, None] * ((vals * WEIGHTS) @ BARY)
    rhs = np.bincount(mesh.triangles.ravel(), weights=local.ravel(), minlength=mesh.n_vertices)
    if mean_correct:
        rhs -= rhs.mean()
    return rhs


def build_system(mesh, f, dirichlet_values=None):
    """Stiffness matrix, load and constraint for ``mesh``.

    Closed surfaces get the mean-zero constraint; otherwise boundary vertices
    are fixed to ``dirichlet_values`` (a callable of points, or zero).
    """
    indptr, indices, data = assemble_stiffness(mesh)
    if mesh.surface.closed:
        return SparseSystem(indptr, indices, data, assemble_load(mesh, f), MEAN_ZERO, mass=mesh.lumped_mass())
    fixed = mesh.boundary.copy()
    values = np.zeros(mesh.n_vertices)
    if dirichlet_values is not None:
        values[fixed] = np.asarray(dirichlet_values(mesh.vertices[fixed]), dtype=float)
    rhs = assemble_load(mesh, f, mean_correct=False)
    return SparseSystem(indptr, indices, data, rhs, DIRICHLET, fixed, values, mesh.lumped_mass())


def solve(system, tol=1e-10, max_iter=None, mesh=None):
    """Solve with Jacobi-preconditioned CG.

    Raises :class:`MaxIterExceeded` if the relative residual does not reach
    ``tol`` within ``max_iter`` iterations (default ``10 * dofs``); the
    report of the last iterate is attached to the exception.
    """
    t0 = time.perf_counter()
    n = system.n
    if system.constraint == MEAN_ZERO:
        maxit = 10 * n if max_iter is None else max_iter
        x, it, res, ok = kernels.pcg_jacobi(system.indptr, system.indices, system.data, system.rhs, tol, maxit, True)
        m = np.ones(n) if system.mass is None else system.mass
        x = x - (x @ m) / m.sum()
        dofs = n
    else:
        free = ~system.fixed
        A = system.matrix()
        Aff = A[free][:, free].tocsr()
        Aff.sort_indices()
        b = system.rhs[free] - A[free][:, system.fixed] @ system.values[system.fixed]
        dofs = int(free.sum())
        maxit = 10 * dofs if max_iter is None else max_iter
        x = system.values.copy()
        it, res, ok = 0, 0.0, True
        if dofs:
            xf, it, res, ok = kernels.pcg_jacobi(
                Aff.indptr.astype(np.int64), Aff.indices.astype(np.int64), Aff.data, b, tol, maxit, False
            )
            x[free] = xf
    report = SolveReport(x, int(it), float(res), bool(ok), dof_count=dofs)
    if mesh is not None:
        report.h = mesh.h
        report.Psi_h, report.Lambda_h = global_indicators(mesh)
    report.wall_time = time.perf_counter() - t0
    if not ok:
        raise MaxIterExceeded(f"CG stopped after {it} iterations at relative residual {res:.3g}", report)
    return report


def galerkin_residual(system, coeffs):
    """Max-norm of ``A c - rhs`` over the free dofs, with the constraint applied."""
    r = system.matrix() @ coeffs - system.rhs
    if system.constraint == MEAN_ZERO:
        r -= r.mean()
    else:
        r = r[~system.fixed]
    return float(np.abs(r).max()) if r.size else 0.0


def eigenfunction_benchmark():
    """``u = xyz`` on the unit sphere with ``f = 12 xyz`` and its tangential gradient.

    Returns ``(u, f, grad_u)``; each accepts points of shape ``(n, 3)`` on the
    sphere.
    """

    def u(p):
        p = np.asarray(p)
        return p[..., 0] * p[..., 1] * p[..., 2]

    def f(p):
        return 12.0 * u(p)

    def grad_u(p):
        p = np.asarray(p)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        g = np.stack([y * z, x * z, x * y], axis=-1)
        nu = p / np.linalg.norm(p, axis=-1, keepdims=True)
        return g - np.sum(g * nu, axis=-1, keepdims=True) * nu

    return u, f, grad_u


def export_matrix_market(system, path, comment=""):
    """Write the system matrix in MatrixMarket coordinate format."""
    scipy.io.mmwrite(str(path), system.matrix().tocoo(), comment=comment, symmetry="symmetric")
