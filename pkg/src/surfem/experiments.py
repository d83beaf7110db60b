"""Convergence studies and the ridge experiment.

The ridge experiment compares a curvature-graded mesh with a quasi-uniform
mesh of about the same number of unknowns.  Both are measured against a
reference solution on a much finer mesh.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import __version__
from .fem import build_system, eigenfunction_benchmark, pullback_values, solve
from .geometry import RidgeSurface, Sphere, curvature_kappa, region_samples, rhs_bump
from .grading import GradingConfig, grade, transition_width, vertex_distances, region1_vertices
from .io import write_csv, write_vtk
from .lift import _node_quantities, global_indicators, hat_gradients, iter_lifted, lifted_errors
from .mesh import build_initial_mesh, refine_uniform

TABLE_HEADER = (
    "level",
    "dof",
    "h",
    "Psi_h",
    "Lambda_h",
    "L2_error",
    "H1_error",
    "EOC_L2",
    "EOC_H1",
    "cg_iters",
)


def eoc(e_prev, e, h_prev, h):
    if not (e_prev > 0 and e > 0 and h_prev != h):
        return float("nan")
    return float(np.log(e_prev / e) / np.log(h_prev / h))


def fit_exponent(h, e):
    """Least-squares slope of ``log e`` against ``log h``."""
    return float(np.polyfit(np.log(np.asarray(h, float)), np.log(np.asarray(e, float)), 1)[0])


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)
    wall_times: list = field(default_factory=list)

    def add(self, dof, h, psi, lam, l2, h1, iters, wall):
        if self.rows:
            p = self.rows[-1]
            e2, e1 = eoc(p["L2_error"], l2, p["h"], h), eoc(p["H1_error"], h1, p["h"], h)
        else:
            e2 = e1 = float("nan")
        self.rows.append(
            dict(level=len(self.rows), dof=int(dof), h=h, Psi_h=psi, Lambda_h=lam, L2_error=l2, H1_error=h1,
                 EOC_L2=e2, EOC_H1=e1, cg_iters=int(iters))
        )
        self.wall_times.append(wall)

    def column(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)

    def write(self, path, timings_path=None):
        """CSV in ``TABLE_HEADER`` order; wall times go to a separate file."""
        write_csv(path, TABLE_HEADER, [[r[k] for k in TABLE_HEADER] for r in self.rows])
        if timings_path is not None:
            write_csv(timings_path, ("level", "wall_time"), list(enumerate(self.wall_times)))

    def format(self):
        lines = ["  ".join(f"{k:>10s}" for k in TABLE_HEADER)]
        for r in self.rows:
            lines.append("  ".join(f"{r[k]:>10d}" if isinstance(r[k], int) else f"{r[k]:>10.4g}" for k in TABLE_HEADER))
        return "\n".join(lines)


# -- sphere -------------------------------------------------------------------------


def sphere_meshes(initial_h=0.5, levels=5, radius=1.0):
    """Uniform bisection ladder on the sphere, coarsest first."""
    mesh = build_initial_mesh(Sphere(radius), initial_h)
    out = [mesh]
    for _ in range(levels - 1):
        mesh = refine_uniform(mesh)
        out.append(mesh)
    return out


def graded_sphere_mesh(h, initial_h=0.5, c_p=1.0):
    """Sphere graded with equal curvatures; degenerates to a quasi-uniform mesh."""
    mesh = build_initial_mesh(Sphere(), initial_h)
    return grade(mesh, GradingConfig(kappa1=1.0, kappa2=1.0, h=h, c_p=c_p))


def run_sphere_convergence(initial_h=0.5, levels=5, tol=1e-10, zero_rhs=False, graded=False, c_p=1.0, log=None):
    """Solve ``-Delta u = 12 xyz`` on a sequence of sphere meshes.

    Returns ``(table, meshes, reports)``.
    """
    u, f, grad_u = eigenfunction_benchmark()
    if zero_rhs:
        u = f = lambda p: np.zeros(np.asarray(p).shape[0])  # noqa: E731
        grad_u = lambda p: np.zeros_like(np.asarray(p))  # noqa: E731
    if graded:
        hs = [m.h for m in sphere_meshes(initial_h, levels)]
        meshes = [graded_sphere_mesh(h * (1 + 1e-12), initial_h, c_p)[0] for h in hs]
    else:
        meshes = sphere_meshes(initial_h, levels)
    table = ConvergenceTable()
    reports = []
    for mesh in meshes:
        t0 = time.perf_counter()
        rep = solve(build_system(mesh, f), tol=tol, mesh=mesh)
        rep.errors = lifted_errors(mesh, rep.coefficients, u, grad_u)
        wall = time.perf_counter() - t0
        table.add(rep.dof_count, mesh.h, rep.Psi_h, rep.Lambda_h, rep.errors[0], rep.errors[1], rep.cg_iterations, wall)
        reports.append(rep)
        if log:
            log(f"level {len(table.rows) - 1}: {mesh.n_triangles} triangles, h={mesh.h:.4g}, "
                f"L2={rep.errors[0]:.4g}, H1={rep.errors[1]:.4g}")
    return table, meshes, reports


# -- ridge --------------------------------------------------------------------------


def curvature_preflight(surface=None, n=2048):
    """``(kappa1, kappa2)`` by dense sampling of both curvature regions."""
    surface = RidgeSurface() if surface is None else surface
    k1 = curvature_kappa(surface, region_samples(surface, 1, n))
    k2 = curvature_kappa(surface, region_samples(surface, 2, n))
    return k1, k2


def rhs_preflight(mesh, f=rhs_bump):
    """Maximum of ``f`` over the lifted quadrature points of ``mesh``."""
    return float(np.max(pullback_values(mesh, f)))


def graded_mesh(surface, h, kappa1, kappa2, c_p=1.0, include_M4=False, h_cap=None, far_cap=1.0, initial_h=None):
    """Initial ring mesh at ``initial_h`` (default ``h``) graded for target ``h``."""
    mesh = build_initial_mesh(surface, h if initial_h is None else initial_h, check=False)
    cfg = GradingConfig(kappa1=kappa1, kappa2=kappa2, h=h, c_p=c_p, include_M4=include_M4, h_cap=h_cap,
                        far_cap=far_cap)
    return grade(mesh, cfg)


def quasi_uniform_mesh(surface, h, kappa1, kappa2, c1=0.25):
    """Ring mesh at size ``h``, refined only where ``h_T^2 kappa_T^2 > c1``."""
    mesh = build_initial_mesh(surface, h, check=False)
    cfg = GradingConfig(kappa1=kappa1, kappa2=kappa2, h=h, c1=c1, graded=False)
    return grade(mesh, cfg)


def free_dofs(mesh):
    return int(np.sum(~mesh.boundary)) if not mesh.surface.closed else mesh.n_vertices


def match_uniform(surface, target_dofs, kappa1, kappa2, tol=0.10, h0=None, max_tries=12):
    """Quasi-uniform mesh whose free-dof count is within ``tol`` of ``target_dofs``.

    ``h`` is rescaled by the square root of the dof ratio until the count is
    within half the tolerance, or the closest attempt is returned.
    """
    h = 2.0 / np.sqrt(target_dofs) if h0 is None else h0
    best = None
    for _ in range(max_tries):
        mesh, rep = quasi_uniform_mesh(surface, h, kappa1, kappa2)
        ratio = free_dofs(mesh) / target_dofs
        if best is None or abs(ratio - 1) < abs(best[2] - 1):
            best = (mesh, h, ratio)
        if abs(ratio - 1) <= tol / 2:
            break
        h *= np.sqrt(ratio) ** 1.0
    return best


class ReferenceSolution:
    """P1 solution on a fine mesh, evaluable at points of the surface.

    A point ``y`` on the surface is located by intersecting its normal fibre
    ``y + t nu(y)`` with candidate reference triangles found by a k-d tree
    over parameter-space centroids.
    """

    def __init__(self, mesh, coeffs, k=16):
        self.mesh = mesh
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.k = min(k, mesh.n_triangles)
        cen = mesh.params[mesh.triangles].mean(axis=1)
        self.tree = cKDTree(cen)
        self.E = mesh.edge_matrices()
        self.nu_h = mesh.flat_normals()
        self.B = hat_gradients(self.E)
        self.grad_h = np.einsum("nk,nkd->nd", self.coeffs[mesh.triangles], self.B)
        self.dist = vertex_distances(mesh, region1_vertices(mesh)) if mesh.surface.has_region_split else None
        self.fallbacks = 0

    def locate(self, y, nu, block=50_000):
        """Triangle index, barycentric weights and fibre offset ``t`` per point."""
        m = y.shape[0]
        tri = np.empty(m, dtype=np.int64)
        bary = np.empty((m, 3))
        toff = np.empty(m)
        V = self.mesh.vertices
        T = self.mesh.triangles
        for s in range(0, m, block):
            ys, ns = y[s : s + block], nu[s : s + block]
            _, cand = self.tree.query(ys[:, :2], k=self.k)
            cand = cand.reshape(ys.shape[0], -1)
            v0 = V[T[cand, 0]]
            nh = self.nu_h[cand]
            t = np.sum((v0 - ys[:, None]) * nh, -1) / np.sum(ns[:, None] * nh, -1)
            x = ys[:, None] + t[..., None] * ns[:, None]
            E = self.E[cand]
            r = x - v0
            g11 = np.sum(E[..., 0] ** 2, -1)
            g12 = np.sum(E[..., 0] * E[..., 1], -1)
            g22 = np.sum(E[..., 1] ** 2, -1)
            b1 = np.sum(E[..., 0] * r, -1)
            b2 = np.sum(E[..., 1] * r, -1)
            det = g11 * g22 - g12 * g12
            th1 = (g22 * b1 - g12 * b2) / det
            th2 = (g11 * b2 - g12 * b1) / det
            bc = np.stack([1.0 - th1 - th2, th1, th2], -1)
            score = bc.min(-1)
            j = np.argmax(score, axis=1)
            rows = np.arange(ys.shape[0])
            best = bc[rows, j]
            self.fallbacks += int(np.sum(score[rows, j] < -1e-8))
            best = np.clip(best, 0.0, None)
            best /= best.sum(1, keepdims=True)
            tri[s : s + block] = cand[rows, j]
            bary[s : s + block] = best
            toff[s : s + block] = t[rows, j]
        return tri, bary, toff

    def evaluate(self, y, nu, shape):
        """Values, surface gradients and distance to ``Gamma_1`` at surface points."""
        tri, bary, t = self.locate(y, nu)
        c = self.coeffs[self.mesh.triangles[tri]]
        val = np.sum(bary * c, 1)
        _, _, _, _, R = _node_quantities(self.E[tri], self.nu_h[tri], nu, shape, t)
        grad = np.einsum("nd,nde->ne", self.grad_h[tri], R)
        dist = None
        if self.dist is not None:
            dist = np.sum(bary * self.dist[self.mesh.triangles[tri]], 1)
        return val, grad, dist


def reference_errors(mesh, coeffs, ref, d1):
    """Lifted errors of a study solution against the reference.

    Returns a dict with ``L2``, ``H1``, ``H1_D1`` (error restricted to
    ``D_1``), ``share_D1`` (fraction of squared H1 error in ``D_1``) and the
    per-triangle squared-error density ``density``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    l2 = h1 = h1_near = 0.0
    density = np.zeros(mesh.n_triangles)
    for lq in iter_lifted(mesh):
        n, q = lq.delta.shape
        y = lq.point.reshape(-1, 3)
        val, grad, dist = ref.evaluate(y, lq.normal.reshape(-1, 3), lq.shape.reshape(-1, 3, 3))
        c = coeffs[mesh.triangles[lq.idx]]
        uh = np.einsum("qk,nk->nq", lq.bary, c)
        gh = np.einsum("nk,nkd->nd", c, hat_gradients(mesh.edge_matrices(lq.idx)))
        gh = np.einsum("nd,nqde->nqe", gh, lq.R)
        e0 = (val.reshape(n, q) - uh) ** 2
        e1 = np.sum((grad.reshape(n, q, 3) - gh) ** 2, -1)
        l2 += lq.integrate_lifted(e0)
        h1 += lq.integrate_lifted(e1)
        if dist is not None:
            near = dist.reshape(n, q) < d1
            h1_near += lq.integrate_lifted(np.where(near, e1, 0.0))
        density[lq.idx] = (e1 * lq.delta) @ lq.weights
    return dict(
        L2=float(np.sqrt(l2)),
        H1=float(np.sqrt(h1)),
        H1_D1=float(np.sqrt(h1_near)),
        share_D1=float(h1_near / h1) if h1 > 0 else 0.0,
        density=density,
    )


@dataclass
class RidgeResult:
    kappa1: float
    kappa2: float
    d1: float
    f_max: float
    graded: dict
    uniform: dict
    reference: dict
    table_rows: list
    timings: dict
    artifacts: list = field(default_factory=list)

    @property
    def dominance(self):
        g, u = self.graded, self.uniform
        matched = abs(g["dofs"] / u["dofs"] - 1.0) <= 0.10
        return matched and g["H1"] <= u["H1"] and g["share_D1"] < u["share_D1"]


RIDGE_HEADER = ("mesh", "triangles", "dofs", "h_max", "h_min", "Psi_h", "Lambda_h", "L2_error", "H1_error",
                "H1_error_D1", "share_D1", "cg_iters")


def run_ridge(study_h=0.3, reference_factor=8, c_p=1.0, include_M4=False, kappa=None, kappa_samples=2048,
              dof_tolerance=0.10, tol=1e-10, transfer_k=16, out_dir=None, log=None):
    """Graded vs quasi-uniform study on the ridge surface.

    The reference mesh is graded for ``study_h / reference_factor`` and capped
    at ``h_u / reference_factor`` where ``h_u`` is the quasi-uniform size, so
    it is finer than both study meshes by that factor everywhere.
    """
    say = log or (lambda msg: None)
    surface = RidgeSurface()
    timings = {}
    t0 = time.perf_counter()
    if kappa is None:
        k1, k2 = curvature_preflight(surface, kappa_samples)
    else:
        k1, k2 = kappa
    timings["preflight"] = time.perf_counter() - t0
    d1, _ = transition_width(GradingConfig(kappa1=k1, kappa2=k2, h=study_h, c_p=c_p))
    say(f"kappa1={k1:.6g} kappa2={k2:.6g} ratio={k1 / k2:.6g} d1={d1:.6g}")

    t0 = time.perf_counter()
    gmesh, grep_ = graded_mesh(surface, study_h, k1, k2, c_p=c_p, include_M4=include_M4)
    target = free_dofs(gmesh)
    umesh, h_u, _ = match_uniform(surface, target, k1, k2, tol=dof_tolerance)
    timings["study_meshes"] = time.perf_counter() - t0
    say(f"graded: {gmesh.n_triangles} triangles, {target} dofs; uniform: {umesh.n_triangles} triangles, "
        f"{free_dofs(umesh)} dofs at h_u={h_u:.4g}")

    t0 = time.perf_counter()
    fac = float(reference_factor)
    rmesh, _ = graded_mesh(surface, study_h / fac, k1, k2, c_p=c_p, include_M4=include_M4, h_cap=h_u / fac,
                           initial_h=h_u / fac)
    timings["reference_mesh"] = time.perf_counter() - t0
    say(f"reference: {rmesh.n_triangles} triangles, {free_dofs(rmesh)} dofs")

    t0 = time.perf_counter()
    rrep = solve(build_system(rmesh, rhs_bump), tol=tol)
    ref = ReferenceSolution(rmesh, rrep.coefficients, k=transfer_k)
    timings["reference_solve"] = time.perf_counter() - t0
    say(f"reference solve: {rrep.cg_iterations} CG iterations")

    f_max = rhs_preflight(gmesh)
    results = {}
    rows = []
    for name, mesh in (("graded", gmesh), ("uniform", umesh)):
        t0 = time.perf_counter()
        rep = solve(build_system(mesh, rhs_bump), tol=tol, mesh=mesh)
        err = reference_errors(mesh, rep.coefficients, ref, d1)
        timings[name] = time.perf_counter() - t0
        hT = mesh.geometry().h
        results[name] = dict(
            mesh=mesh, coeffs=rep.coefficients, dofs=free_dofs(mesh), triangles=mesh.n_triangles, Psi_h=rep.Psi_h,
            Lambda_h=rep.Lambda_h, cg_iters=rep.cg_iterations, h_max=float(hT.max()), h_min=float(hT.min()), **err,
        )
        r = results[name]
        rows.append([name, r["triangles"], r["dofs"], r["h_max"], r["h_min"], r["Psi_h"], r["Lambda_h"], r["L2"],
                     r["H1"], r["H1_D1"], r["share_D1"], r["cg_iters"]])
        say(f"{name}: H1={r['H1']:.5g} L2={r['L2']:.5g} D1 share={r['share_D1']:.4f}")
    psi_r, lam_r = global_indicators(rmesh)
    reference = dict(triangles=rmesh.n_triangles, dofs=free_dofs(rmesh), cg_iters=rrep.cg_iterations,
                     Psi_h=psi_r, Lambda_h=lam_r, fallbacks=ref.fallbacks, h_u=h_u)
    result = RidgeResult(k1, k2, d1, f_max, results["graded"], results["uniform"], reference, rows, timings)

    if out_dir is not None:
        write_csv(out_dir / "ridge.csv", RIDGE_HEADER, rows)
        result.artifacts.append(out_dir / "ridge.csv")
        for name in ("graded", "uniform"):
            r = results[name]
            m = r["mesh"]
            g = m.geometry()
            path = out_dir / f"ridge_{name}.vtk"
            write_vtk(
                path, m,
                point_fields={"solution": r["coeffs"]},
                cell_fields={"grad_error_density": r["density"] / g.area, "kappa_T": g.kappa, "h_T": g.h,
                             "rho_T": np.minimum(g.rho, 1e300), "marked": (m.generation > 0).astype(float)},
            )
            result.artifacts.append(path)
    return result


def check_ridge_rhs(f_max):
    """The bump load peaks at ``50 exp(-5)``."""
    return f_max <= 50.0 * np.exp(-5.0) * (1 + 1e-12)


def manifest_text(cfg_text, indicators, command):
    lines = [f"surfem {__version__}", f"command: {command}", "", "[config]", cfg_text.strip(), "", "[indicators]"]
    lines += [f"{k} = {v}" for k, v in indicators.items()]
    return "\n".join(lines) + "\n"


__all__ = [
    "ConvergenceTable",
    "ReferenceSolution",
    "RidgeResult",
    "curvature_preflight",
    "fit_exponent",
    "graded_mesh",
    "graded_sphere_mesh",
    "match_uniform",
    "quasi_uniform_mesh",
    "reference_errors",
    "run_ridge",
    "run_sphere_convergence",
    "sphere_meshes",
]
