"""Command-line front end.

Verbs::

    surfem solve     one solve on the configured surface
    surfem converge  sphere convergence study (asserts the EOC budgets)
    surfem grade     graded mesh for the configured surface
    surfem ridge     graded vs quasi-uniform study against a fine reference
    surfem export    mesh (OFF, VTK) and stiffness matrix (MatrixMarket)

Every run writes ``manifest.txt`` to the output directory.  The exit code is
0 iff every assertion enabled for the verb passes.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import BudgetExceeded, SurfemError
from .experiments import (
    check_ridge_rhs,
    curvature_preflight,
    fit_exponent,
    manifest_text,
    run_ridge,
    run_sphere_convergence,
)
from .fem import build_system, eigenfunction_benchmark, export_matrix_market, solve
from .geometry import rhs_bump
from .grading import GradingConfig, grade
from .io import write_csv, write_off, write_vtk
from .lift import lifted_errors
from .mesh import build_initial_mesh

log = logging.getLogger("surfem")

H1_BUDGET = (0.85, 1.15)
L2_BUDGET = (1.8, 2.2)


def _kappas(cfg, surface, mesh):
    g = cfg.grading
    if g.kappa1 != "auto" and g.kappa2 != "auto":
        return float(g.kappa1), float(g.kappa2)
    if surface.has_region_split:
        return curvature_preflight(surface, g.kappa_samples)
    # one curvature region: the sampled triangle bounds of the initial mesh
    k = float(mesh.geometry().kappa.max())
    return k, k


def _load_for(surface):
    if surface.name == "sphere":
        return eigenfunction_benchmark()[1]
    if surface.name == "ridge":
        return rhs_bump
    # zero-mean by odd symmetry on the torus; any load is admissible with boundary
    return lambda p: np.asarray(p)[:, 2]


def _base_mesh(cfg, args):
    surface = cfg.make_surface()
    check = surface.name in ("sphere", "torus", "plane")
    mesh = build_initial_mesh(surface, cfg.mesh.initial_h, c1=cfg.grading.c1, check=check)
    report = None
    if args.graded or cfg.grading.enabled:
        k1, k2 = _kappas(cfg, surface, mesh)
        gc = GradingConfig(
            kappa1=k1, kappa2=k2, h=cfg.grading.h, c_p=cfg.grading.c_p, include_M4=cfg.grading.include_m4,
            max_sweeps=cfg.grading.max_sweeps, min_h=cfg.grading.min_h, far_cap=cfg.grading.far_cap,
            c1=cfg.grading.c1,
        )
        mesh, report = grade(mesh, gc)
    return mesh, report


def cmd_solve(cfg, args, out):
    mesh, _ = _base_mesh(cfg, args)
    system = build_system(mesh, _load_for(mesh.surface))
    rep = solve(system, tol=cfg.solver.tol, max_iter=cfg.solver.max_iter or None, mesh=mesh)
    ind = {"triangles": mesh.n_triangles, "dofs": rep.dof_count, "h": mesh.h, "Psi_h": rep.Psi_h,
           "Lambda_h": rep.Lambda_h, "cg_iterations": rep.cg_iterations, "residual": rep.residual}
    if mesh.surface.name == "sphere":
        u, _, gu = eigenfunction_benchmark()
        ind["L2_error"], ind["H1_error"] = lifted_errors(mesh, rep.coefficients, u, gu)
    write_csv(out / "solve.csv", tuple(ind), [list(ind.values())])
    if cfg.output.vtk:
        write_vtk(out / "solution.vtk", mesh, point_fields={"solution": rep.coefficients})
    return ind, rep.residual <= cfg.solver.tol


def cmd_converge(cfg, args, out):
    if cfg.surface.kind != "sphere":
        raise SurfemError("the convergence study runs on the sphere")
    levels = args.levels or cfg.mesh.levels
    table, meshes, _ = run_sphere_convergence(cfg.mesh.initial_h, levels, cfg.solver.tol, graded=args.graded,
                                              c_p=args.cp or cfg.grading.c_p, log=log.info)
    table.write(out / "convergence.csv", out / "timings.csv")
    print(table.format())
    last = table.rows[-1]
    ind = {f"level{r['level']}_{k}": r[k] for r in table.rows for k in ("h", "Psi_h", "Lambda_h", "L2_error",
                                                                        "H1_error")}
    ok = True
    if levels >= 4:
        ok = H1_BUDGET[0] <= last["EOC_H1"] <= H1_BUDGET[1] and L2_BUDGET[0] <= last["EOC_L2"] <= L2_BUDGET[1]
        ind["EOC_H1_last"], ind["EOC_L2_last"] = last["EOC_H1"], last["EOC_L2"]
        ind["fit_H1"] = fit_exponent(table.column("h"), table.column("H1_error"))
        ind["fit_L2"] = fit_exponent(table.column("h"), table.column("L2_error"))
    if cfg.output.vtk:
        write_vtk(out / "finest.vtk", meshes[-1])
    return ind, ok


def cmd_grade(cfg, args, out):
    args.graded = True
    try:
        mesh, report = _base_mesh(cfg, args)
        ok = True
    except BudgetExceeded as exc:
        mesh, report, ok = exc.mesh, exc.report, False
    write_csv(out / "grading.csv", ("key", "value"), report.summary_rows())
    g = mesh.geometry()
    if cfg.output.vtk:
        write_vtk(out / "graded.vtk", mesh, cell_fields={
            "kappa_T": g.kappa, "h_T": g.h, "rho_T": np.minimum(g.rho, 1e300),
            "marked": (mesh.generation > 0).astype(float)})
    if cfg.output.off:
        write_off(out / "graded.off", mesh.vertices, mesh.triangles)
    ind = dict(report.summary_rows())
    ind["triangles"] = mesh.n_triangles
    return ind, ok and not report.violations


def cmd_ridge(cfg, args, out):
    k = None
    if cfg.grading.kappa1 != "auto" and cfg.grading.kappa2 != "auto":
        k = (float(cfg.grading.kappa1), float(cfg.grading.kappa2))
    r = run_ridge(
        study_h=cfg.ridge.study_h, reference_factor=cfg.ridge.reference_factor, c_p=args.cp or cfg.grading.c_p,
        include_M4=args.m4 or cfg.grading.include_m4, kappa=k, kappa_samples=cfg.grading.kappa_samples,
        dof_tolerance=cfg.ridge.dof_tolerance, tol=cfg.solver.tol, transfer_k=cfg.ridge.transfer_k, out_dir=out,
        log=log.info,
    )
    ind = {"kappa1": r.kappa1, "kappa2": r.kappa2, "ratio": r.kappa1 / r.kappa2, "d1": r.d1, "f_max": r.f_max}
    for name in ("graded", "uniform"):
        for key in ("dofs", "triangles", "H1", "L2", "share_D1", "Psi_h", "Lambda_h"):
            ind[f"{name}_{key}"] = r.graded[key] if name == "graded" else r.uniform[key]
    for key, v in r.reference.items():
        ind[f"reference_{key}"] = v
    ok = r.dominance and check_ridge_rhs(r.f_max)
    return ind, ok


def cmd_export(cfg, args, out):
    mesh, _ = _base_mesh(cfg, args)
    write_off(out / "mesh.off", mesh.vertices, mesh.triangles)
    write_vtk(out / "mesh.vtk", mesh)
    system = build_system(mesh, _load_for(mesh.surface))
    export_matrix_market(system, out / "stiffness.mtx")
    return {"triangles": mesh.n_triangles, "vertices": mesh.n_vertices, "h": mesh.h}, True


COMMANDS = {"solve": cmd_solve, "converge": cmd_converge, "grade": cmd_grade, "ridge": cmd_ridge,
            "export": cmd_export}


def build_parser():
    p = argparse.ArgumentParser(prog="surfem", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="INI configuration file")
    p.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    p.add_argument("--levels", type=int, help="number of refinement levels")
    p.add_argument("--graded", action="store_true", help="use curvature-graded meshes")
    p.add_argument("--m4", action="store_true", help="enable criterion (M4) for L2 accuracy")
    p.add_argument("--cp", type=float, help="Poincare constant surrogate c_p")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        if args.cp:
            cfg.grading.c_p = args.cp
        if args.m4:
            cfg.grading.include_m4 = True
        if args.levels:
            cfg.mesh.levels = args.levels
        cfg.validate()
        out = args.out or Path(cfg.output.dir)
        out.mkdir(parents=True, exist_ok=True)
        indicators, ok = COMMANDS[args.command](cfg, args, out)
    except SurfemError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    argv_text = " ".join(sys.argv[1:] if argv is None else argv)
    indicators["assertions_passed"] = ok
    (out / "manifest.txt").write_text(manifest_text(cfg.as_ini(), indicators, argv_text))
    for k, v in indicators.items():
        print(f"{k}: {v}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
