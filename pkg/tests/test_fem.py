import numpy as np
import pytest
from scipy.sparse.linalg import spsolve

from surfem.errors import MaxIterExceeded
from surfem.fem import (
    DIRICHLET,
    MEAN_ZERO,
    assemble_load,
    assemble_stiffness,
    build_system,
    eigenfunction_benchmark,
    element_matrices,
    export_matrix_market,
    galerkin_residual,
    pullback_mean,
    solve,
)
from surfem.geometry import Plane, RidgeSurface, Sphere, Torus, rhs_bump
from surfem.lift import lifted_errors
from surfem.mesh import SurfaceMesh, bisect, build_initial_mesh


@pytest.fixture(scope="module")
def sphere():
    return build_initial_mesh(Sphere(), 0.3)


def test_single_triangle_stiffness():
    # oracle: right isosceles triangle with unit legs: classic P1 matrix
    v = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    mesh = SurfaceMesh(Plane(), v, np.array([[0, 1, 2]]))
    K = element_matrices(mesh)[0]
    expect = 0.5 * np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    np.testing.assert_allclose(K, expect, atol=1e-15)


def test_stiffness_symmetric_and_kernel(sphere):
    system = build_system(sphere, eigenfunction_benchmark()[1])
    A = system.matrix()
    assert abs(A - A.T).max() <= 1e-12
    assert np.abs(A @ np.ones(A.shape[0])).max() <= 1e-10
    assert np.all(A.diagonal() > 0)


def test_load_is_mean_zero_on_closed(sphere):
    rhs = assemble_load(sphere, lambda p: 1.0 + p[:, 2] ** 2)
    assert abs(rhs.sum()) <= 1e-12 * np.abs(rhs).sum()


def test_pullback_mean_constant(sphere):
    assert pullback_mean(sphere, lambda p: np.full(p.shape[0], 3.0)) == pytest.approx(3.0, rel=1e-14)


def test_mean_zero_solve_matches_direct(sphere):
    system = build_system(sphere, eigenfunction_benchmark()[1])
    rep = solve(system, tol=1e-12, mesh=sphere)
    assert system.constraint == MEAN_ZERO
    assert rep.converged and rep.residual <= 1e-12
    A = system.matrix().tolil()
    b = system.rhs.copy()
    A[0, :] = 0.0
    A[0, 0] = 1.0
    b[0] = 0.0
    x = spsolve(A.tocsr(), b)
    m = system.mass
    x -= (x @ m) / m.sum()
    np.testing.assert_allclose(rep.coefficients, x, atol=1e-9 * np.abs(x).max())
    assert abs(rep.coefficients @ m) <= 1e-12 * np.abs(rep.coefficients).sum()
    assert galerkin_residual(system, rep.coefficients) <= 1e-10 * np.abs(system.rhs).max()


def test_zero_rhs_gives_zero(sphere):
    rep = solve(build_system(sphere, lambda p: np.zeros(p.shape[0])))
    assert np.all(rep.coefficients == 0.0)


def test_dirichlet_plane_reproduces_linear():
    # oracle: the P1 space contains linear functions, which are harmonic
    mesh = build_initial_mesh(Plane(), 0.2)
    g = lambda p: 1.0 + 2.0 * p[:, 0] - 3.0 * p[:, 1]
    system = build_system(mesh, lambda p: np.zeros(p.shape[0]), dirichlet_values=g)
    assert system.constraint == DIRICHLET
    rep = solve(system, tol=1e-12)
    np.testing.assert_allclose(rep.coefficients, g(mesh.vertices), atol=1e-10)


def test_dirichlet_plane_manufactured_rate():
    # u = sin(pi x) sin(pi y), f = 2 pi^2 u on the unit square
    u = lambda p: np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1])
    gu = lambda p: np.pi * np.column_stack(
        [np.cos(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1]), np.sin(np.pi * p[:, 0]) * np.cos(np.pi * p[:, 1]),
         np.zeros(p.shape[0])])
    f = lambda p: 2 * np.pi**2 * u(p)
    mesh = build_initial_mesh(Plane(), 0.2)
    rows = []
    for _ in range(3):
        rep = solve(build_system(mesh, f), tol=1e-12)
        rows.append((mesh.h, *lifted_errors(mesh, rep.coefficients, u, gu)))
        mesh = bisect(mesh, np.arange(mesh.n_triangles))
    h, l2, h1 = map(np.array, zip(*rows))
    assert np.diff(np.log(l2))[-1] / np.diff(np.log(h))[-1] == pytest.approx(2.0, abs=0.2)
    assert np.diff(np.log(h1))[-1] / np.diff(np.log(h))[-1] == pytest.approx(1.0, abs=0.15)


def test_sphere_eigenfunction_errors_decrease(sphere):
    u, f, gu = eigenfunction_benchmark()
    m = sphere
    errs = []
    for _ in range(2):
        rep = solve(build_system(m, f), mesh=m)
        errs.append(lifted_errors(m, rep.coefficients, u, gu))
        m = bisect(m, np.arange(m.n_triangles))
    assert errs[1][0] < errs[0][0] / 3
    assert errs[1][1] < errs[0][1] / 1.7


def test_eigenfunction_identity():
    # oracle: grad u is tangential and -Delta u = 12 u for the degree-3 harmonic xyz
    u, f, gu = eigenfunction_benchmark()
    rng = np.random.default_rng(0)
    p = rng.normal(size=(50, 3))
    p /= np.linalg.norm(p, axis=1)[:, None]
    np.testing.assert_allclose(np.sum(gu(p) * p, axis=1), 0.0, atol=1e-15)
    np.testing.assert_allclose(f(p), 12 * u(p))


def test_torus_and_ridge_solves():
    t = build_initial_mesh(Torus(), 0.15)
    rep = solve(build_system(t, lambda p: p[:, 2]), mesh=t)
    assert rep.converged and rep.residual <= 1e-10
    r = build_initial_mesh(RidgeSurface(), 0.1, check=False)
    sys_r = build_system(r, rhs_bump)
    rep = solve(sys_r, mesh=r)
    assert rep.converged
    assert np.all(rep.coefficients[r.boundary] == 0.0)
    assert rep.dof_count == int((~r.boundary).sum())


def test_max_iter_exceeded(sphere):
    system = build_system(sphere, eigenfunction_benchmark()[1])
    with pytest.raises(MaxIterExceeded) as exc:
        solve(system, max_iter=3)
    assert exc.value.report is not None and exc.value.report.cg_iterations == 3


def test_matrix_market_roundtrip(tmp_path, sphere):
    import scipy.io

    system = build_system(sphere, eigenfunction_benchmark()[1])
    path = tmp_path / "A.mtx"
    export_matrix_market(system, path)
    B = scipy.io.mmread(str(path)).tocsr()
    assert abs(B - system.matrix()).max() == 0.0


def test_assembly_deterministic(sphere):
    a = assemble_stiffness(sphere)
    b = assemble_stiffness(sphere)
    for x, y in zip(a, b):
        assert x.tobytes() == y.tobytes()
