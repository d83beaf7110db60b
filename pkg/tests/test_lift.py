import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfem.errors import DegenerateTriangle, NormalFlip, TubeViolation
from surfem.geometry import RidgeSurface, Sphere, Torus
from surfem.lift import (
    area_ratio,
    delta_deviation,
    hat_gradients,
    inconsistency_gap,
    iter_lifted,
    lift_matrices,
    lifted_area,
    lifted_errors,
    lifted_gradient_norm,
    flat_gradient_norm,
    metric_tensors,
    normal_deviation,
)
from surfem.mesh import SurfaceMesh, build_initial_mesh, bisect


def _lift_point(mesh, t, node):
    bary = np.array([[1.0 - node[0] - node[1], node[0], node[1]]])
    return mesh.lift(bary, np.array([t])).point[0]


def _fd_tangents(mesh, t, node, eps=1e-6):
    # oracle: central differences of the lifted parameterisation Y(t1, t2)
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = eps
        cols.append((_lift_point(mesh, t, node + e) - _lift_point(mesh, t, node - e)) / (2 * eps))
    return np.column_stack(cols)


@pytest.fixture(scope="module")
def meshes():
    return {
        "sphere": build_initial_mesh(Sphere(), 0.3),
        "torus": build_initial_mesh(Torus(), 0.15),
        "ridge": build_initial_mesh(RidgeSurface(), 0.15, check=False),
    }


def _safe_triangles(mesh, n, seed=0):
    g = mesh.geometry()
    ok = np.nonzero(g.h * g.kappa < 0.4)[0]
    return np.random.default_rng(seed).choice(ok, size=min(n, ok.size), replace=False)


@pytest.mark.parametrize("name", ["sphere", "torus", "ridge"])
def test_metric_tensor_against_finite_differences(meshes, name):
    mesh = meshes[name]
    for t in _safe_triangles(mesh, 5):
        node = np.array([0.2, 0.3])
        GX, GY = metric_tensors(mesh, t, node)
        dY = _fd_tangents(mesh, t, node)
        np.testing.assert_allclose(GY, dY.T @ dY, rtol=1e-6, atol=1e-9 * np.abs(GX).max())
        E = mesh.edge_matrices(np.array([t]))[0]
        np.testing.assert_allclose(GX, E.T @ E, rtol=1e-14)
        delta = area_ratio(mesh, t, node)
        assert delta == pytest.approx(np.sqrt(np.linalg.det(dY.T @ dY) / np.linalg.det(E.T @ E)), rel=1e-6)


@pytest.mark.parametrize("name", ["sphere", "torus", "ridge"])
def test_R_chain_rule(meshes, name):
    # eta^l(Y(t)) = eta(X(t)), so (grad_h eta R) . dY_k = grad_h eta . E_k
    mesh = meshes[name]
    rng = np.random.default_rng(1)
    for t in _safe_triangles(mesh, 5):
        node = np.array([0.25, 0.25])
        _, R = lift_matrices(mesh, t, node)
        B = hat_gradients(mesh.edge_matrices(np.array([t])))[0]
        g = rng.normal(size=3) @ B
        dY = _fd_tangents(mesh, t, node)
        E = mesh.edge_matrices(np.array([t]))[0]
        lhs = (g @ R) @ dY
        rhs = g @ E
        np.testing.assert_allclose(lhs, rhs, rtol=1e-6, atol=1e-7 * np.abs(rhs).max())


@pytest.mark.parametrize("name", ["sphere", "torus", "ridge"])
def test_round_trip_and_tangency(meshes, name):
    mesh = meshes[name]
    rng = np.random.default_rng(2)
    for lq in iter_lifted(mesh):
        nu_h = lq.nu_h[:, None, :]
        g = rng.normal(size=lq.normal.shape)
        g = g - np.sum(g * nu_h, axis=-1, keepdims=True) * nu_h
        gR = np.einsum("nqd,nqde->nqe", g, lq.R)
        back = np.einsum("nqd,nqde->nqe", gR, lq.Q)
        assert np.abs(back - g).max() <= 1e-8 * max(1.0, np.abs(g).max())
        assert np.abs(np.sum(gR * lq.normal, axis=-1)).max() <= 1e-10 * np.abs(g).max()


def test_hat_gradients_partition_of_unity():
    mesh = build_initial_mesh(Sphere(), 0.5)
    E = mesh.edge_matrices()
    B = hat_gradients(E)
    np.testing.assert_allclose(B.sum(axis=1), 0.0, atol=1e-12)
    # grad phi_k . (x_j - x_0) = [k == j] - [k == 0]
    proj = np.einsum("nkd,ndj->nkj", B, E)
    expect = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(proj, np.broadcast_to(expect, proj.shape), atol=1e-12)


def test_degenerate_triangle():
    E = np.array([[[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]]])
    with pytest.raises(DegenerateTriangle):
        hat_gradients(E)


def test_tube_violation():
    v = np.eye(3)
    mesh = SurfaceMesh(Sphere(), v, np.array([[0, 1, 2]]))
    with pytest.raises(TubeViolation):
        list(iter_lifted(mesh))


def test_normal_flip():
    s = 0.05
    v = np.array([[1.0, 0.0, 0.0], [np.cos(s), np.sin(s), 0.0], [np.cos(s), 0.0, np.sin(s)]])
    good = SurfaceMesh(Sphere(), v, np.array([[0, 1, 2]]))
    list(iter_lifted(good))
    bad = SurfaceMesh(Sphere(), v, np.array([[0, 2, 1]]))
    with pytest.raises(NormalFlip):
        list(iter_lifted(bad))


def test_sphere_lifted_area_converges():
    m = build_initial_mesh(Sphere(), 0.3)
    errs = []
    for _ in range(3):
        errs.append(abs(lifted_area(m) - 4 * np.pi))
        m = bisect(m, np.arange(m.n_triangles))
    assert errs[0] < 1e-3
    assert errs[1] < errs[0] / 8 and errs[2] < errs[1] / 8


def test_delta_and_normal_rates():
    m = build_initial_mesh(Sphere(), 0.3)
    rows = []
    for _ in range(3):
        rows.append((m.h, delta_deviation(m)[0], normal_deviation(m)))
        m = bisect(m, np.arange(m.n_triangles))
    h, dd, nd = map(np.array, zip(*rows))
    assert np.all(np.diff(np.log(dd)) / np.diff(np.log(h)) > 1.7)
    assert np.all(np.diff(np.log(nd)) / np.diff(np.log(h)) > 0.8)


def test_interpolation_errors_rates():
    # oracle: nodal interpolation of a smooth function: O(h^2) in L2, O(h) in H1
    def u(p):
        return p[:, 0] * p[:, 1] * p[:, 2]

    def gu(p):
        x, y, z = p.T
        g = np.column_stack([y * z, x * z, x * y])
        return g - np.sum(g * p, axis=1)[:, None] * p

    m = build_initial_mesh(Sphere(), 0.3)
    rows = []
    for _ in range(3):
        rows.append((m.h, *lifted_errors(m, u(m.vertices), u, gu)))
        m = bisect(m, np.arange(m.n_triangles))
    h, l2, h1 = map(np.array, zip(*rows))
    assert np.all(np.diff(np.log(l2)) / np.diff(np.log(h)) > 1.7)
    assert np.all(np.diff(np.log(h1)) / np.diff(np.log(h)) > 0.85)


def test_exact_interpolant_of_linear_on_plane():
    from surfem.geometry import Plane

    m = build_initial_mesh(Plane(), 0.3)
    u = lambda p: 2.0 * p[:, 0] - p[:, 1]
    gu = lambda p: np.tile([2.0, -1.0, 0.0], (p.shape[0], 1))
    l2, h1 = lifted_errors(m, u(m.vertices), u, gu)
    assert l2 < 1e-13 and h1 < 1e-13


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_gap_is_symmetric_and_small(seed):
    m = build_initial_mesh(Sphere(), 0.3)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=m.n_vertices)
    z = rng.normal(size=m.n_vertices)
    gap = inconsistency_gap(m, v, z)
    assert gap == pytest.approx(inconsistency_gap(m, z, v), rel=1e-10, abs=1e-12)
    assert gap <= 0.1 * flat_gradient_norm(m, v) * flat_gradient_norm(m, z)
    r = lifted_gradient_norm(m, v) / flat_gradient_norm(m, v)
    assert abs(r - 1.0) < 0.1
