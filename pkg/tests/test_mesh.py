import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfem.errors import SuffViolated
from surfem.geometry import Plane, RidgeSurface, Sphere, Torus, curvature_kappa
from surfem.mesh import (
    SurfaceMesh,
    bisect,
    bisect_with_map,
    build_initial_mesh,
    check_invariants,
    check_suff,
    compute_geometry,
    disk_rings,
    icosahedron,
    refine_uniform,
)
from surfem.quadrature import lattice


@pytest.fixture(scope="module")
def ico():
    v, f = icosahedron()
    return SurfaceMesh(Sphere(), v, f)


def test_icosahedron_counts(ico):
    assert (ico.n_triangles, ico.n_vertices) == (20, 12)
    assert check_invariants(ico) == []


def test_initial_coarse_sphere_is_icosahedron():
    # the coarse icosahedron violates h^2 kappa^2 <= 1/4, so the check must be off
    mesh = build_initial_mesh(Sphere(), 1.2, check=False)
    assert mesh.n_triangles == 20
    with pytest.raises(SuffViolated):
        build_initial_mesh(Sphere(), 1.2)


def test_one_full_sweep_counts(ico):
    m = bisect(ico, np.arange(20))
    assert (m.n_triangles, m.n_vertices) == (80, 42)
    assert check_invariants(m) == []


def test_sweep_halves_h(ico):
    m = ico
    hs = [m.h]
    for _ in range(4):
        m = bisect(m, np.arange(m.n_triangles))
        hs.append(m.h)
    ratios = np.array(hs[1:]) / np.array(hs[:-1])
    # edge midpoints are pushed out onto the sphere, so the first sweep shrinks less
    assert np.all(ratios[1:] >= 0.45) and np.all(ratios[1:] <= 0.75)
    assert ratios[0] < 1.0


def test_shape_regularity_flat_ten_sweeps():
    m = build_initial_mesh(Plane(), 0.3)
    s0 = m.shape_sigma().max()
    rng = np.random.default_rng(7)
    for _ in range(10):
        marked = rng.choice(m.n_triangles, size=max(1, m.n_triangles // 8), replace=False)
        m = bisect(m, marked, carry_geometry=False)
    assert m.shape_sigma().max() <= 2.0 * s0


def test_shape_regularity_sphere_sweeps(ico):
    # projecting midpoints onto the sphere perturbs the similarity classes;
    # the measured ceiling is 2.06x the icosahedron value and levels off
    m = ico
    s0 = m.shape_sigma().max()
    ratios = []
    for _ in range(6):
        m = bisect(m, np.arange(m.n_triangles))
        ratios.append(m.shape_sigma().max() / s0)
    assert max(ratios) <= 2.1
    assert ratios[-1] - ratios[-2] < 0.01


def test_disk_ring_counts():
    for n in (1, 2, 5):
        uv, f = disk_rings(n)
        assert f.shape[0] == 4 * n * n
        assert uv.shape[0] == 1 + 2 * n * (n + 1)


def test_flat_area_sphere():
    m = build_initial_mesh(Sphere(), 0.3)
    assert m.flat_area() == pytest.approx(4 * np.pi, rel=0.05)
    assert m.flat_area() < 4 * np.pi


def test_local_refinement_conforming_and_geometry_carried():
    m = build_initial_mesh(Sphere(), 0.5)
    m.geometry()
    rng = np.random.default_rng(0)
    for _ in range(3):
        marked = rng.choice(m.n_triangles, size=m.n_triangles // 10, replace=False)
        ref = bisect_with_map(m, marked)
        assert check_invariants(ref.mesh) == []
        assert np.all(ref.split[marked])
        carried = ref.mesh.geometry()
        fresh = compute_geometry(ref.mesh)
        np.testing.assert_allclose(carried.h, fresh.h, rtol=1e-14)
        np.testing.assert_allclose(carried.kappa, fresh.kappa, rtol=1e-12)
        m = ref.mesh
    gen = m.generation
    assert gen.min() >= 0 and gen.max() >= 2


def test_parent_map_area_conservation():
    m = build_initial_mesh(Plane(), 0.3)
    ref = bisect_with_map(m, [0, 3])
    parent_area = np.bincount(ref.parent, weights=ref.mesh.areas(), minlength=m.n_triangles)
    np.testing.assert_allclose(parent_area, m.areas(), rtol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), frac=st.floats(0.01, 0.5))
def test_random_marking_keeps_invariants(seed, frac):
    m = build_initial_mesh(Plane(), 0.35)
    rng = np.random.default_rng(seed)
    for _ in range(2):
        k = max(1, int(frac * m.n_triangles))
        m = bisect(m, rng.choice(m.n_triangles, size=k, replace=False), carry_geometry=False)
    assert check_invariants(m) == []
    assert m.flat_area() == pytest.approx(1.0, rel=1e-12)


def test_ridge_mesh_valid_and_boundary_on_circle():
    R = RidgeSurface()
    m = build_initial_mesh(R, 0.3, check=False)
    m = bisect(m, np.arange(0, m.n_triangles, 3))
    assert check_invariants(m) == []
    uv = m.params[m.boundary]
    np.testing.assert_allclose(np.hypot(uv[:, 0], uv[:, 1]), 1.0, atol=1e-12)


def test_torus_mesh_valid():
    m = build_initial_mesh(Torus(), 0.15)
    assert check_invariants(m) == []
    assert m.flat_area() == pytest.approx(4 * np.pi**2 * 0.4, rel=0.05)


def test_sphere_kappa_T_is_one():
    m = build_initial_mesh(Sphere(), 0.5)
    # umbilic points: the closed-form discriminant cancels to roundoff, whose
    # square root leaves about sqrt(eps) relative error
    np.testing.assert_allclose(m.geometry().kappa, 1.0, rtol=1e-7)


def test_kappa_T_against_dense_oracle():
    # oracle: 100x denser barycentric lattice on each triangle
    R = RidgeSurface()
    m = build_initial_mesh(R, 0.1, check=False)
    g = m.geometry()
    worst = np.argsort(-g.kappa)[:20]
    bary = lattice(13)
    assert bary.shape[0] >= 100
    for t in worst:
        dense = curvature_kappa(R, m.lift(bary, np.array([t])).point)
        assert g.kappa[t] <= dense * (1 + 1e-12)
        assert g.kappa[t] >= 0.5 * dense


def test_suff_check_reports_worst():
    m = build_initial_mesh(RidgeSurface(), 0.3, check=False)
    with pytest.raises(SuffViolated) as exc:
        check_suff(m)
    assert exc.value.worst_value > 0.25


def test_invariants_detect_off_surface():
    m = build_initial_mesh(Sphere(), 0.5)
    v = m.vertices.copy()
    v[0] *= 1.01
    bad = SurfaceMesh(m.surface, v, m.triangles)
    assert any("off surface" in p for p in check_invariants(bad))


def test_refine_uniform_quadruples():
    m = build_initial_mesh(Plane(), 0.5)
    assert refine_uniform(m, 2).n_triangles == 16 * m.n_triangles
