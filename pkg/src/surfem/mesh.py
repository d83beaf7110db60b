"""Conforming surface triangulations with vertices on the surface.

A :class:`SurfaceMesh` is immutable; :func:`bisect` returns a new mesh along
with the map from new triangles to their parents, which lets per-triangle
geometry be carried over for triangles that were not split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    AmbiguousProjection,
    NoConvergence,
    NonTermination,
    ProjectionFailed,
    SuffViolated,
)
from .geometry import Graph, ParametricSurface, Sphere, Torus, shape_spectral_radius
from .quadrature import BARY

CLOSURE_ROUNDS = 100
_CHUNK = 20_000


class SurfaceMesh:
    """Triangle mesh of a surface with consistently oriented triangles.

    Parameters
    ----------
    surface : Surface
        The analytic surface all vertices lie on.
    vertices : (nv, 3) array
    triangles : (nt, 3) int array
        Counter-clockwise when seen from the ``+nu`` side.
    params : (nv, 2) array, optional
        Parameter coordinates, for parametric surfaces.
    boundary : (nv,) bool array, optional
        Boundary-vertex flags; derived from edge incidence when omitted.
    generation : (nt,) int array, optional
        Number of bisections separating each triangle from the initial mesh.
    """

    def __init__(self, surface, vertices, triangles, params=None, boundary=None, generation=None):
        self.surface = surface
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.params = None if params is None else np.ascontiguousarray(params, dtype=float)
        nt = self.triangles.shape[0]
        self.generation = np.zeros(nt, dtype=np.int64) if generation is None else np.asarray(generation, dtype=np.int64)
        for arr in (self.vertices, self.triangles, self.generation):
            arr.flags.writeable = False
        self._edges = None
        self._geometry = None
        if boundary is None:
            boundary = np.zeros(self.n_vertices, dtype=bool)
            ev, _, count = self.edges
            boundary[ev[count == 1].ravel()] = True
        self.boundary = np.asarray(boundary, dtype=bool)
        self.boundary.flags.writeable = False

    def __repr__(self):
        return f"SurfaceMesh({self.surface.name}, nv={self.n_vertices}, nt={self.n_triangles})"

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    # -- topology ----------------------------------------------------------
    @property
    def edges(self):
        """``(edge_vertices, tri_edges, incidence_count)``.

        Local edge ``k`` of a triangle is the one opposite its vertex ``k``.
        """
        if self._edges is None:
            t = self.triangles
            nv = self.n_vertices
            pairs = t[:, [1, 2, 2, 0, 0, 1]].reshape(-1, 3, 2)
            lo = pairs.min(axis=2)
            hi = pairs.max(axis=2)
            keys = lo * nv + hi
            uniq, inv = np.unique(keys.ravel(), return_inverse=True)
            ev = np.stack([uniq // nv, uniq % nv], axis=1)
            tri_edges = inv.reshape(-1, 3).astype(np.int64)
            count = np.bincount(inv.ravel(), minlength=uniq.size)
            self._edges = (ev, tri_edges, count)
        return self._edges

    def edge_lengths(self):
        ev = self.edges[0]
        return np.linalg.norm(self.vertices[ev[:, 0]] - self.vertices[ev[:, 1]], axis=1)

    def longest_edge_local(self):
        """Local index of each triangle's longest edge under a strict total order.

        Ties in length are broken by vertex indices so neighbours always agree.
        """
        ev, tri_edges, _ = self.edges
        order = np.lexsort((ev[:, 1], ev[:, 0], self.edge_lengths()))
        rank = np.empty(order.size, dtype=np.int64)
        rank[order] = np.arange(order.size)
        return np.argmax(rank[tri_edges], axis=1).astype(np.int64)

    # -- flat geometry -------------------------------------------------------
    def edge_matrices(self, idx=None):
        """``grad X = [x1 - x0, x2 - x0]`` per triangle, shape ``(n, 3, 2)``."""
        t = self.triangles if idx is None else self.triangles[idx]
        v = self.vertices
        return np.stack([v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]]], axis=2)

    def flat_normals(self, idx=None):
        E = self.edge_matrices(idx)
        n = np.cross(E[:, :, 0], E[:, :, 1])
        return n / np.linalg.norm(n, axis=1)[:, None]

    def areas(self, idx=None):
        E = self.edge_matrices(idx)
        return 0.5 * np.linalg.norm(np.cross(E[:, :, 0], E[:, :, 1]), axis=1)

    def diameters(self, idx=None):
        t = self.triangles if idx is None else self.triangles[idx]
        v = self.vertices
        a = np.linalg.norm(v[t[:, 1]] - v[t[:, 2]], axis=1)
        b = np.linalg.norm(v[t[:, 2]] - v[t[:, 0]], axis=1)
        c = np.linalg.norm(v[t[:, 0]] - v[t[:, 1]], axis=1)
        return np.maximum(np.maximum(a, b), c)

    def shape_sigma(self, idx=None):
        """``h_T / inradius`` per triangle."""
        t = self.triangles if idx is None else self.triangles[idx]
        v = self.vertices
        a = np.linalg.norm(v[t[:, 1]] - v[t[:, 2]], axis=1)
        b = np.linalg.norm(v[t[:, 2]] - v[t[:, 0]], axis=1)
        c = np.linalg.norm(v[t[:, 0]] - v[t[:, 1]], axis=1)
        inr = 2.0 * self.areas(idx) / (a + b + c)
        return np.maximum(np.maximum(a, b), c) / inr

    @property
    def h(self):
        return float(self.diameters().max())

    def flat_area(self):
        return float(self.areas().sum())

    def lumped_mass(self):
        """``m_i = sum_{T ni i} area(T) / 3`` so that ``sum_i c_i m_i`` integrates P1 functions."""
        m = np.zeros(self.n_vertices)
        np.add.at(m, self.triangles.ravel(), np.repeat(self.areas() / 3.0, 3))
        return m

    # -- sampling of the lifted triangles -------------------------------------------
    def flat_points(self, bary, idx=None):
        """Points ``sum_k bary_k x_k`` for each triangle, shape ``(n, q, 3)``."""
        t = self.triangles if idx is None else self.triangles[idx]
        return np.einsum("qk,nkd->nqd", bary, self.vertices[t])

    def lift(self, bary, idx=None):
        """Closest-point frames of flat points given by barycentric weights.

        Returns a flattened :class:`PointFrame` of length ``n * q``.
        """
        t = self.triangles if idx is None else self.triangles[idx]
        x = self.flat_points(bary, idx).reshape(-1, 3)
        seed = None
        if self.params is not None and not isinstance(self.surface, Torus):
            seed = np.einsum("qk,nkd->nqd", bary, self.params[t]).reshape(-1, 2)
        return self.surface.closest_point(x, seed=seed)

    def sample_points(self, idx=None):
        """The 3 vertices and 6 lifted quadrature nodes of each triangle, ``(n, 9, 3)``."""
        t = self.triangles if idx is None else self.triangles[idx]
        lifted = self.lift(BARY, idx).point.reshape(t.shape[0], -1, 3)
        return np.concatenate([self.vertices[t], lifted], axis=1)

    # -- per-triangle geometry --------------------------------------------------------
    def geometry(self):
        """Cached :class:`TriangleGeometry` for every triangle."""
        if self._geometry is None:
            self._geometry = compute_geometry(self)
        return self._geometry

    def with_geometry(self, geom):
        self._geometry = geom
        return self


@dataclass
class TriangleGeometry:
    """Per-triangle geometric statistics (arrays over triangles).

    ``rho`` is filled in by the grading module; it is NaN until then.
    ``region1`` flags triangles whose lifted barycenter lies in the
    high-curvature region.
    """

    h: np.ndarray
    area: np.ndarray
    nu_h: np.ndarray
    grad_X: np.ndarray
    kappa: np.ndarray
    gamma: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray
    region1: np.ndarray

    def __getitem__(self, t):
        return TriangleRecord(
            h_T=float(self.h[t]),
            area_h=float(self.area[t]),
            nu_h=self.nu_h[t],
            grad_X=self.grad_X[t],
            kappa_T=float(self.kappa[t]),
            gamma_T=float(self.gamma[t]),
            rho_T=float(self.rho[t]),
            shape_sigma=float(self.sigma[t]),
        )

    def take(self, idx):
        return TriangleGeometry(*(getattr(self, f)[idx] for f in self.__dataclass_fields__))

    @staticmethod
    def concat(parts):
        fields = TriangleGeometry.__dataclass_fields__
        return TriangleGeometry(*(np.concatenate([getattr(p, f) for p in parts]) for f in fields))


@dataclass(frozen=True)
class TriangleRecord:
    h_T: float
    area_h: float
    nu_h: np.ndarray
    grad_X: np.ndarray
    kappa_T: float
    gamma_T: float
    rho_T: float
    shape_sigma: float


def compute_geometry(mesh, idx=None, h_fd=None):
    """Geometry of the triangles ``idx`` (all by default).

    ``kappa_T`` and ``gamma_T`` are maxima over the three vertices and the six
    lifted quadrature nodes.
    """
    idx = np.arange(mesh.n_triangles) if idx is None else np.asarray(idx, dtype=np.int64)
    kappa = np.empty(idx.size)
    gamma = np.empty(idx.size)
    region1 = np.zeros(idx.size, dtype=bool)
    for s in range(0, idx.size, _CHUNK):
        sub = idx[s : s + _CHUNK]
        if mesh.surface.has_region_split:
            center = mesh.lift(np.full((1, 3), 1.0 / 3.0), sub).point
            region1[s : s + sub.size] = mesh.surface.in_region1(center)
        pts = mesh.sample_points(sub)
        flat = pts.reshape(-1, 3)
        kappa[s : s + sub.size] = shape_spectral_radius(mesh.surface.shape_operator(flat)).reshape(sub.size, -1).max(1)
        dh = mesh.surface.shape_gradient_norms(flat, h_fd)
        gamma[s : s + sub.size] = dh.reshape(sub.size, -1).max(1)
    return TriangleGeometry(
        h=mesh.diameters(idx),
        area=mesh.areas(idx),
        nu_h=mesh.flat_normals(idx),
        grad_X=mesh.edge_matrices(idx),
        kappa=kappa,
        gamma=gamma,
        sigma=mesh.shape_sigma(idx),
        rho=np.full(idx.size, np.nan),
        region1=region1,
    )


def triangle_geometry(mesh, t):
    """Geometry record of a single triangle."""
    return mesh.geometry()[t]


def suff_values(mesh):
    g = mesh.geometry()
    return g.h**2 * g.kappa**2


def check_suff(mesh, c1=0.25):
    """Raise :class:`SuffViolated` if any triangle has ``h_T^2 kappa_T^2 > c1``."""
    vals = suff_values(mesh)
    worst = int(np.argmax(vals))
    if vals[worst] > c1:
        raise SuffViolated(
            f"triangle {worst} has h_T^2 kappa_T^2 = {vals[worst]:.4g} > c1 = {c1}",
            worst_triangle=worst,
            worst_value=float(vals[worst]),
        )


# -- refinement ---------------------------------------------------------------------


@dataclass
class Refinement:
    """Result of :func:`bisect`: the new mesh and its parent map."""

    mesh: SurfaceMesh
    parent: np.ndarray
    split: np.ndarray
    rounds: int


def bisect(mesh, marked, max_rounds=CLOSURE_ROUNDS, carry_geometry=True):
    """Refine ``marked`` triangles by longest-edge bisection with conforming closure.

    Each marked triangle has all three edges bisected (longest first), giving
    four children.  Any triangle with a bisected edge must also bisect its
    longest edge; this closure is iterated to a fixed point.  A triangle with
    a marked edge is split along its longest edge first, then each half is
    split again along whichever of its original edges is marked.  New
    vertices are edge midpoints projected onto the surface.

    Returns the new mesh; see :func:`bisect_with_map` for the parent map.
    """
    return bisect_with_map(mesh, marked, max_rounds, carry_geometry).mesh


def bisect_with_map(mesh, marked, max_rounds=CLOSURE_ROUNDS, carry_geometry=True):
    marked = np.asarray(marked)
    if marked.dtype == bool:
        marked = np.nonzero(marked)[0]
    marked = marked.astype(np.int64)
    nt = mesh.n_triangles
    if marked.size == 0:
        return Refinement(mesh, np.arange(nt), np.zeros(nt, dtype=bool), 0)

    ev, tri_edges, count = mesh.edges
    lloc = mesh.longest_edge_local()
    edge_marked = np.zeros(ev.shape[0], dtype=bool)
    edge_marked[tri_edges[marked].ravel()] = True
    rounds = kernels.mark_closure(tri_edges, lloc, edge_marked, max_rounds)
    if rounds < 0:
        raise NonTermination(f"conformity closure exceeded {max_rounds} rounds")

    # new vertices
    new_edges = np.nonzero(edge_marked)[0]
    nv = mesh.n_vertices
    mid_id = np.full(ev.shape[0], -1, dtype=np.int64)
    mid_id[new_edges] = nv + np.arange(new_edges.size)
    new_pos, new_par, new_bnd = _edge_midpoints(mesh, ev[new_edges], count[new_edges] == 1)
    vertices = np.concatenate([mesh.vertices, new_pos])
    params = None if mesh.params is None else np.concatenate([mesh.params, new_par])
    boundary = np.concatenate([mesh.boundary, new_bnd])

    # subdivide, rotating so the longest edge is opposite local vertex 0
    t = mesh.triangles
    r = np.arange(nt)
    a = t[r, lloc]
    b = t[r, (lloc + 1) % 3]
    c = t[r, (lloc + 2) % 3]
    e_bc = tri_edges[r, lloc]
    e_ca = tri_edges[r, (lloc + 1) % 3]
    e_ab = tri_edges[r, (lloc + 2) % 3]
    split = edge_marked[e_bc]
    ab = edge_marked[e_ab] & split
    ca = edge_marked[e_ca] & split
    m = mid_id[e_bc]
    n_ = mid_id[e_ab]
    l_ = mid_id[e_ca]

    cand = np.full((nt, 4, 3), -1, dtype=np.int64)
    valid = np.zeros((nt, 4), dtype=bool)
    gen = np.zeros((nt, 4), dtype=np.int64)
    g0 = mesh.generation

    keep = ~split
    cand[keep, 0] = t[keep]
    valid[keep, 0] = True
    gen[keep, 0] = g0[keep]

    s1 = split & ~ab
    cand[s1, 0] = np.stack([a[s1], b[s1], m[s1]], 1)
    valid[s1, 0] = True
    gen[s1, 0] = g0[s1] + 1
    s2 = split & ab
    cand[s2, 0] = np.stack([m[s2], a[s2], n_[s2]], 1)
    cand[s2, 1] = np.stack([m[s2], n_[s2], b[s2]], 1)
    valid[s2, 0:2] = True
    gen[s2, 0:2] = (g0[s2] + 2)[:, None]

    s3 = split & ~ca
    cand[s3, 2] = np.stack([a[s3], m[s3], c[s3]], 1)
    valid[s3, 2] = True
    gen[s3, 2] = g0[s3] + 1
    s4 = split & ca
    cand[s4, 2] = np.stack([m[s4], c[s4], l_[s4]], 1)
    cand[s4, 3] = np.stack([m[s4], l_[s4], a[s4]], 1)
    valid[s4, 2:4] = True
    gen[s4, 2:4] = (g0[s4] + 2)[:, None]

    triangles = cand[valid]
    parent = np.repeat(r[:, None], 4, axis=1)[valid]
    generation = gen[valid]
    new_mesh = SurfaceMesh(mesh.surface, vertices, triangles, params, boundary, generation)

    if carry_geometry and mesh._geometry is not None:
        old = mesh._geometry
        was_kept = ~split[parent]
        fresh = np.nonzero(~was_kept)[0]
        geo_new = compute_geometry(new_mesh, fresh)
        order = np.argsort(np.concatenate([np.nonzero(was_kept)[0], fresh]), kind="stable")
        merged = TriangleGeometry.concat([old.take(parent[was_kept]), geo_new]).take(order)
        new_mesh.with_geometry(merged)
    return Refinement(new_mesh, parent, split, rounds)


def _edge_midpoints(mesh, pairs, on_boundary):
    surf = mesh.surface
    v = mesh.vertices
    mid = 0.5 * (v[pairs[:, 0]] + v[pairs[:, 1]])
    params = None
    seed = None
    if mesh.params is not None:
        seed = 0.5 * (mesh.params[pairs[:, 0]] + mesh.params[pairs[:, 1]])
    pos = np.empty_like(mid)
    par = np.empty((mid.shape[0], 2)) if mesh.params is not None else None
    inner = ~on_boundary if not surf.closed else np.ones(mid.shape[0], dtype=bool)
    try:
        if inner.any():
            fr = surf.closest_point(mid[inner], seed=None if seed is None or isinstance(surf, Torus) else seed[inner])
            pos[inner] = fr.point
            if par is not None:
                par[inner] = fr.params
    except (NoConvergence, AmbiguousProjection) as exc:
        raise ProjectionFailed(str(exc)) from exc
    if not surf.closed and (~inner).any():
        # Boundary midpoints are placed on the boundary curve itself.
        uvb = surf.boundary_params(seed[~inner])
        pos[~inner] = surf.point(uvb)
        par[~inner] = uvb
    params = par
    return pos, params, on_boundary.copy() if not surf.closed else np.zeros(mid.shape[0], dtype=bool)


def refine_uniform(mesh, times=1):
    """Bisect every triangle ``times`` times over."""
    for _ in range(times):
        mesh = bisect(mesh, np.arange(mesh.n_triangles))
    return mesh


# -- initial meshes ------------------------------------------------------------------


def icosahedron(radius=1.0):
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    v = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    v = radius * v / np.linalg.norm(v, axis=1)[:, None]
    return v, _orient_outward(v, f)


def _orient_outward(v, f):
    n = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    flip = np.sum(n * v[f].mean(axis=1), axis=1) < 0
    f = f.copy()
    f[flip] = f[flip][:, [0, 2, 1]]
    return f


def disk_rings(n, radius=1.0):
    """Concentric-ring triangulation of a disk in parameter space.

    Ring ``i`` carries ``4 i`` equally spaced vertices; each quadrant is
    triangulated separately so radial edges lie on both coordinate axes.
    Returns ``(uv, triangles)`` with counter-clockwise triangles.
    """
    uv = [np.zeros((1, 2))]
    start = [0]
    count = 1
    for i in range(1, n + 1):
        ang = 2.0 * math.pi * np.arange(4 * i) / (4 * i)
        rad = radius if i == n else radius * i / n
        uv.append(rad * np.column_stack([np.cos(ang), np.sin(ang)]))
        start.append(count)
        count += 4 * i
    uv = np.concatenate(uv)

    def ring_index(i, j):
        if i == 0:
            return 0
        return start[i] + (j % (4 * i))

    tris = []
    for i in range(1, n + 1):
        for q in range(4):
            inner = [ring_index(i - 1, q * (i - 1) + k) for k in range(i)] if i > 1 else [0]
            outer = [ring_index(i, q * i + k) for k in range(i + 1)]
            a = b = 0
            na, nb = len(inner) - 1, len(outer) - 1
            while a < na or b < nb:
                adv_outer = a == na or (b < nb and (b + 1) / nb <= (a + 1) / na)
                if adv_outer:
                    tris.append((inner[a], outer[b], outer[b + 1]))
                    b += 1
                else:
                    tris.append((inner[a], outer[b], inner[a + 1]))
                    a += 1
    return uv, np.array(tris, dtype=np.int64)


def rect_grid(nx, ny, box):
    x0, x1, y0, y1 = box
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    uv = np.column_stack([xx.ravel(), yy.ravel()])
    idx = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    a = idx[:-1, :-1].ravel()
    b = idx[1:, :-1].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[:-1, 1:].ravel()
    tris = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    return uv, tris


def torus_grid(nu_, nv_):
    th = -math.pi + 2.0 * math.pi * np.arange(nu_) / nu_
    ph = -math.pi + 2.0 * math.pi * np.arange(nv_) / nv_
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    uv = np.column_stack([tt.ravel(), pp.ravel()])
    i, j = np.meshgrid(np.arange(nu_), np.arange(nv_), indexing="ij")
    i, j = i.ravel(), j.ravel()

    def k(ii, jj):
        return (ii % nu_) * nv_ + (jj % nv_)

    a, b, c, d = k(i, j), k(i + 1, j), k(i + 1, j + 1), k(i, j + 1)
    tris = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    return uv, tris


def build_initial_mesh(surface, target_h, c1=0.25, check=True):
    """Initial conforming mesh with ``max h_T <= target_h``.

    Sphere: bisection-refined icosahedron.  Torus: structured angle grid.
    Graphs: concentric rings on a disk, or a structured grid on a rectangle,
    mapped through the parameterisation.  With ``check`` the smallness
    condition ``h_T^2 kappa_T^2 <= c1`` is enforced.
    """
    if target_h <= 0:
        raise ValueError("target_h must be positive")
    if isinstance(surface, Sphere):
        v, f = icosahedron(surface.radius)
        mesh = SurfaceMesh(surface, v, f)
        while mesh.h > target_h:
            mesh = bisect(mesh, np.arange(mesh.n_triangles), carry_geometry=False)
    elif isinstance(surface, Torus):
        scale = 1.0
        while True:
            n_th = max(3, math.ceil(scale * 2 * math.pi * (surface.R + surface.r) / target_h))
            n_ph = max(3, math.ceil(scale * 2 * math.pi * surface.r / target_h))
            uv, f = torus_grid(n_th, n_ph)
            mesh = SurfaceMesh(surface, surface.point(uv), f, params=uv)
            if mesh.h <= target_h:
                break
            scale *= 1.15
    elif isinstance(surface, Graph):
        n = 1
        while True:
            if surface.domain[0] == "disk":
                uv, f = disk_rings(n, surface.domain[1])
            else:
                x0, x1, y0, y1 = surface.domain[1]
                nx = max(1, math.ceil(n * (x1 - x0) / max(x1 - x0, y1 - y0)))
                ny = max(1, math.ceil(n * (y1 - y0) / max(x1 - x0, y1 - y0)))
                uv, f = rect_grid(nx, ny, surface.domain[1])
            mesh = SurfaceMesh(surface, surface.point(uv), f, params=uv)
            if mesh.h <= target_h:
                break
            n = max(n + 1, int(n * mesh.h / target_h))
    elif isinstance(surface, ParametricSurface):
        raise TypeError(f"no initial mesh recipe for {type(surface).__name__}")
    else:
        raise TypeError(f"no initial mesh recipe for {type(surface).__name__}")
    if check:
        check_suff(mesh, c1)
    return mesh


# -- validation ------------------------------------------------------------------


def check_invariants(mesh, tol=1e-9):
    """Return a list of violated mesh invariants (empty when all hold)."""
    problems = []
    d = mesh.surface.closest_point(mesh.vertices).distance
    if np.abs(d).max() > tol:
        problems.append(f"vertex off surface by {np.abs(d).max():.3g}")
    ev, _, count = mesh.edges
    if mesh.surface.closed:
        if np.any(count != 2):
            problems.append("closed mesh has edges without exactly two triangles")
    elif np.any((count < 1) | (count > 2)):
        problems.append("edge with more than two triangles")
    else:
        bnd = ev[count == 1]
        if not np.all(mesh.boundary[bnd]):
            problems.append("hanging node: single-triangle edge in the interior")
        elif mesh.params is not None and isinstance(mesh.surface, Graph):
            uvb = mesh.params[bnd.ravel()]
            if not np.all(_on_domain_boundary(mesh.surface, uvb)):
                problems.append("boundary edge away from the domain boundary")
    t = mesh.triangles
    directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    keys = directed[:, 0] * mesh.n_vertices + directed[:, 1]
    if np.unique(keys).size != keys.size:
        problems.append("inconsistent orientation (repeated directed edge)")
    fr = mesh.lift(np.array([[1 / 3, 1 / 3, 1 / 3]]))
    if np.any(np.sum(mesh.flat_normals() * fr.normal, axis=1) <= 0):
        problems.append("flat normal points against the surface normal")
    return problems


def _on_domain_boundary(surface, uv, tol=1e-9):
    if surface.domain[0] == "disk":
        return np.abs(np.hypot(uv[:, 0], uv[:, 1]) - surface.domain[1]) <= tol
    x0, x1, y0, y1 = surface.domain[1]
    return (
        (np.abs(uv[:, 0] - x0) <= tol)
        | (np.abs(uv[:, 0] - x1) <= tol)
        | (np.abs(uv[:, 1] - y0) <= tol)
        | (np.abs(uv[:, 1] - y1) <= tol)
    )
