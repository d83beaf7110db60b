"""Transfer between the discrete surface and the smooth one.

All quantities live at quadrature nodes of flat triangles.  A node ``x`` on
``T`` lifts to ``a(x) = x - d(x) nu(x)``; the metric of the lift gives the
area ratio ``delta`` and the matrices ``Q`` and ``R`` map gradients across.
Gradients are row vectors: ``grad_Gamma eta^l (a(x)) = grad_h eta(x) R``.
In the formulas ``H`` is ``grad nu`` at the flat point, so ``grad a = P - dH``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriangle, NormalFlip, TubeViolation
from .geometry import shape_spectral_radius
from .quadrature import BARY, WEIGHTS

TUBE_LIMIT = 0.5
_CHUNK = 20_000
_I3 = np.eye(3)


@dataclass
class LiftedQuadrature:
    """Lifted quadrature data for a block of triangles ``idx``.

    Arrays have leading shape ``(n, q)`` for ``n`` triangles and ``q`` nodes.
    """

    idx: np.ndarray
    bary: np.ndarray
    weights: np.ndarray
    area: np.ndarray
    flat: np.ndarray
    point: np.ndarray
    normal: np.ndarray
    shape: np.ndarray
    distance: np.ndarray
    nu_h: np.ndarray
    delta: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def integrate(self, values):
        """``sum_T int_T values dA_h`` for node values of shape ``(n, q)``."""
        return float(np.sum(self.area * (values @ self.weights)))

    def integrate_lifted(self, values):
        """``sum_T int_{T^l} values dA`` via ``delta``."""
        return self.integrate(values * self.delta)


def hat_gradients(grad_X):
    """Tangential hat-function gradients per flat triangle, shape ``(n, 3, 3)``.

    Row ``k`` is the gradient of the hat function of local vertex ``k``.
    Raises :class:`DegenerateTriangle` if a metric tensor is singular.
    """
    E = np.asarray(grad_X)
    G = np.einsum("nki,nkj->nij", E, E)
    det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] ** 2
    scale = (G[:, 0, 0] * G[:, 1, 1]) + 1e-300
    if np.any(det <= 1e-14 * scale):
        bad = int(np.argmin(det / scale))
        raise DegenerateTriangle(f"triangle {bad} has a singular metric tensor")
    Ginv = np.empty_like(G)
    Ginv[:, 0, 0] = G[:, 1, 1] / det
    Ginv[:, 1, 1] = G[:, 0, 0] / det
    Ginv[:, 0, 1] = Ginv[:, 1, 0] = -G[:, 0, 1] / det
    g12 = np.einsum("nij,nkj->nik", Ginv, E)
    return np.concatenate([-(g12[:, 0] + g12[:, 1])[:, None], g12], axis=1)


def _node_quantities(E, nu_h, normal, shape, distance):
    """``G_X, G_Y, delta, Q, R`` for node arrays broadcast as ``(..., 3, 3)``.

    ``E`` is ``(..., 3, 2)``; the remaining arrays carry the node axis.
    ``shape`` is ``H`` at the lifted point; ``H`` at the flat point ``x`` is
    ``grad nu(x) = H(a) (I + d H(a))^{-1}`` since ``nu`` is constant along
    normal fibres.
    """
    Ha = shape
    dHa = distance[..., None, None] * Ha
    dH = dHa @ np.linalg.inv(_I3 + dHa)
    rho = shape_spectral_radius(dH)
    if np.any(rho > TUBE_LIMIT):
        raise TubeViolation(f"spectral radius of dH reaches {rho.max():.3g} > {TUBE_LIMIT}")
    c = np.sum(nu_h * normal, axis=-1)
    if np.any(c <= 0.0):
        raise NormalFlip("discrete and surface normals point in opposite half-spaces")
    P = _I3 - normal[..., :, None] * normal[..., None, :]
    Ph = _I3 - nu_h[..., :, None] * nu_h[..., None, :]
    GX = np.swapaxes(E, -1, -2) @ E
    dY = (P - dH) @ E
    GY = np.swapaxes(dY, -1, -2) @ dY
    detx = GX[..., 0, 0] * GX[..., 1, 1] - GX[..., 0, 1] ** 2
    if np.any(detx <= 0.0):
        raise DegenerateTriangle("singular metric tensor")
    dety = GY[..., 0, 0] * GY[..., 1, 1] - GY[..., 0, 1] ** 2
    delta = np.sqrt(dety / detx)
    IdH = _I3 - dH
    Q = IdH @ Ph
    a = nu_h - normal
    corr = _I3 + a[..., :, None] * a[..., None, :] / c[..., None, None]
    R = corr @ np.linalg.solve(IdH, P)
    return GX, GY, delta, Q, R


def lifted_quadrature(mesh, idx=None, bary=BARY, weights=WEIGHTS):
    """Lift the quadrature nodes of triangles ``idx`` (all by default)."""
    idx = np.arange(mesh.n_triangles) if idx is None else np.asarray(idx, dtype=np.int64)
    n, q = idx.size, bary.shape[0]
    fr = mesh.lift(bary, idx)
    E = mesh.edge_matrices(idx)
    nu_h = mesh.flat_normals(idx)
    normal = fr.normal.reshape(n, q, 3)
    shape = fr.shape.reshape(n, q, 3, 3)
    dist = fr.distance.reshape(n, q)
    _, _, delta, Q, R = _node_quantities(E[:, None], nu_h[:, None], normal, shape, dist)
    return LiftedQuadrature(
        idx=idx,
        bary=bary,
        weights=weights,
        area=mesh.areas(idx),
        flat=mesh.flat_points(bary, idx),
        point=fr.point.reshape(n, q, 3),
        normal=normal,
        shape=shape,
        distance=dist,
        nu_h=nu_h,
        delta=delta,
        Q=Q,
        R=R,
    )


def iter_lifted(mesh, chunk=_CHUNK, bary=BARY, weights=WEIGHTS):
    """Yield :class:`LiftedQuadrature` blocks covering the mesh in triangle order."""
    for s in range(0, mesh.n_triangles, chunk):
        yield lifted_quadrature(mesh, np.arange(s, min(s + chunk, mesh.n_triangles)), bary, weights)


# -- single-node queries ----------------------------------------------------------------


def _single(mesh, t, node):
    node = np.asarray(node, dtype=float)
    bary = np.array([[1.0 - node[0] - node[1], node[0], node[1]]])
    fr = mesh.lift(bary, np.array([t]))
    E = mesh.edge_matrices(np.array([t]))[0]
    nu_h = mesh.flat_normals(np.array([t]))[0]
    return _node_quantities(E, nu_h, fr.normal[0], fr.shape[0], fr.distance[0])


def metric_tensors(mesh, t, node):
    """``(G_X, G_Y)`` of triangle ``t`` at reference point ``node = (t1, t2)``."""
    GX, GY, *_ = _single(mesh, t, node)
    return GX, GY


def area_ratio(mesh, t, node):
    """``delta = sqrt(det(G_Y G_X^{-1}))`` at a reference point."""
    return float(_single(mesh, t, node)[2])


def lift_matrices(mesh, t, node):
    """``(Q, R)`` at a reference point of triangle ``t``."""
    _, _, _, Q, R = _single(mesh, t, node)
    return Q, R


# -- norms ------------------------------------------------------------------------


def _values(mesh, coeffs, lq):
    c = np.asarray(coeffs, dtype=float)[mesh.triangles[lq.idx]]
    return np.einsum("qk,nk->nq", lq.bary, c)


def _flat_grads(mesh, coeffs, idx):
    B = hat_gradients(mesh.edge_matrices(idx))
    c = np.asarray(coeffs, dtype=float)[mesh.triangles[idx]]
    return np.einsum("nk,nkd->nd", c, B)


def _lifted_grads(mesh, coeffs, lq):
    g = _flat_grads(mesh, coeffs, lq.idx)
    return np.einsum("nd,nqde->nqe", g, lq.R)


def _call(field, points):
    shp = points.shape[:-1]
    out = np.asarray(field(points.reshape(-1, 3)), dtype=float)
    return out.reshape(shp + out.shape[1:])


def lifted_l2_error(mesh, coeffs, exact, chunk=_CHUNK):
    """``||u - u_h^l||_{L2(Gamma)}`` by lifted quadrature."""
    total = 0.0
    for lq in iter_lifted(mesh, chunk):
        diff = _call(exact, lq.point) - _values(mesh, coeffs, lq)
        total += lq.integrate_lifted(diff**2)
    return float(np.sqrt(total))


def lifted_h1_error(mesh, coeffs, exact_grad, chunk=_CHUNK):
    """``||grad_Gamma (u - u_h^l)||_{L2(Gamma)}`` by lifted quadrature."""
    total = 0.0
    for lq in iter_lifted(mesh, chunk):
        diff = _call(exact_grad, lq.point) - _lifted_grads(mesh, coeffs, lq)
        total += lq.integrate_lifted(np.sum(diff**2, axis=-1))
    return float(np.sqrt(total))


def lifted_errors(mesh, coeffs, exact, exact_grad, chunk=_CHUNK):
    """Both lifted errors ``(L2, H1)`` from a single pass over the mesh."""
    l2 = h1 = 0.0
    for lq in iter_lifted(mesh, chunk):
        l2 += lq.integrate_lifted((_call(exact, lq.point) - _values(mesh, coeffs, lq)) ** 2)
        diff = _call(exact_grad, lq.point) - _lifted_grads(mesh, coeffs, lq)
        h1 += lq.integrate_lifted(np.sum(diff**2, axis=-1))
    return float(np.sqrt(l2)), float(np.sqrt(h1))


def flat_gradient_inner(mesh, v, z):
    """``int_{Gamma_h} grad_h v . grad_h z dA_h``."""
    idx = np.arange(mesh.n_triangles)
    gv = _flat_grads(mesh, v, idx)
    gz = _flat_grads(mesh, z, idx)
    return float(np.sum(mesh.areas() * np.sum(gv * gz, axis=1)))


def lifted_gradient_inner(mesh, v, z, chunk=_CHUNK):
    """``int_Gamma grad_Gamma v^l . grad_Gamma z^l dA`` by lifted quadrature."""
    total = 0.0
    for lq in iter_lifted(mesh, chunk):
        gv = _lifted_grads(mesh, v, lq)
        gz = _lifted_grads(mesh, z, lq)
        total += lq.integrate_lifted(np.sum(gv * gz, axis=-1))
    return total


def flat_gradient_norm(mesh, v):
    return float(np.sqrt(flat_gradient_inner(mesh, v, v)))


def lifted_gradient_norm(mesh, v):
    return float(np.sqrt(lifted_gradient_inner(mesh, v, v)))


def inconsistency_gap(mesh, v, z):
    """``|a_h(v, z) - a(v^l, z^l)|`` by the flat and lifted quadrature routes."""
    return abs(flat_gradient_inner(mesh, v, z) - lifted_gradient_inner(mesh, v, z))


def lifted_area(mesh, chunk=_CHUNK):
    """``|Gamma|`` as ``sum_T int_T delta dA_h``."""
    return sum(lq.integrate(lq.delta) for lq in iter_lifted(mesh, chunk))


def delta_deviation(mesh, chunk=_CHUNK):
    """``(max |delta - 1|, max |1/delta - 1|)`` over all quadrature nodes."""
    a = b = 0.0
    for lq in iter_lifted(mesh, chunk):
        a = max(a, float(np.abs(lq.delta - 1.0).max()))
        b = max(b, float(np.abs(1.0 / lq.delta - 1.0).max()))
    return a, b


def normal_deviation(mesh, chunk=_CHUNK):
    """``max |nu - nu_h|`` over all quadrature nodes."""
    out = 0.0
    for lq in iter_lifted(mesh, chunk):
        out = max(out, float(np.linalg.norm(lq.normal - lq.nu_h[:, None], axis=-1).max()))
    return out


def global_indicators(mesh):
    """``(Psi_h, Lambda_h) = (max kappa_T^2 h_T^2, max h_T^3 gamma_T kappa_T)``."""
    g = mesh.geometry()
    psi = float(np.max(g.kappa**2 * g.h**2))
    lam = float(np.max(g.h**3 * g.gamma * g.kappa))
    return psi, lam
