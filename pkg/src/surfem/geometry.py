"""Analytic surfaces and pointwise differential geometry.

Every query is vectorised over a leading axis: points are ``(n, 3)`` arrays
and shape operators ``(n, 3, 3)``.  A single point of shape ``(3,)`` is
accepted wherever a batch is, and the result is squeezed back.

Conventions
-----------
* ``nu`` is the unit normal chosen by the surface orientation; the signed
  distance is ``d = (x - a(x)) . nu`` so ``d > 0`` on the ``+nu`` side.
* ``H`` is the derivative of the Gauss map, a symmetric 3x3 matrix with
  ``H nu = 0``.  Off the surface ``H(x)`` means ``H(a(x))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousProjection, EmptyRegion, NoConvergence

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
_CHUNK = 200_000


@dataclass
class PointFrame:
    """Closest-point data for a batch of query points."""

    point: np.ndarray
    normal: np.ndarray
    shape: np.ndarray
    distance: np.ndarray
    params: np.ndarray | None = None

    def projector(self):
        """Tangential projector ``P = I - nu nu^T``."""
        return np.eye(3) - self.normal[..., :, None] * self.normal[..., None, :]


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    return np.atleast_2d(x), single


def _squeeze_frame(frame, single):
    if not single:
        return frame
    return PointFrame(
        frame.point[0],
        frame.normal[0],
        frame.shape[0],
        frame.distance[0],
        None if frame.params is None else frame.params[0],
    )


def spectral_radius(H):
    """Largest absolute eigenvalue of each symmetric 3x3 matrix in ``H``."""
    H = np.asarray(H, dtype=float)
    flat = H.reshape(-1, 3, 3)
    out = np.empty(flat.shape[0])
    for s in range(0, flat.shape[0], _CHUNK):
        ev = np.linalg.eigvalsh(flat[s : s + _CHUNK])
        out[s : s + _CHUNK] = np.abs(ev).max(axis=1)
    return out.reshape(H.shape[:-2])


def shape_spectral_radius(H):
    """Spectral radius of shape operators via their two tangent eigenvalues.

    With ``H nu = 0`` the spectrum is ``{0, k1, k2}``; ``k1 + k2`` is the
    trace and ``k1^2 + k2^2`` the squared Frobenius norm.
    """
    H = np.asarray(H, dtype=float)
    tr = np.trace(H, axis1=-2, axis2=-1)
    fro2 = np.sum(H * H, axis=(-2, -1))
    disc = np.sqrt(np.maximum(2.0 * fro2 - tr * tr, 0.0))
    return 0.5 * (np.abs(tr) + disc)


def _pinv_rows(Xu, Xv):
    """``G^{-1} J^T`` for ``J = [Xu, Xv]``, shape ``(n, 2, 3)``."""
    g11 = np.sum(Xu * Xu, 1)
    g12 = np.sum(Xu * Xv, 1)
    g22 = np.sum(Xv * Xv, 1)
    det = g11 * g22 - g12 * g12
    r1 = (g22[:, None] * Xu - g12[:, None] * Xv) / det[:, None]
    r2 = (-g12[:, None] * Xu + g11[:, None] * Xv) / det[:, None]
    return np.stack([r1, r2], axis=1)


def tangent_basis(nu):
    """Orthonormal tangent vectors ``(t1, t2)`` completing ``nu`` to a frame."""
    nu = np.atleast_2d(nu)
    helper = np.zeros_like(nu)
    use_x = np.abs(nu[:, 0]) < 0.9
    helper[use_x, 0] = 1.0
    helper[~use_x, 1] = 1.0
    t1 = helper - np.sum(helper * nu, axis=1)[:, None] * nu
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(nu, t1)
    return t1, t2


class Surface:
    """Base class for a smooth closed or bounded surface in R^3.

    Subclasses provide :meth:`closest_point`; the remaining queries are
    derived from it.
    """

    closed = True
    diameter = 1.0
    name = "surface"

    @property
    def boundary(self):
        return "closed" if self.closed else "with boundary"

    # -- core queries -------------------------------------------------------
    def closest_point(self, x, seed=None) -> PointFrame:
        raise NotImplementedError

    def params(self, p):
        """Parameter coordinates of on-surface points, or ``None``."""
        return None

    def normal(self, p):
        return self.closest_point(p).normal

    def shape_operator(self, p):
        return self.closest_point(p).shape

    def signed_distance(self, x):
        return self.closest_point(x).distance

    def in_region1(self, p):
        """Membership of on-surface points in the high-curvature region."""
        p, single = _as_batch(p)
        out = np.zeros(p.shape[0], dtype=bool)
        return out[0] if single else out

    @property
    def has_region_split(self):
        return False

    # -- derivatives of H ----------------------------------------------------
    def default_fd_step(self):
        return 1e-5 * self.diameter

    def shape_gradient_norms(self, p, h_fd=None):
        """Norms ``|grad_Gamma H_ij|`` at on-surface points, shape ``(n, 3, 3)``.

        Central differences of ``H`` along an orthonormal tangent basis.
        """
        p, single = _as_batch(p)
        h = self.default_fd_step() if h_fd is None else h_fd
        frame = self.closest_point(p)
        t1, t2 = tangent_basis(frame.normal)
        seed = frame.params
        sq = np.zeros((p.shape[0], 3, 3))
        for t in (t1, t2):
            hp = self.closest_point(p + h * t, seed=seed).shape
            hm = self.closest_point(p - h * t, seed=seed).shape
            sq += ((hp - hm) / (2.0 * h)) ** 2
        out = np.sqrt(sq)
        return out[0] if single else out


class Sphere(Surface):
    """Sphere of radius ``radius`` centred at the origin, outward normal.

    ``cap`` optionally defines the high-curvature region as the polar cap
    ``z >= cap * radius``.
    """

    closed = True
    name = "sphere"

    def __init__(self, radius=1.0, cap=None):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.cap = cap
        self.diameter = 2.0 * self.radius

    def closest_point(self, x, seed=None):
        x, single = _as_batch(x)
        nrm = np.linalg.norm(x, axis=1)
        if np.any(nrm == 0.0):
            raise AmbiguousProjection("the centre of a sphere has no unique closest point")
        nu = x / nrm[:, None]
        a = self.radius * nu
        H = (np.eye(3) - nu[:, :, None] * nu[:, None, :]) / self.radius
        return _squeeze_frame(PointFrame(a, nu, H, nrm - self.radius), single)

    def in_region1(self, p):
        p, single = _as_batch(p)
        if self.cap is None:
            out = np.zeros(p.shape[0], dtype=bool)
        else:
            out = p[:, 2] >= self.cap * self.radius
        return out[0] if single else out

    @property
    def has_region_split(self):
        return self.cap is not None


class ParametricSurface(Surface):
    """Surface given by an immersion ``X(u, v)``.

    Subclasses implement :meth:`evaluate` returning ``X`` together with its
    first and second parameter derivatives, and :meth:`params`.
    """

    def evaluate(self, uv):
        """Return ``(X, Xu, Xv, Xuu, Xuv, Xvv)``, each of shape ``(n, 3)``."""
        raise NotImplementedError

    def param_seed(self, x):
        """Starting parameters for projecting arbitrary points ``x``."""
        raise NotImplementedError

    def param_bounds(self):
        """Bounding box ``(u0, u1, v0, v1)`` searched by the grid fallback."""
        raise NotImplementedError

    # -- pointwise geometry from parameters ------------------------------------
    def point(self, uv):
        return self.evaluate(np.atleast_2d(uv))[0]

    def frame_at(self, uv):
        """Normal and shape operator at parameters ``uv`` (on the surface)."""
        uv = np.atleast_2d(np.asarray(uv, dtype=float))
        X, Xu, Xv, Xuu, Xuv, Xvv = self.evaluate(uv)
        nu, H = _normal_and_shape(Xu, Xv, Xuu, Xuv, Xvv)
        return X, nu, H

    def normal(self, p):
        p, single = _as_batch(p)
        _, nu, _ = self.frame_at(self.params(p))
        return nu[0] if single else nu

    def shape_operator(self, p):
        p, single = _as_batch(p)
        _, _, H = self.frame_at(self.params(p))
        return H[0] if single else H

    def shape_gradient_norms(self, p, h_fd=None):
        # Stepping in parameter space along the preimage of a tangent
        # direction agrees with the ambient central difference to O(h^2).
        p, single = _as_batch(p)
        h = self.default_fd_step() if h_fd is None else h_fd
        uv = self.params(p)
        _, Xu, Xv, _, _, _ = self.evaluate(uv)
        pinv = _pinv_rows(Xu, Xv)
        nu = np.cross(Xu, Xv)
        nu /= np.linalg.norm(nu, axis=1)[:, None]
        t1, t2 = tangent_basis(nu)
        sq = np.zeros((p.shape[0], 3, 3))
        for t in (t1, t2):
            du = np.einsum("nij,nj->ni", pinv, t)
            _, _, hp = self.frame_at(uv + h * du)
            _, _, hm = self.frame_at(uv - h * du)
            sq += ((hp - hm) / (2.0 * h)) ** 2
        out = np.sqrt(sq)
        return out[0] if single else out

    # -- closest point ---------------------------------------------------------
    def closest_point(self, x, seed=None):
        x, single = _as_batch(x)
        uv0 = self.param_seed(x) if seed is None else np.array(np.atleast_2d(seed), dtype=float)
        uv, ok = self._newton(x, uv0)
        bad = np.nonzero(~ok)[0]
        for i in bad:
            uv[i] = self._grid_fallback(x[i])
        X, Xu, Xv, Xuu, Xuv, Xvv = self.evaluate(uv)
        nu, H = _normal_and_shape(Xu, Xv, Xuu, Xuv, Xvv)
        d = np.sum((x - X) * nu, axis=1)
        return _squeeze_frame(PointFrame(X, nu, H, d, uv), single)

    def _newton(self, x, uv0, max_iter=NEWTON_MAX_ITER, tol=NEWTON_TOL):
        """Damped Newton on the first-order conditions of ``|X(u,v) - x|^2``."""
        uv = uv0.copy()
        n = x.shape[0]
        ok = np.zeros(n, dtype=bool)
        active = np.arange(n)
        for _ in range(max_iter + 1):
            if active.size == 0:
                break
            xa = x[active]
            X, Xu, Xv, Xuu, Xuv, Xvv = self.evaluate(uv[active])
            r = X - xa
            g = np.stack([np.sum(r * Xu, 1), np.sum(r * Xv, 1)], axis=1)
            gnorm = np.linalg.norm(g, axis=1)
            conv = gnorm <= tol
            ok[active[conv]] = True
            keep = ~conv
            if not np.any(keep):
                break
            active = active[keep]
            r, g, Xu, Xv = r[keep], g[keep], Xu[keep], Xv[keep]
            Xuu, Xuv, Xvv, xa = Xuu[keep], Xuv[keep], Xvv[keep], xa[keep]
            a11 = np.sum(Xu * Xu, 1)
            a12 = np.sum(Xu * Xv, 1)
            a22 = np.sum(Xv * Xv, 1)
            b11 = a11 + np.sum(r * Xuu, 1)
            b12 = a12 + np.sum(r * Xuv, 1)
            b22 = a22 + np.sum(r * Xvv, 1)
            det = b11 * b22 - b12 * b12
            # Gauss-Newton where the full Hessian is not positive definite.
            gn = (det <= 1e-14 * (a11 * a22)) | (b11 <= 0)
            b11 = np.where(gn, a11, b11)
            b12 = np.where(gn, a12, b12)
            b22 = np.where(gn, a22, b22)
            det = b11 * b22 - b12 * b12
            step = -np.stack([b22 * g[:, 0] - b12 * g[:, 1], -b12 * g[:, 0] + b11 * g[:, 1]], 1) / det[:, None]
            f0 = 0.5 * np.sum(r * r, 1)
            uva = uv[active]
            lam = np.ones(active.size)
            pending = np.arange(active.size)
            # slack for rounding in |X - x|^2 near convergence
            slack = 4e-16 * np.sqrt(2.0 * f0) * (np.linalg.norm(xa, axis=1) + 1.0) + 1e-300
            for _ in range(40):
                trial = uva[pending] + lam[pending, None] * step[pending]
                ft = 0.5 * np.sum((self.evaluate(trial)[0] - xa[pending]) ** 2, 1)
                good = ft <= f0[pending] * (1.0 + 1e-13) + slack[pending]
                uv[active[pending[good]]] = trial[good]
                pending = pending[~good]
                if pending.size == 0:
                    break
                lam[pending] *= 0.5
            tiny = np.linalg.norm(step, axis=1) <= 1e-13 * (1.0 + np.linalg.norm(uva, axis=1))
            stalled = tiny & (gnorm[keep] <= 1e-9)
            ok[active[stalled]] = True
            active = active[~stalled]
        return uv, ok

    def _grid_fallback(self, x, n=64):
        u0, u1, v0, v1 = self.param_bounds()
        uu, vv = np.meshgrid(np.linspace(u0, u1, n), np.linspace(v0, v1, n), indexing="ij")
        grid = np.stack([uu.ravel(), vv.ravel()], 1)
        F = np.sum((self.evaluate(grid)[0] - x) ** 2, 1).reshape(n, n)
        pad = np.pad(F, 1, constant_values=np.inf)
        is_min = np.ones_like(F, dtype=bool)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di or dj:
                    is_min &= F <= pad[1 + di : n + 1 + di, 1 + dj : n + 1 + dj]
        cand = np.argsort(np.where(is_min, F, np.inf).ravel())[:2]
        cand = [c for c in cand if np.isfinite(F.ravel()[c])]
        results = []
        for c in cand:
            uv, ok = self._newton(x[None, :], grid[c][None, :], max_iter=4 * NEWTON_MAX_ITER)
            if ok[0]:
                results.append((float(np.sum((self.evaluate(uv)[0][0] - x) ** 2)), uv[0]))
        if not results:
            raise NoConvergence(f"closest point iteration failed for x={x.tolist()}")
        results.sort(key=lambda item: item[0])
        if len(results) == 2:
            (fa, ua), (fb, ub) = results
            apart = np.linalg.norm(self.evaluate(ua[None])[0] - self.evaluate(ub[None])[0]) > 1e-8
            if apart and abs(fa - fb) <= 1e-10 * max(fa, 1e-300):
                raise AmbiguousProjection(f"two equally close surface points for x={x.tolist()}")
        return results[0][1]


def _normal_and_shape(Xu, Xv, Xuu, Xuv, Xvv):
    """Unit normal and Weingarten map ``H = [nu_u, nu_v] G^{-1} J^T``."""
    n = np.cross(Xu, Xv)
    nn = np.linalg.norm(n, axis=1)
    nu = n / nn[:, None]
    nu_derivs = []
    for dn in (np.cross(Xuu, Xv) + np.cross(Xu, Xuv), np.cross(Xuv, Xv) + np.cross(Xu, Xvv)):
        nu_derivs.append((dn - np.sum(nu * dn, 1)[:, None] * nu) / nn[:, None])
    pinv = _pinv_rows(Xu, Xv)
    H = nu_derivs[0][:, :, None] * pinv[:, 0, None, :] + nu_derivs[1][:, :, None] * pinv[:, 1, None, :]
    H = 0.5 * (H + np.transpose(H, (0, 2, 1)))
    return nu, H


class Torus(ParametricSurface):
    """Ring torus with major radius ``R`` and minor radius ``r``."""

    closed = True
    name = "torus"

    def __init__(self, R=1.0, r=0.4):
        if not 0 < r < R:
            raise ValueError("need 0 < r < R")
        self.R = float(R)
        self.r = float(r)
        self.diameter = 2.0 * (self.R + self.r)

    def evaluate(self, uv):
        th, ph = uv[:, 0], uv[:, 1]
        ct, st, cp, sp = np.cos(th), np.sin(th), np.cos(ph), np.sin(ph)
        R, r = self.R, self.r
        w = R + r * cp
        X = np.stack([w * ct, w * st, r * sp], 1)
        Xu = np.stack([-w * st, w * ct, 0 * th], 1)
        Xv = np.stack([-r * sp * ct, -r * sp * st, r * cp], 1)
        Xuu = np.stack([-w * ct, -w * st, 0 * th], 1)
        Xuv = np.stack([r * sp * st, -r * sp * ct, 0 * th], 1)
        Xvv = np.stack([-r * cp * ct, -r * cp * st, -r * sp], 1)
        return X, Xu, Xv, Xuu, Xuv, Xvv

    def params(self, p):
        p, single = _as_batch(p)
        th = np.arctan2(p[:, 1], p[:, 0])
        rho = np.hypot(p[:, 0], p[:, 1])
        ph = np.arctan2(p[:, 2], rho - self.R)
        uv = np.stack([th, ph], 1)
        return uv[0] if single else uv

    def param_seed(self, x):
        return self.params(x)

    def param_bounds(self):
        return (-math.pi, math.pi, -math.pi, math.pi)

    def closest_point(self, x, seed=None):
        x, single = _as_batch(x)
        rho = np.hypot(x[:, 0], x[:, 1])
        if np.any(rho == 0.0) or np.any((rho == self.R) & (x[:, 2] == 0.0)):
            raise AmbiguousProjection("point on the torus axis or core circle")
        uv = self.params(x)
        X, Xu, Xv, Xuu, Xuv, Xvv = self.evaluate(uv)
        nu, H = _normal_and_shape(Xu, Xv, Xuu, Xuv, Xvv)
        d = np.hypot(rho - self.R, x[:, 2]) - self.r
        return _squeeze_frame(PointFrame(X, nu, H, d, uv), single)


class Graph(ParametricSurface):
    """Graph ``z = g(x, y)`` over a disk or a rectangle.

    Parameters
    ----------
    height : callable
        ``height(x, y)`` returning ``(g, gx, gy, gxx, gxy, gyy)`` arrays.
    domain : tuple
        ``("disk", radius)`` or ``("rect", (x0, x1, y0, y1))``.
    """

    closed = False
    name = "graph"

    def __init__(self, height, domain=("disk", 1.0), region1=None):
        self._height = height
        kind = domain[0]
        if kind not in ("disk", "rect"):
            raise ValueError(f"unknown parameter domain {kind!r}")
        self.domain = domain
        self._region1 = region1
        if kind == "disk":
            self.diameter = 2.0 * domain[1]
        else:
            x0, x1, y0, y1 = domain[1]
            self.diameter = math.hypot(x1 - x0, y1 - y0)

    def height(self, x, y):
        return self._height(x, y)

    def evaluate(self, uv):
        x, y = uv[:, 0], uv[:, 1]
        g, gx, gy, gxx, gxy, gyy = self.height(x, y)
        z = np.zeros_like(x)
        o = np.ones_like(x)
        X = np.stack([x, y, g], 1)
        Xu = np.stack([o, z, gx], 1)
        Xv = np.stack([z, o, gy], 1)
        Xuu = np.stack([z, z, gxx], 1)
        Xuv = np.stack([z, z, gxy], 1)
        Xvv = np.stack([z, z, gyy], 1)
        return X, Xu, Xv, Xuu, Xuv, Xvv

    def params(self, p):
        p = np.asarray(p, dtype=float)
        return p[..., :2].copy()

    def param_seed(self, x):
        return x[:, :2].copy()

    def param_bounds(self):
        if self.domain[0] == "disk":
            s = 1.1 * self.domain[1]
            return (-s, s, -s, s)
        x0, x1, y0, y1 = self.domain[1]
        mx, my = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
        return (x0 - mx, x1 + mx, y0 - my, y1 + my)

    def in_domain(self, uv, tol=0.0):
        uv = np.atleast_2d(uv)
        if self.domain[0] == "disk":
            return np.hypot(uv[:, 0], uv[:, 1]) <= self.domain[1] + tol
        x0, x1, y0, y1 = self.domain[1]
        return (uv[:, 0] >= x0 - tol) & (uv[:, 0] <= x1 + tol) & (uv[:, 1] >= y0 - tol) & (uv[:, 1] <= y1 + tol)

    def boundary_params(self, uv):
        """Snap parameters of a boundary-edge midpoint onto the domain boundary."""
        uv = np.atleast_2d(np.asarray(uv, dtype=float))
        if self.domain[0] == "disk":
            return uv * (self.domain[1] / np.hypot(uv[:, 0], uv[:, 1]))[:, None]
        return uv.copy()

    def in_region1(self, p):
        p, single = _as_batch(p)
        if self._region1 is None:
            out = np.zeros(p.shape[0], dtype=bool)
        else:
            out = np.asarray(self._region1(p[:, :2]), dtype=bool)
        return out[0] if single else out

    @property
    def has_region_split(self):
        return self._region1 is not None


def _flat(x, y):
    z = np.zeros_like(np.asarray(x, dtype=float))
    return z, z, z, z, z, z


class Plane(Graph):
    """The plane ``z = 0`` over a disk or rectangle."""

    name = "plane"

    def __init__(self, domain=("rect", (0.0, 1.0, 0.0, 1.0)), region1=None):
        super().__init__(_flat, domain, region1)


class RidgeSurface(Graph):
    """``z = 1 - sqrt(x^2 + 0.05 y^2 + 2.5e-5)`` over the unit disk.

    The high-curvature region is the ellipse ``(x/0.05)^2 + (y/0.5)^2 <= 1``.
    """

    name = "ridge"
    A = 5e-2
    C = 2.5e-5
    ELLIPSE = (0.05, 0.5)

    def __init__(self):
        super().__init__(self._ridge_height, ("disk", 1.0), self.in_ellipse)

    @classmethod
    def _ridge_height(cls, x, y):
        a, c = cls.A, cls.C
        s2 = x * x + a * y * y + c
        s = np.sqrt(s2)
        s3 = s2 * s
        g = 1.0 - s
        gx = -x / s
        gy = -a * y / s
        gxx = -(a * y * y + c) / s3
        gyy = -a * (x * x + c) / s3
        gxy = a * x * y / s3
        return g, gx, gy, gxx, gxy, gyy

    @classmethod
    def in_ellipse(cls, uv):
        uv = np.atleast_2d(uv)
        ex, ey = cls.ELLIPSE
        return (uv[:, 0] / ex) ** 2 + (uv[:, 1] / ey) ** 2 <= 1.0


# -- region sampling and global curvature quantities -------------------------


def curvature_kappa(surface, points):
    """Maximum spectral radius of ``H`` over on-surface sample points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise EmptyRegion("no sample points")
    best = 0.0
    for s in range(0, points.shape[0], _CHUNK):
        best = max(best, float(shape_spectral_radius(surface.shape_operator(points[s : s + _CHUNK])).max()))
    return best


def shape_gradient_gamma(surface, points, h_fd=None):
    """Maximum over samples and entries of ``|grad_Gamma H_ij|``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise EmptyRegion("no sample points")
    best = 0.0
    for s in range(0, points.shape[0], _CHUNK):
        best = max(best, float(surface.shape_gradient_norms(points[s : s + _CHUNK], h_fd).max()))
    return best


def region_samples(surface, region, n=2048):
    """Dense on-surface samples of one curvature region of a graph surface.

    ``region`` is ``1`` (the high-curvature set) or ``2`` (its complement in
    the parameter domain).  Region 1 is gridded over its own bounding box so
    thin regions are resolved; region 2 over the domain's bounding box.
    """
    if not isinstance(surface, Graph):
        raise TypeError("region sampling needs a graph surface")
    if surface.domain[0] == "disk":
        rad = surface.domain[1]
        box = (-rad, rad, -rad, rad)
    else:
        box = surface.domain[1]
    if region == 1 and isinstance(surface, RidgeSurface):
        ex, ey = surface.ELLIPSE
        box = (-ex, ex, -ey, ey)
    xs = np.linspace(box[0], box[1], n)
    ys = np.linspace(box[2], box[3], n)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    uv = np.stack([xx.ravel(), yy.ravel()], 1)
    uv = uv[surface.in_domain(uv)]
    inside = surface.in_region1(np.column_stack([uv, np.zeros(len(uv))]))
    uv = uv[inside] if region == 1 else uv[~inside]
    if uv.size == 0:
        raise EmptyRegion(f"region {region} has no samples")
    return surface.point(uv)


def rhs_bump(p):
    """The compactly supported bump load centred at ``(0.2, 0)``.

    ``50 exp(1 / ((x - 0.2)^2 + y^2 - 0.2))`` inside the disk of radius
    ``sqrt(0.2)``, zero outside; exponents below -700 are clamped to zero.
    """
    p, single = _as_batch(p)
    s = (p[:, 0] - 0.2) ** 2 + p[:, 1] ** 2 - 0.2
    out = np.zeros(p.shape[0])
    inside = s < 0.0
    arg = np.full(p.shape[0], -np.inf)
    arg[inside] = 1.0 / s[inside]
    live = inside & (arg >= -700.0)
    out[live] = 50.0 * np.exp(arg[live])
    return out[0] if single else out
