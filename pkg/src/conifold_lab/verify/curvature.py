"""Finite-difference extrinsic and intrinsic curvature.

Parametrisations are vectorised maps ``param(u)`` from (N, k) parameters to
(N, D) ambient coordinates.  Tangent directions ``X, Y`` are given by their
coefficients in the coordinate basis d/du_i.  Christoffel evaluators have the
signature ``gamma(point, A, B) -> Gamma(A, B)`` (contracted, vectorised).
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .. import geom
from ..errors import DegenerateError

Christoffel = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _metric_matrix(metric, base, dim):
    """Ambient metric matrices at base; ``metric`` is None (Euclidean), a
    callable returning (N, D, D), or a MetricHandle-like object with .matrix."""
    if metric is None:
        return np.broadcast_to(np.eye(dim), base.shape[:-1] + (dim, dim))
    if hasattr(metric, "matrix"):
        return metric.matrix(base, dim)
    return metric(base)


class IITensor:
    """Coordinate second fundamental form II_ij of a parametrised submanifold.

    ``ii`` has shape (N, k, k, D): the normal component of the ambient
    covariant derivative of d/du_j along d/du_i.
    """

    def __init__(self, param, u, metric=None, christoffel: Optional[Christoffel] = None,
                 tol: geom.Tolerances = geom.DEFAULT_TOL):
        u = np.atleast_2d(np.asarray(u, float))
        self.u = u
        self.base = param(u)
        Jac, H = geom.jacobian_fd(param, u, order=2, tol=tol)        # (N,D,k), (N,D,k,k)
        D, k = Jac.shape[-2:]
        self.T = np.swapaxes(Jac, -1, -2)                             # (N,k,D)
        acc = np.moveaxis(H, -3, -1)                                  # (N,k,k,D)
        if christoffel is not None:
            acc = acc + christoffel(self.base[:, None, None, :], self.T[:, :, None, :],
                                    self.T[:, None, :, :])
        self.G = _metric_matrix(metric, self.base, D)
        self.g = self.T @ self.G @ np.swapaxes(self.T, -1, -2)        # induced metric (N,k,k)
        if np.any(np.linalg.cond(self.g) > tol.max_condition):
            raise DegenerateError("tangent space is rank deficient at a sample")
        # normal projection: v - T^T g^-1 T G v
        TG = self.T @ self.G                                          # (N,k,D)
        coef = np.linalg.solve(self.g[:, None], (acc @ np.swapaxes(TG, -1, -2)[:, None])
                               .swapaxes(-1, -2)).swapaxes(-1, -2)    # (N,k,k,k)
        self.ii = acc - coef @ self.T[:, None]
        self.dim, self.codim = k, D - k

    def __call__(self, X, Y):
        """II(X, Y) for coefficient vectors X, Y of shape (k,) or (N, k)."""
        X = np.broadcast_to(np.asarray(X, float), (len(self.u), self.dim))
        Y = np.broadcast_to(np.asarray(Y, float), (len(self.u), self.dim))
        return np.einsum("ni,nj,nijd->nd", X, Y, self.ii)

    def ambient_inner(self, a, b):
        return np.einsum("...i,...ij,...j->...", a, self.G, b)

    def normal_basis(self):
        """Ambient-orthonormal basis of the normal space, (N, D-k, D)."""
        N, D = self.base.shape
        out = np.empty((N, self.codim, D))
        for n in range(N):
            L = np.linalg.cholesky(self.G[n])
            # work in coordinates where the ambient metric is Euclidean
            Tm = self.T[n] @ L
            q, _ = np.linalg.qr(Tm.T, mode="complete")
            out[n] = np.linalg.solve(L.T, q[:, self.dim:]).T
        return out

    def norm(self, directions: int = 720) -> np.ndarray:
        """Operator norm sup |II(X, Y)| over induced-unit X, Y at each sample.

        Equal to the sup over unit normals n of the spectral norm of <n, II>
        in an orthonormal tangent frame.  Codimension 1 is exact; codimension
        2 scans the unit circle of normals; higher codimension uses random
        normal directions.
        """
        Nb = self.normal_basis()                                      # (N,c,D)
        Lg = np.linalg.cholesky(self.g)
        Li = np.linalg.inv(Lg)                                        # rows: orthonormal frame coefficients
        B = np.einsum("ncd,nde,nije->ncij", Nb, self.G, self.ii)      # (N,c,k,k)
        B = Li[:, None] @ B @ np.swapaxes(Li, -1, -2)[:, None]
        if self.codim == 1:
            dirs = np.ones((1, 1))
        elif self.codim == 2:
            a = np.linspace(0.0, np.pi, directions, endpoint=False)
            dirs = np.stack([np.cos(a), np.sin(a)], axis=-1)
        else:
            rng = np.random.default_rng(0)
            dirs = rng.normal(size=(directions * 4, self.codim))
            dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        M = np.einsum("mc,ncij->nmij", dirs, B)
        return np.max(np.abs(np.linalg.eigvalsh(M)), axis=(-1, -2))


def second_fundamental_form(param, u, X, Y, metric=None, christoffel=None,
                            tol: geom.Tolerances = geom.DEFAULT_TOL) -> np.ndarray:
    """Normal component of the ambient covariant derivative, II(X, Y)."""
    return IITensor(param, u, metric, christoffel, tol)(X, Y)


def ii_norm(param, u, metric=None, christoffel=None, tol: geom.Tolerances = geom.DEFAULT_TOL):
    return IITensor(param, u, metric, christoffel, tol).norm()


def _plane_area2(g, X, Y):
    gxx = np.einsum("ni,nij,nj->n", X, g, X)
    gyy = np.einsum("ni,nij,nj->n", Y, g, Y)
    gxy = np.einsum("ni,nij,nj->n", X, g, Y)
    return gxx * gyy - gxy ** 2, (gxx, gyy, gxy)


def gauss_sectional(param, u, X, Y, metric=None, christoffel=None,
                    ambient_sectional: Optional[Callable] = None,
                    tol: geom.Tolerances = geom.DEFAULT_TOL) -> np.ndarray:
    """Sectional curvature of span(X, Y) from the Gauss equation.

    ``ambient_sectional(base, A, B)`` gives the ambient curvature numerator
    R(A, B, B, A) for ambient vectors; it defaults to zero (flat ambient).
    """
    ii = IITensor(param, u, metric, christoffel, tol)
    X = np.broadcast_to(np.asarray(X, float), (len(ii.u), ii.dim))
    Y = np.broadcast_to(np.asarray(Y, float), (len(ii.u), ii.dim))
    area2, (gxx, gyy, _) = _plane_area2(ii.g, X, Y)
    if np.any(area2 <= 1e-6 * gxx * gyy):
        raise DegenerateError("X and Y do not span a nondegenerate plane")
    num = ii.ambient_inner(ii(X, X), ii(Y, Y)) - ii.ambient_inner(ii(X, Y), ii(X, Y))
    if ambient_sectional is not None:
        A = np.einsum("ni,nid->nd", X, ii.T)
        B = np.einsum("ni,nid->nd", Y, ii.T)
        num = num + ambient_sectional(ii.base, A, B)
    return num / area2


# ------------------------------------------------------- intrinsic curvature


def christoffel_from_metric(metric_fn, u, h: float = 1e-3):
    """Christoffel symbols Gamma^l_ij (N, k, k, k) (index order l, i, j) of the
    metric ``metric_fn(u) -> (N, k, k)`` by central differences."""
    u = np.asarray(u, float)
    g = metric_fn(u)
    k = g.shape[-1]

    def flat(v):
        return metric_fn(v).reshape(v.shape[:-1] + (k * k,))

    dg = geom.jacobian_fd(flat, u, h=h).reshape(u.shape[:-1] + (k, k, k))   # [a,b,m] = d_m g_ab
    # first kind: Gamma_{l,ij} = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
    first = 0.5 * (np.einsum("...lji->...lij", dg) + dg - np.einsum("...ijl->...lij", dg))
    return np.einsum("...al,...lij->...aij", np.linalg.inv(g), first)


def riemann_from_metric(metric_fn, u, h: float = 1e-3):
    """Riemann tensor R^l_{ijk} (N, k, k, k, k) with
    R(d_i, d_j) d_k = R^l_{ijk} d_l, by nested central differences."""
    u = np.atleast_2d(np.asarray(u, float))
    Gam = christoffel_from_metric(metric_fn, u, h)
    k = Gam.shape[-1]

    def flat(v):
        return christoffel_from_metric(metric_fn, v, h).reshape(v.shape[:-1] + (k ** 3,))

    dG = geom.jacobian_fd(flat, u, h=h).reshape(u.shape[:-1] + (k, k, k, k))   # [l,a,b,m] = d_m Gamma^l_ab
    R = (np.einsum("nljki->nlijk", dG) - np.einsum("nlikj->nlijk", dG)
         + np.einsum("nlim,nmjk->nlijk", Gam, Gam) - np.einsum("nljm,nmik->nlijk", Gam, Gam))
    return R, metric_fn(u)


def intrinsic_sectional(metric_fn, u, X, Y, h: float = 1e-3) -> np.ndarray:
    """Sectional curvature g(R(X,Y)Y, X) / |X ^ Y|^2 from the metric alone."""
    R, g = riemann_from_metric(metric_fn, u, h)
    n = len(g)
    X = np.broadcast_to(np.asarray(X, float), (n, g.shape[-1]))
    Y = np.broadcast_to(np.asarray(Y, float), (n, g.shape[-1]))
    RXYY = np.einsum("nlijk,ni,nj,nk->nl", R, X, Y, Y)
    area2, _ = _plane_area2(g, X, Y)
    return np.einsum("nl,nlm,nm->n", RXYY, g, X) / area2


def induced_metric(param, metric=None, tol: geom.Tolerances = geom.DEFAULT_TOL):
    """u -> induced metric (N, k, k) of a parametrisation (FD tangents)."""

    def fn(u):
        u = np.atleast_2d(np.asarray(u, float))
        Jac = geom.jacobian_fd(param, u, tol=tol)
        G = _metric_matrix(metric, param(u), Jac.shape[-2])
        return np.swapaxes(Jac, -1, -2) @ G @ Jac

    return fn


# ------------------------------------------------------- covariant Hessian


def covariant_hessian(fmap, u, X, Y, gamma_source: Optional[Christoffel] = None,
                      gamma_target: Optional[Christoffel] = None,
                      tol: geom.Tolerances = geom.DEFAULT_TOL) -> np.ndarray:
    """d^2 F(X,Y) + Gamma~(dF X, dF Y) - dF(Gamma(X,Y)) at parameters u."""
    u = np.atleast_2d(np.asarray(u, float))
    X = np.broadcast_to(np.asarray(X, float), u.shape)
    Y = np.broadcast_to(np.asarray(Y, float), u.shape)
    Jac, H = geom.jacobian_fd(fmap, u, order=2, tol=tol)
    out = np.einsum("nmij,ni,nj->nm", H, X, Y)
    dX = np.einsum("nmi,ni->nm", Jac, X)
    dY = np.einsum("nmi,ni->nm", Jac, Y)
    if gamma_target is not None:
        out = out + gamma_target(fmap(u), dX, dY)
    if gamma_source is not None:
        out = out - np.einsum("nmi,ni->nm", Jac, gamma_source(u, X, Y))
    return out


def holomorphic_hessian(f, w, tol: geom.Tolerances = geom.DEFAULT_TOL) -> np.ndarray:
    """Complex Hessian d^2 f / dw_j dw_k of a holomorphic scalar function.

    For holomorphic f the complex derivative along w_j equals the real
    derivative along Re w_j, so the entries are read off the real-direction
    block of a real finite-difference Hessian.
    """
    w = np.asarray(w, complex)

    def real_f(v):
        val = f(geom.complex_view(v))
        return np.stack([val.real, val.imag], axis=-1)

    _, H = geom.jacobian_fd(real_f, geom.real_view(w), order=2, tol=tol)
    Hr = H[..., 0::2, 0::2]
    return Hr[..., 0, :, :] + 1j * Hr[..., 1, :, :]


def christoffel_contract(gamma_table: Callable):
    """Turn ``u -> Gamma^l_ij`` tables into a contracted evaluator."""

    def ev(point, A, B):
        G = gamma_table(point)
        return np.einsum("...lij,...i,...j->...l", G, A, B)

    return ev


# ------------------------------------------------------- Fubini-Study factor

FS_CURVATURE = 4.0   # Gaussian curvature of |dz|^2 / (1 + |z|^2)^2


def fs_metric_matrix(u):
    """Fubini-Study metric matrix in real coordinates (x, y) of the affine chart."""
    u = np.atleast_2d(np.asarray(u, float))
    c = 1.0 / (1.0 + u[..., 0] ** 2 + u[..., 1] ** 2) ** 2
    return c[..., None, None] * np.eye(2)


def fs_christoffel(point, A, B):
    """Contracted Christoffel symbols of the Fubini-Study metric on the chart
    (x, y) = (Re zeta, Im zeta).  The metric is e^{2f}(dx^2 + dy^2) with
    f = -log(1 + x^2 + y^2)."""
    x, y = point[..., 0], point[..., 1]
    s = 1.0 + x ** 2 + y ** 2
    fx, fy = -2.0 * x / s, -2.0 * y / s
    ax, ay, bx, by = A[..., 0], A[..., 1], B[..., 0], B[..., 1]
    gx = fx * (ax * bx - ay * by) + fy * (ax * by + ay * bx)
    gy = fy * (ay * by - ax * bx) + fx * (ax * by + ay * bx)
    return np.stack([gx, gy], axis=-1)


def resolved_christoffel(point, A, B):
    """Christoffel symbols of FS x flat on resolved coordinates (zeta, w) in R^10."""
    out = np.zeros(np.broadcast_shapes(np.shape(point), np.shape(A), np.shape(B)))
    out[..., :2] = fs_christoffel(point[..., :2], A[..., :2], B[..., :2])
    return out


def resolved_ambient_sectional(base, A, B):
    """R(A, B, B, A) of CP^1 x C^4 with the product metric: only the CP^1
    components contribute, with constant curvature FS_CURVATURE."""
    g = fs_metric_matrix(base[..., :2])[..., 0, 0]
    a, b = A[..., :2], B[..., :2]
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return FS_CURVATURE * (g * cross) ** 2


def product_sectional(base, A, B):
    """Sectional curvature of the plane span(A, B) in CP^1 x C^4."""
    from .handles import G_HAT
    num = resolved_ambient_sectional(base, A, B)
    area2 = G_HAT(base, A, A) * G_HAT(base, B, B) - G_HAT(base, A, B) ** 2
    return num / area2


# ------------------------------------------------------- curves in S^3


def curve_ii_norms(curve, t, tol: geom.Tolerances = geom.DEFAULT_TOL):
    """|II| of a curve in R^4 and of the same curve inside the unit S^3.

    For a curve the second fundamental form is the normal part of the
    acceleration of the arclength parametrisation.  Inside S^3 the
    Levi-Civita connection is the tangential projection onto T S^3, which
    removes the radial component.
    """
    t = np.asarray(t, float).reshape(-1, 1)
    Jac, H = geom.jacobian_fd(curve, t, order=2, tol=tol)
    v, a = Jac[..., 0], H[..., 0, 0]
    x = curve(t)
    s2 = np.sum(v * v, -1, keepdims=True)
    acc = (a - np.sum(a * v, -1, keepdims=True) / s2 * v) / s2
    in_sphere = acc - np.sum(acc * x, -1, keepdims=True) * x / np.sum(x * x, -1, keepdims=True)
    return np.linalg.norm(in_sphere, axis=-1), np.linalg.norm(acc, axis=-1)
