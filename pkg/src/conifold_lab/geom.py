"""Linear algebra, forms, metrics and coordinates on R^4 x R^4 = C^4.

Conventions used throughout the package:

* A phase point is ``(x, p)`` with ``x, p`` in R^4; tangent vectors are
  8-vectors ``(dx, dp)``.
* ``z = x + i p``.  The w-coordinates are
  ``w1 = z1 + i z2, w2 = -z3 + i z4, w3 = z3 + i z4, w4 = z1 - i z2``
  (sqrt(2) times a unitary map), so ``|w|^2 = 2 |z|^2`` and
  ``sum z_j^2 = w1 w4 - w2 w3``.
* ``omega = sum dx_j ^ dp_j`` and ``g_st`` is the Euclidean metric on (x, p).
  In w-coordinates ``g_st(a, b) = Re<a, b>/2`` and ``omega(a, b) = -Im<a, b>/2``
  with ``<a, b> = sum a_j conj(b_j)``.
* ``g_FS = |dz|^2 / (1 + |z|^2)^2`` in an affine chart (Gaussian curvature 4).

Vectorised functions accept arrays with arbitrary leading dimensions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import UsageError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Tolerances:
    """Single record of numerical tolerances and finite-difference settings."""

    identity: float = 1e-12
    first_derivative: float = 1e-8
    curvature: float = 1e-5
    fd_step: float = 1e-5
    # second differences divide by h^2; a larger step balances round-off
    fd_step_second: float = 2e-4
    richardson: bool = False
    # condition number above which a tangent basis counts as degenerate
    max_condition: float = 1e8

    def replace(self, **changes) -> "Tolerances":
        data = {**self.__dict__, **changes}
        return Tolerances(**data)


DEFAULT_TOL = Tolerances()


def wrap_angle(theta):
    """Map angles onto [0, 2 pi)."""
    out = np.mod(theta, TWO_PI)
    # np.mod can return 2 pi for tiny negative inputs
    return np.where(out >= TWO_PI, 0.0, out)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class PhasePoint:
    """A point (x, p) of R^4 x R^4."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = _frozen(self.x)
        p = _frozen(self.p)
        if x.shape != (4,) or p.shape != (4,):
            raise UsageError("PhasePoint needs two 4-vectors")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise UsageError("PhasePoint components must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def xp(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])

    def on_cotangent_sphere(self, tol: float = 1e-10) -> bool:
        """|x| = 1 and x.p = 0."""
        return abs(np.linalg.norm(self.x) - 1.0) <= tol and abs(self.x @ self.p) <= tol

    def on_conifold(self, tol: float = 1e-10) -> bool:
        """|x| = |p| and x.p = 0."""
        return (abs(np.linalg.norm(self.x) - np.linalg.norm(self.p)) <= tol
                and abs(self.x @ self.p) <= tol)

    def on_deformed(self, a: float, tol: float = 1e-9) -> bool:
        """|x|^2 - |p|^2 = a^2 and x.p = 0."""
        return (abs(self.x @ self.x - self.p @ self.p - a * a) <= tol
                and abs(self.x @ self.p) <= tol)

    def z(self) -> "ComplexVec4":
        return ComplexVec4(self.x + 1j * self.p, "z")


@dataclass(frozen=True)
class ComplexVec4:
    """Four complex numbers tagged with their coordinate system ('z' or 'w')."""

    values: np.ndarray
    system: Literal["z", "w"]

    def __post_init__(self):
        vals = _frozen(self.values, complex)
        if vals.shape != (4,):
            raise UsageError("ComplexVec4 needs four components")
        if self.system not in ("z", "w"):
            raise UsageError(f"unknown coordinate system {self.system!r}")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class TangentVec:
    """A tangent vector (dx, dp) attached to a base point."""

    base: object
    direction: np.ndarray

    def __post_init__(self):
        d = _frozen(self.direction)
        if d.shape != (8,):
            raise UsageError("TangentVec direction must have 8 real components")
        object.__setattr__(self, "direction", d)


def _canonical_pair(u, v, tiny: float = 1e-300):
    u = np.asarray(u, complex)
    v = np.asarray(v, complex)
    norm = np.sqrt(np.abs(u) ** 2 + np.abs(v) ** 2)
    u = u / norm
    v = v / norm
    lead = np.where(np.abs(u) > tiny, u, v)
    phase = np.conj(lead) / np.abs(lead)
    return u * phase, v * phase


@dataclass(frozen=True)
class ProjPoint:
    """A point [u:v] of CP^1, stored with |u|^2 + |v|^2 = 1 and the first
    nonzero entry real positive."""

    u: complex
    v: complex

    def __post_init__(self):
        if abs(self.u) == 0 and abs(self.v) == 0:
            raise UsageError("[0:0] is not a point of CP^1")
        u, v = _canonical_pair(self.u, self.v)
        object.__setattr__(self, "u", complex(u))
        object.__setattr__(self, "v", complex(v))

    def affine(self) -> complex:
        """u/v (infinite at [1:0])."""
        return self.u / self.v if self.v != 0 else complex(np.inf)

    def isclose(self, other: "ProjPoint", tol: float = 1e-12) -> bool:
        # |u v' - v u'| is the sine of the FS angle between the lines
        return abs(self.u * other.v - self.v * other.u) <= tol


# ------------------------------------------------------ forms and metrics


def _split(v):
    v = np.asarray(v, float)
    return v[..., :4], v[..., 4:]


def omega(a, b):
    """sum_j dx_j(a) dp_j(b) - dx_j(b) dp_j(a) on 8-vectors."""
    ax, ap = _split(a)
    bx, bp = _split(b)
    return np.sum(ax * bp - bx * ap, axis=-1)


def liouville(p, dx):
    """lambda = -sum p_j dx_j."""
    return -np.sum(np.asarray(p) * np.asarray(dx), axis=-1)


def g_st(a, b):
    return np.sum(np.asarray(a, float) * np.asarray(b, float), axis=-1)


def _check_same_base(u: TangentVec, v: TangentVec):
    bu, bv = u.base, v.base
    if bu is bv:
        return
    if isinstance(bu, PhasePoint) and isinstance(bv, PhasePoint):
        if np.array_equal(bu.x, bv.x) and np.array_equal(bu.p, bv.p):
            return
    elif bu == bv:
        return
    raise UsageError("tangent vectors are attached to different base points")


def omega_eval(u: TangentVec, v: TangentVec) -> float:
    _check_same_base(u, v)
    return float(omega(u.direction, v.direction))


def liouville_eval(v: TangentVec) -> float:
    return float(liouville(v.base.p, v.direction[:4]))


def omega_w(a, b):
    """omega evaluated on tangent vectors given in w-coordinates."""
    return -0.5 * np.imag(np.sum(np.asarray(a) * np.conj(b), axis=-1))


def g_st_w(a, b):
    """g_st evaluated on tangent vectors given in w-coordinates."""
    return 0.5 * np.real(np.sum(np.asarray(a) * np.conj(b), axis=-1))


def fubini_study(z, u, v):
    """g_FS at affine coordinate z on tangent directions u, v (complex numbers)."""
    z = np.asarray(z, complex)
    return np.real(np.asarray(u) * np.conj(v)) / (1.0 + np.abs(z) ** 2) ** 2


def fubini_study_eval(z_affine: complex, u: complex, v: complex) -> float:
    return float(fubini_study(z_affine, u, v))


def fubini_study_form(z, u, v):
    """The Kaehler form omega_FS(u, v) = g_FS(i u, v)."""
    return fubini_study(z, 1j * np.asarray(u), v)


# ------------------------------------------------------------ coordinates


def pack_z(x, p):
    return np.asarray(x, float) + 1j * np.asarray(p, float)


def z_to_w(z):
    z = np.asarray(z, complex)
    z1, z2, z3, z4 = np.moveaxis(z, -1, 0)
    return np.stack([z1 + 1j * z2, -z3 + 1j * z4, z3 + 1j * z4, z1 - 1j * z2], axis=-1)


def w_to_z(w):
    w = np.asarray(w, complex)
    w1, w2, w3, w4 = np.moveaxis(w, -1, 0)
    return np.stack([(w1 + w4) / 2, (w1 - w4) / 2j, (w3 - w2) / 2, (w2 + w3) / 2j], axis=-1)


def xp_to_w(x, p):
    return z_to_w(pack_z(x, p))


def w_to_xp(w):
    z = w_to_z(w)
    return z.real, z.imag


def coords_zw(point: ComplexVec4, direction: Literal["to_w", "to_z"]) -> ComplexVec4:
    if direction == "to_w":
        if point.system != "z":
            raise UsageError("to_w expects z-coordinates")
        return ComplexVec4(z_to_w(point.values), "w")
    if direction == "to_z":
        if point.system != "w":
            raise UsageError("to_z expects w-coordinates")
        return ComplexVec4(w_to_z(point.values), "z")
    raise UsageError(f"unknown direction {direction!r}")


def xp_to_xieta(x, p):
    x = np.asarray(x, float)
    p = np.asarray(p, float)
    xi = np.stack([x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3]], axis=-1)
    eta = np.stack([p[..., 0] + 1j * p[..., 1], p[..., 2] + 1j * p[..., 3]], axis=-1)
    return xi, eta


def xieta_to_xp(xi, eta):
    xi = np.asarray(xi, complex)
    eta = np.asarray(eta, complex)
    x = np.stack([xi[..., 0].real, xi[..., 0].imag, xi[..., 1].real, xi[..., 1].imag], axis=-1)
    p = np.stack([eta[..., 0].real, eta[..., 0].imag, eta[..., 1].real, eta[..., 1].imag], axis=-1)
    return x, p


def xieta_to_w(xi, eta):
    xi = np.asarray(xi, complex)
    eta = np.asarray(eta, complex)
    x1, x2 = xi[..., 0], xi[..., 1]
    e1, e2 = eta[..., 0], eta[..., 1]
    return np.stack([x1 + 1j * e1,
                     -(np.conj(x2) + 1j * np.conj(e2)),
                     x2 + 1j * e2,
                     np.conj(x1) + 1j * np.conj(e1)], axis=-1)


def coords_xieta(point: PhasePoint):
    xi, eta = xp_to_xieta(point.x, point.p)
    return xi, eta


def coords_xieta_inverse(xi, eta) -> PhasePoint:
    x, p = xieta_to_xp(xi, eta)
    return PhasePoint(x, p)


# ------------------------------------------------------- complex structure


def apply_J(v, structure: Literal["standard_z", "split_xieta"] = "standard_z"):
    """Complex structure on 8-vectors (dx, dp).

    ``standard_z`` multiplies z = x + i p by i; ``split_xieta`` multiplies
    xi = (x1 + i x2, x3 + i x4) and eta likewise by i.
    """
    v = np.asarray(v, float)
    dx, dp = v[..., :4], v[..., 4:]
    if structure == "standard_z":
        return np.concatenate([-dp, dx], axis=-1)
    if structure == "split_xieta":
        def rot(a):
            return np.stack([-a[..., 1], a[..., 0], -a[..., 3], a[..., 2]], axis=-1)
        return np.concatenate([rot(dx), rot(dp)], axis=-1)
    raise UsageError(f"unknown complex structure {structure!r}")


def complex_J_apply(v: TangentVec, structure="standard_z") -> TangentVec:
    return TangentVec(v.base, apply_J(v.direction, structure))


# ------------------------------------------------ finite-difference engine


def _steps(point, h):
    scale = np.maximum(1.0, np.max(np.abs(point), axis=-1, keepdims=True))
    return h * scale


def _first(f, point, h):
    n = point.shape[-1]
    hs = _steps(point, h)                                   # (..., 1)
    eye = np.eye(n)
    stencil = np.concatenate([eye, -eye])                   # (2n, n)
    pts = point[..., None, :] + hs[..., None] * stencil
    vals = np.asarray(f(pts))                               # (..., 2n, m)
    diff = (vals[..., :n, :] - vals[..., n:, :]) / (2.0 * hs[..., None])
    return np.swapaxes(diff, -1, -2)                        # (..., m, n)


def _second(f, point, h):
    n = point.shape[-1]
    hs = _steps(point, h)
    offsets = []
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    for i, j in pairs:
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            d = np.zeros(n)
            d[i] += si
            d[j] += sj
            offsets.append(d)
    offsets.append(np.zeros(n))
    offsets = np.array(offsets)
    pts = point[..., None, :] + hs[..., None] * offsets
    vals = np.asarray(f(pts))                               # (..., S, m)
    m = vals.shape[-1]
    centre = vals[..., -1, :]
    hess = np.empty(point.shape[:-1] + (m, n, n))
    h2 = hs[..., None] ** 2                                 # (..., 1, 1)
    for idx, (i, j) in enumerate(pairs):
        pp, pm, mp, mm = (vals[..., 4 * idx + k, :] for k in range(4))
        if i == j:
            # offsets are +-2h along e_i here; pm and mp sit at the centre
            val = (pp - 2.0 * centre + mm) / (4.0 * h2[..., 0])
        else:
            val = (pp - pm - mp + mm) / (4.0 * h2[..., 0])
        hess[..., :, i, j] = val
        hess[..., :, j, i] = val
    return hess


def jacobian_fd(f: Callable, point, order: int = 1, tol: Tolerances = DEFAULT_TOL,
                h: float | None = None, h2: float | None = None, richardson: bool | None = None):
    """Central-difference derivatives of a vectorised map.

    ``f`` must accept arrays of shape (..., n) and return (..., m).  ``point``
    may carry leading batch dimensions.  Returns the Jacobian (..., m, n) and,
    for ``order=2``, also the Hessian (..., m, n, n).  Steps are relative to
    max(1, |point|_inf).
    """
    point = np.asarray(point, float)
    if order not in (1, 2):
        raise UsageError("order must be 1 or 2")
    h = tol.fd_step if h is None else h
    h2 = tol.fd_step_second if h2 is None else h2
    rich = tol.richardson if richardson is None else richardson

    def jac(step):
        return _first(f, point, step)

    def hess(step):
        return _second(f, point, step)

    J = jac(h)
    if rich:
        J = (4.0 * jac(h / 2) - J) / 3.0
    if order == 1:
        return J
    H = hess(h2)
    if rich:
        H = (4.0 * hess(h2 / 2) - H) / 3.0
    return J, H


def real_view(w):
    """Complex (..., n) -> real (..., 2n) as (re_1, im_1, re_2, im_2, ...)."""
    w = np.asarray(w, complex)
    return np.stack([w.real, w.imag], axis=-1).reshape(w.shape[:-1] + (2 * w.shape[-1],))


def complex_view(r):
    """Inverse of :func:`real_view`."""
    r = np.asarray(r, float)
    pairs = r.reshape(r.shape[:-1] + (r.shape[-1] // 2, 2))
    return pairs[..., 0] + 1j * pairs[..., 1]
