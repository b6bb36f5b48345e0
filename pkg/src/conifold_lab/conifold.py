"""Contractions onto the conifold, the isotopy, the small resolution and the
conifold transition of (perturbed) conormal bundles.

Resolved points are pairs ([u:v], w) with v w1 = u w2 and v w3 = u w4.  On
tangent vectors the CP^1 factor is handled through an affine coordinate
``zeta`` (``u/v`` or ``v/u``, whichever has modulus <= 1); every form and
metric used here is invariant under ``zeta -> 1/zeta``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .conormal import ConormalCoords, PerturbationField, conormal_tangents, conormal_xp
from .errors import DomainError, ParameterError, SingularityError, UsageError
from .geom import (TWO_PI, ComplexVec4, PhasePoint, ProjPoint, _canonical_pair,
                   pack_z, xp_to_w, z_to_w)
from .knots import KnotCurve, torus_knot

NODE_RADIUS = 1e-10

# --------------------------------------------------------------- contractions


def _check_cotangent(x, p, tol):
    x = np.asarray(x, float)
    p = np.asarray(p, float)
    bad = (np.abs(np.linalg.norm(x, axis=-1) - 1.0) > tol) | (np.abs(np.sum(x * p, -1)) > tol)
    if np.any(bad):
        raise DomainError("point is not on the unit cotangent bundle of S^3")


def contract_xp(x, p, eps: float = 0.0):
    """(x sqrt(|p|^2 + eps^2), p); eps = 0 is the contraction onto the conifold."""
    x = np.asarray(x, float)
    p = np.asarray(p, float)
    s = np.sqrt(np.sum(p * p, -1, keepdims=True) + eps * eps)
    return x * s, p


def contract_tangent(x, p, v, eps: float = 0.0):
    """Derivative of :func:`contract_xp` at (x, p) applied to 8-vectors v (..., 8)."""
    x = np.asarray(x, float)[..., None, :] if np.ndim(v) > np.ndim(x) else np.asarray(x, float)
    p = np.asarray(p, float)[..., None, :] if np.ndim(v) > np.ndim(p) else np.asarray(p, float)
    dx, dp = v[..., :4], v[..., 4:]
    s = np.sqrt(np.sum(p * p, -1, keepdims=True) + eps * eps)
    ds = np.sum(p * dp, -1, keepdims=True) / s
    return np.concatenate([dx * s + x * ds, dp], axis=-1)


def contract_F(pt: PhasePoint, tol: float = 1e-10) -> PhasePoint:
    _check_cotangent(pt.x, pt.p, tol)
    return PhasePoint(*contract_xp(pt.x, pt.p))


def contract_Fa(a: float, pt: PhasePoint, tol: float = 1e-10) -> PhasePoint:
    if not a > 0:
        raise ParameterError("the deformation parameter a must be positive")
    _check_cotangent(pt.x, pt.p, tol)
    return PhasePoint(*contract_xp(pt.x, pt.p, a))


def contract_Feps(eps: float, pt: PhasePoint, tol: float = 1e-10) -> PhasePoint:
    if eps < 0:
        raise ParameterError("eps must be nonnegative")
    _check_cotangent(pt.x, pt.p, tol)
    return PhasePoint(*contract_xp(pt.x, pt.p, eps))


# ------------------------------------------------------------------ isotopy


def isotopy_xp(field: PerturbationField, x, p, direction: Literal["forward", "inverse"] = "forward"):
    """(x, p + eps xi(x)) or its inverse (x, p - eps xi(x))."""
    sign = {"forward": 1.0, "inverse": -1.0}.get(direction)
    if sign is None:
        raise UsageError(f"unknown direction {direction!r}")
    x = np.asarray(x, float)
    return x, np.asarray(p, float) + sign * field.eps * field.value(x)


def isotopy_phi(field: PerturbationField, pt: PhasePoint, direction="forward") -> PhasePoint:
    return PhasePoint(*isotopy_xp(field, pt.x, pt.p, direction))


def isotopy_inverse_tangent(field: PerturbationField, x, v, jac=None):
    """Derivative of the inverse isotopy: (dx, dp) -> (dx, dp - eps D xi(x) dx)."""
    jac = field.jacobian(x) if jac is None else jac
    dx, dp = v[..., :4], v[..., 4:]
    if np.ndim(v) > np.ndim(jac) - 1:
        corr = np.einsum("...ij,...kj->...ki", jac, dx)
    else:
        corr = np.einsum("...ij,...j->...i", jac, dx)
    return np.concatenate([dx, dp - field.eps * corr], axis=-1)


# ------------------------------------------------------------ resolution


@dataclass(frozen=True)
class ResolvedPoint:
    """([u:v], w) in CP^1 x C^4."""

    line: ProjPoint
    w: ComplexVec4

    def constraint_residual(self) -> float:
        u, v = self.line.u, self.line.v
        w1, w2, w3, w4 = self.w.values
        return float(max(abs(v * w1 - u * w2), abs(v * w3 - u * w4)))

    @property
    def trace(self) -> complex:
        """Affine coordinate u/v of the CP^1 component."""
        return self.line.affine()


def lift_pair(w):
    """Index (0 or 1) of the w-pair spanning the line: (w1, w2) unless
    (w3, w4) has strictly larger norm."""
    w = np.asarray(w, complex)
    n12 = np.abs(w[..., 0]) ** 2 + np.abs(w[..., 1]) ** 2
    n34 = np.abs(w[..., 2]) ** 2 + np.abs(w[..., 3]) ** 2
    return (n34 > n12).astype(int)


def lift_line(w):
    """Vectorised resolution lift: canonical (u, v) of the line through w."""
    w = np.asarray(w, complex)
    if np.any(np.linalg.norm(w, axis=-1) < NODE_RADIUS):
        raise SingularityError("the resolution lift is undefined at the conifold node")
    pair = lift_pair(w)
    u = np.where(pair == 0, w[..., 0], w[..., 2])
    v = np.where(pair == 0, w[..., 1], w[..., 3])
    return _canonical_pair(u, v)


def resolve_lift(w: ComplexVec4, tol: float = 1e-8) -> ResolvedPoint:
    if w.system != "w":
        raise UsageError("resolve_lift expects w-coordinates")
    vals = w.values
    if np.linalg.norm(vals) < NODE_RADIUS:
        raise SingularityError("the resolution lift is undefined at the conifold node")
    if abs(vals[0] * vals[3] - vals[1] * vals[2]) > tol * max(1.0, np.linalg.norm(vals) ** 2):
        raise DomainError("w is not on the conifold w1 w4 = w2 w3")
    u, v = lift_line(vals)
    return ResolvedPoint(ProjPoint(complex(u), complex(v)), w)


def trace_abs(u, v):
    """|u/v| with infinity where v = 0."""
    with np.errstate(divide="ignore"):
        return np.where(np.abs(v) > 0, np.abs(u) / np.where(np.abs(v) > 0, np.abs(v), 1.0), np.inf)


class AffineChart:
    """The affine coordinate zeta of the line through w and its derivative.

    zeta = num/den where (num, den) is the lift pair ordered so |zeta| <= 1.
    """

    def __init__(self, w):
        w = np.asarray(w, complex)
        pair = lift_pair(w)
        a = np.where(pair == 0, 0, 2)
        first = np.take_along_axis(w, a[..., None], -1)[..., 0]
        second = np.take_along_axis(w, (a + 1)[..., None], -1)[..., 0]
        swap = np.abs(first) > np.abs(second)
        self.num_idx = np.where(swap, a + 1, a)
        self.den_idx = np.where(swap, a, a + 1)
        self.zeta = self._ratio(w)

    def _pick(self, arr, idx):
        return np.take_along_axis(arr, np.broadcast_to(idx[..., None], arr.shape[:-1] + (1,)), -1)[..., 0]

    def _ratio(self, w):
        return self._pick(w, self.num_idx) / self._pick(w, self.den_idx)

    def differential(self, w, dw):
        """d zeta applied to dw (..., [k,] 4)."""
        w = np.asarray(w, complex)
        dw = np.asarray(dw, complex)
        num, den = self._pick(w, self.num_idx), self._pick(w, self.den_idx)
        if dw.ndim > w.ndim:
            ni = np.broadcast_to(self.num_idx[..., None], dw.shape[:-1])
            di = np.broadcast_to(self.den_idx[..., None], dw.shape[:-1])
            num, den = num[..., None], den[..., None]
        else:
            ni, di = self.num_idx, self.den_idx
        dn = np.take_along_axis(dw, ni[..., None], -1)[..., 0]
        dd = np.take_along_axis(dw, di[..., None], -1)[..., 0]
        return (den * dn - num * dd) / den ** 2

    def evaluate(self, w):
        """zeta at other points w using the same chart (for finite differences)."""
        return self._ratio(np.asarray(w, complex))


# ---------------------------------------------------------------- cone chart


@dataclass(frozen=True)
class ChartPoint:
    z: complex
    xi: complex
    eta: complex
    chart: int = 1

    def __post_init__(self):
        if self.chart not in (1, 2):
            raise UsageError("chart index must be 1 or 2")
        if not abs(self.z) < 2:
            raise DomainError("cone chart coordinate must satisfy |z| < 2")


def cone_embed(z, xi, eta, chart=1):
    """(xi, z xi, eta, z eta) for chart 1, (z xi, xi, z eta, eta) for chart 2."""
    z, xi, eta = (np.asarray(a, complex) for a in (z, xi, eta))
    chart = np.asarray(chart)
    c1 = np.stack([xi, z * xi, eta, z * eta], axis=-1)
    c2 = np.stack([z * xi, xi, z * eta, eta], axis=-1)
    return np.where((chart == 1)[..., None], c1, c2)


def cone_invert(w):
    """Inverse of the cone chart on the conifold minus the node: (z, xi, eta, chart)."""
    w = np.asarray(w, complex)
    if np.any(np.linalg.norm(w, axis=-1) < NODE_RADIUS):
        raise SingularityError("the cone chart is undefined at the node")
    w1, w2, w3, w4 = np.moveaxis(w, -1, 0)
    # the pair (w1, w3) or (w2, w4) that spans the fibre direction
    chart2 = np.abs(w2) ** 2 + np.abs(w4) ** 2 > np.abs(w1) ** 2 + np.abs(w3) ** 2
    xi = np.where(chart2, w2, w1)
    eta = np.where(chart2, w4, w3)
    top = np.where(chart2, w1, w2)
    bot = np.where(chart2, w3, w4)
    # z from whichever of xi, eta is larger, for conditioning
    use_xi = np.abs(xi) >= np.abs(eta)
    z = np.where(use_xi, top / np.where(use_xi, xi, 1.0), bot / np.where(use_xi, 1.0, eta))
    return z, xi, eta, np.where(chart2, 2, 1)


def cone_chart(point, direction: Literal["embed", "invert"]):
    if direction == "embed":
        if not isinstance(point, ChartPoint):
            raise UsageError("embed expects a ChartPoint")
        return ComplexVec4(cone_embed(point.z, point.xi, point.eta, point.chart), "w")
    if direction == "invert":
        vals = point.values if isinstance(point, ComplexVec4) else np.asarray(point, complex)
        z, xi, eta, chart = cone_invert(vals)
        return ChartPoint(complex(z), complex(xi), complex(eta), int(chart))
    raise UsageError(f"unknown direction {direction!r}")


# ------------------------------------------------------ conifold transition


def ct_xp(knot: KnotCurve, eps: float, t, alpha, beta):
    """F applied to the perturbed conormal bundle, vectorised."""
    x, p = conormal_xp(knot, t, alpha, beta, eps)
    return contract_xp(x, p)


def ct_w(knot: KnotCurve, eps: float, t, alpha, beta):
    return xp_to_w(*ct_xp(knot, eps, t, alpha, beta))


def ct_tangents_w(knot: KnotCurve, eps: float, t, alpha, beta):
    """w and the w-coordinates of the tangent vectors (d/dt, d/dalpha, d/dbeta)."""
    x, p = conormal_xp(knot, t, alpha, beta, eps)
    tang = conormal_tangents(knot, t, alpha, beta, eps)
    dF = contract_tangent(x, p, tang)
    w = xp_to_w(*contract_xp(x, p))
    dw = z_to_w(pack_z(dF[..., :4], dF[..., 4:]))
    return w, dw


def ct_arrays(knot: KnotCurve, eps: float, t, r, theta, allow_unperturbed: bool = False):
    """Vectorised CT samples on polar conormal coordinates.

    Returns w (..., 4) and the canonical line (u, v).  ``allow_unperturbed``
    admits eps = 0 for r > 0 (used to study the unperturbed transition).
    """
    if eps < 0 or (eps == 0 and not allow_unperturbed):
        raise ParameterError("the conifold transition needs eps > 0")
    r = np.asarray(r, float)
    if np.any(r < 0):
        raise ParameterError("r must be nonnegative")
    alpha, beta = r * np.cos(theta), r * np.sin(theta)
    w = ct_w(knot, eps, t, alpha, beta)
    u, v = lift_line(w)
    return w, u, v


def ct_point(knot: KnotCurve, eps: float, coords: ConormalCoords) -> ResolvedPoint:
    if not eps > 0:
        raise ParameterError("the conifold transition needs eps > 0")
    w = ct_w(knot, eps, coords.t, coords.alpha, coords.beta)
    return resolve_lift(ComplexVec4(w, "w"))


def polar_grid(n_t: int, n_theta: int, n_r: int, r_range: tuple[float, float]):
    """Flattened (t, theta, r) grid: t and theta periodic, r inclusive of both ends."""
    t = np.linspace(0.0, TWO_PI, n_t, endpoint=False)
    th = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    r = np.linspace(r_range[0], r_range[1], n_r) if n_r > 1 else np.array([r_range[0]])
    T, TH, R = np.meshgrid(t, th, r, indexing="ij")
    return T.ravel(), TH.ravel(), R.ravel()


def ct_grid(knot: KnotCurve, eps: float, grid=(16, 16, 4), r_range=(0.1, 2.0)):
    """CT samples on a polar grid as a dict of arrays (one row per grid point)."""
    t, th, r = polar_grid(*grid, r_range)
    w, u, v = ct_arrays(knot, eps, t, r, th)
    return {"t": t, "theta": th, "r": r, "u": u, "v": v, "w": w, "trace_abs": trace_abs(u, v)}


# ------------------------------------------------------------ closed forms


def unknot_oracle_arrays(t, theta, r):
    """Closed-form CT of the unknot conormal: w = (r e^{it}, -i r e^{-i theta},
    i r e^{i theta}, r e^{-it}) with line [i e^{i(t + theta)} : 1]."""
    t, theta, r = np.broadcast_arrays(*(np.asarray(a, float) for a in (t, theta, r)))
    a = 1j * np.exp(1j * (t + theta))
    b = -1j * r * np.exp(-1j * theta)
    w = np.stack([a * b, b, np.conj(b), np.conj(a * b)], axis=-1)
    u, v = _canonical_pair(a, np.ones_like(a))
    return w, u, v


def ct_unknot_oracle(t: float, theta: float, r: float) -> ResolvedPoint:
    if r < 0:
        raise ParameterError("r must be nonnegative")
    w, u, v = unknot_oracle_arrays(t, theta, r)
    return ResolvedPoint(ProjPoint(complex(u), complex(v)), ComplexVec4(w, "w"))


def _torus_q(m, n):
    torus_knot(m, n)                                  # parameter validation
    return np.sqrt(2.0) / np.sqrt(m * m + n * n)


def torus_trace(m: int, n: int, t, theta):
    """Affine CP^1 coordinate u/v = w1/w2 of the CT of the (m, n) torus-knot
    conormal bundle, in the frame p1 = (e^{imt}, -e^{int})/sqrt 2,
    p2 = (i n e^{imt}, -i m e^{int})/sqrt(m^2 + n^2) with p = r(p1 cos theta + p2 sin theta).
    """
    q = _torus_q(m, n)
    t = np.asarray(t, float)
    s, c = np.sin(theta), np.cos(theta)
    num = 1.0 - n * q * s + 1j * c
    den = 1.0 - m * q * s - 1j * c
    return -np.exp(1j * (m + n) * t) * num / den


def torus_trace_flipped(m: int, n: int, t, theta):
    """The same expression with the sign of the m-term in the denominator
    flipped.  It corresponds to p2 = (i n e^{imt}, +i m e^{int})/sqrt(m^2 + n^2),
    which is not normal to the knot, so it is not the trace of the conormal
    bundle; it is kept to compare against values quoted for that expression."""
    q = _torus_q(m, n)
    t = np.asarray(t, float)
    s, c = np.sin(theta), np.cos(theta)
    return -np.exp(1j * (m + n) * t) * (1.0 - n * q * s + 1j * c) / (1.0 + m * q * s - 1j * c)


def torus_trace_range(m: int, n: int, samples: int = 200001, trace=None):
    """(min, max) of |trace| over a dense theta sweep (|trace| does not depend on t)."""
    th = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    mod = np.abs((trace or torus_trace)(m, n, 0.0, th))
    return float(mod.min()), float(mod.max())
