"""Stokes identity for discs with boundary on an exact Lagrangian.

A disc is a map f: [0,1]^2 -> R^8 = {(x, p)}.  The check compares
int f^*omega over the square with the integral of f^*lambda over its
counterclockwise boundary; when lambda vanishes on the Lagrangian the
boundary integral, and hence the area, vanishes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .. import geom
from ..conormal import conormal_xp, frame_field
from ..errors import PreconditionError
from ..geom import TWO_PI
from ..knots import KnotCurve, NearestParameter
from .handles import OMEGA, FormHandle


@dataclass(frozen=True)
class OneFormHandle:
    name: str
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, base, v):
        return self.evaluator(base, v)


LIOUVILLE = OneFormHandle("lambda", lambda base, v: geom.liouville(base[..., 4:], v[..., :4]))


@dataclass
class Disc:
    """A square-parametrised disc.

    ``periodic`` marks discs whose second parameter is an angle (f(s, 0) =
    f(s, 1)); their side edges cancel and the angle is integrated with the
    trapezoid rule.  ``edges_on_L`` names the edges that must lie on the
    Lagrangian: any of "s=0", "s=1", "t=0", "t=1".
    """

    fmap: Callable[[np.ndarray], np.ndarray]
    periodic: bool = False
    edges_on_L: Sequence[str] = ("s=0", "s=1", "t=0", "t=1")
    info: dict = field(default_factory=dict)


@dataclass
class StokesResult:
    interior: float
    boundary: float
    boundary_residual: float
    nodes: int

    @property
    def difference(self) -> float:
        return abs(self.interior - self.boundary)


def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _composite_gauss(panels, order):
    x, w = _gauss(order)
    edges = np.arange(panels) / panels
    return (edges[:, None] + x[None, :] / panels).ravel(), np.tile(w / panels, panels)


def _trapezoid(n):
    return np.arange(n) / n, np.full(n, 1.0 / n)


def _edge(name, s):
    one, zero = np.ones_like(s), np.zeros_like(s)
    # counterclockwise orientation of the unit square, with the tangent direction
    return {"t=0": (np.stack([s, zero], -1), np.array([1.0, 0.0])),
            "s=1": (np.stack([one, s], -1), np.array([0.0, 1.0])),
            "t=1": (np.stack([1.0 - s, one], -1), np.array([-1.0, 0.0])),
            "s=0": (np.stack([zero, 1.0 - s], -1), np.array([0.0, -1.0]))}[name]


def interior_integral(disc: Disc, form: FormHandle = OMEGA, n: int = 64, n_angle: int = 256,
                      tol: geom.Tolerances = geom.DEFAULT_TOL) -> float:
    """Tensor-product quadrature of f^*form over the unit square."""
    s, ws = _gauss(n)
    t, wt = _trapezoid(n_angle) if disc.periodic else _gauss(n)
    S, T = np.meshgrid(s, t, indexing="ij")
    u = np.stack([S, T], -1).reshape(-1, 2)
    jac = geom.jacobian_fd(disc.fmap, u, tol=tol)                   # (N, 8, 2)
    vals = form(disc.fmap(u), jac[..., 0], jac[..., 1]).reshape(S.shape)
    return float(ws @ vals @ wt)


def boundary_integral(disc: Disc, primitive: OneFormHandle = LIOUVILLE, panels: int = 16,
                      order: int = 16, n_angle: int = 256,
                      tol: geom.Tolerances = geom.DEFAULT_TOL) -> float:
    """Composite quadrature of f^*primitive along the counterclockwise boundary."""
    total = 0.0
    names = ("t=0", "s=1", "t=1", "s=0")
    for name in names:
        if disc.periodic and name in ("t=0", "t=1"):
            continue                       # the two side edges cancel
        if disc.periodic:
            q, w = _trapezoid(n_angle)
        else:
            q, w = _composite_gauss(panels, order)
        pts, direction = _edge(name, q)
        jac = geom.jacobian_fd(disc.fmap, pts, tol=tol)             # (N, 8, 2)
        vel = jac @ direction
        total += float(w @ primitive(disc.fmap(pts), vel))
    return total


def boundary_points(disc: Disc, n: int = 257) -> np.ndarray:
    q = np.linspace(0.0, 1.0, n)
    return np.concatenate([disc.fmap(_edge(name, q)[0]) for name in disc.edges_on_L])


def stokes_check(disc: Disc, residual: Callable[[np.ndarray], np.ndarray] | None = None,
                 form: FormHandle = OMEGA, primitive: OneFormHandle = LIOUVILLE,
                 n: int = 64, n_angle: int = 256, boundary_tol: float = 1e-8,
                 tol: geom.Tolerances = geom.DEFAULT_TOL) -> StokesResult:
    """Return interior and boundary integrals after checking that the
    declared boundary edges lie on the Lagrangian (``residual`` maps points
    (N, 8) to nonnegative distances)."""
    res = 0.0
    if residual is not None and len(disc.edges_on_L):
        res = float(np.max(residual(boundary_points(disc))))
        if res > boundary_tol:
            raise PreconditionError(f"disc boundary is off the Lagrangian (residual {res:.3e})")
    inner = interior_integral(disc, form, n, n_angle, tol)
    outer = boundary_integral(disc, primitive, n_angle=n_angle, tol=tol)
    return StokesResult(inner, outer, res, n * (n_angle if disc.periodic else n))


# ------------------------------------------------------------ disc builders


def conormal_residual(knot: KnotCurve, eps: float = 0.0):
    """Distance of (x, p) from the (perturbed) conormal bundle: chordal
    distance of x to the knot plus the failure of p - eps*tau to be normal."""
    nearest = NearestParameter(knot)
    field_ = frame_field(knot)

    def res(pts):
        x, p = pts[..., :4], pts[..., 4:]
        t, _ = nearest(x / np.linalg.norm(x, axis=-1, keepdims=True))
        fr = field_(t)
        q = p - eps * fr.tau
        off_sphere = np.abs(np.linalg.norm(x, axis=-1) - 1.0)
        return (np.linalg.norm(x - fr.k, axis=-1) + off_sphere
                + np.abs(np.sum(q * fr.tau, -1)) + np.abs(np.sum(q * fr.k, -1)))

    return res


def zero_section_residual(pts):
    x, p = pts[..., :4], pts[..., 4:]
    return np.abs(np.linalg.norm(x, axis=-1) - 1.0) + np.linalg.norm(p, axis=-1)


def _project_cotangent(x, p):
    n = np.linalg.norm(x, axis=-1, keepdims=True)
    xh = x / n
    return xh, p - np.sum(p * xh, -1, keepdims=True) * xh


def _fourier(rng, modes, scale):
    a = rng.normal(size=modes) * scale / np.arange(1, modes + 1) ** 2
    b = rng.normal(size=modes) * scale / np.arange(1, modes + 1) ** 2
    m = np.arange(1, modes + 1)

    def f(t):
        ang = TWO_PI * np.asarray(t)[..., None] * m
        return np.sum(a * np.cos(ang) + b * np.sin(ang), -1)

    return f


def random_conormal_loop(knot: KnotCurve, rng: np.random.Generator, eps: float = 0.0,
                         winding: int | None = None, modes: int = 3):
    """A random smooth loop tau -> (x, p) in the (perturbed) conormal bundle."""
    winding = int(rng.integers(0, 2)) if winding is None else winding
    t0 = rng.uniform(0.0, TWO_PI)
    dt = _fourier(rng, modes, 0.6)
    da = _fourier(rng, modes, 0.8)
    db = _fourier(rng, modes, 0.8)
    a0, b0 = rng.normal(size=2) * 0.5

    def loop(tau):
        tau = np.asarray(tau, float)
        x, p = conormal_xp(knot, t0 + TWO_PI * winding * tau + dt(tau), a0 + da(tau), b0 + db(tau), eps)
        return x, p

    return loop, winding


def coned_disc(loop, apex_x, apex_p) -> Disc:
    """f(s, tau) = projection to T*S^3 of (1-s) apex + s loop(tau)."""

    def fmap(u):
        u = np.asarray(u, float)
        s, tau = u[..., 0:1], u[..., 1]
        x, p = loop(tau)
        return np.concatenate(_project_cotangent((1 - s) * apex_x + s * x, (1 - s) * apex_p + s * p), -1)

    return Disc(fmap, periodic=True, edges_on_L=("s=1",))


def random_conormal_disc(knot: KnotCurve, rng: np.random.Generator, eps: float = 0.0,
                         min_radius: float = 0.3, attempts: int = 200) -> Disc:
    """Cone a random conormal loop from a random apex, retrying the apex
    until |x| stays above min_radius on the straight cone (before projection)."""
    loop, winding = random_conormal_loop(knot, rng, eps)
    probe_s, probe_t = np.meshgrid(np.linspace(0, 1, 33), np.linspace(0, 1, 129, endpoint=False),
                                   indexing="ij")
    x_loop, _ = loop(probe_t[0])
    for _ in range(attempts):
        ax = rng.normal(size=4)
        ax /= np.linalg.norm(ax)
        ap = rng.normal(size=4) * 0.5
        xs = (1 - probe_s[..., None]) * ax + probe_s[..., None] * x_loop[None]
        if np.min(np.linalg.norm(xs, axis=-1)) > min_radius:
            disc = coned_disc(loop, ax, ap)
            disc.info.update(winding=winding, knot=knot.name, eps=eps)
            return disc
    raise PreconditionError("could not place a cone apex away from the origin")


def zero_section_disc(rng: np.random.Generator) -> Disc:
    """A disc in T*S^3 whose boundary lies on the zero section: a cone over a
    random loop in S^3 with a fibre bump vanishing on the boundary."""
    c = rng.normal(size=(3, 4))
    bump = rng.normal(size=4)

    def fmap(u):
        u = np.asarray(u, float)
        s, tau = u[..., 0:1], u[..., 1:2]
        ang = TWO_PI * tau
        x = c[0] + 0.4 * (np.cos(ang) * c[1] + np.sin(ang) * c[2]) * s
        p = s * (1 - s) * (bump + np.sin(ang) * c[1])
        return np.concatenate(_project_cotangent(x, p), -1)

    return Disc(fmap, periodic=True, edges_on_L=("s=1",))


def arbitrary_disc(rng: np.random.Generator) -> Disc:
    """A smooth random map of the square into R^8 (no boundary condition)."""
    A = rng.normal(size=(3, 3, 8)) * 0.5

    def fmap(u):
        u = np.asarray(u, float)
        s, t = u[..., 0], u[..., 1]
        basis = np.stack([np.ones_like(s), np.sin(2 * s + t), np.cos(3 * t - s)], -1)
        return np.einsum("...i,...j,ijd->...d", basis, np.stack([np.ones_like(s), s, t * t], -1), A)

    return Disc(fmap, periodic=False, edges_on_L=())
