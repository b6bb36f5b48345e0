"""Forms, metrics and submanifold samplers consumed by the verification engines.

Points of the resolved conifold are handled in real coordinates
``(Re zeta, Im zeta, Re w1, Im w1, ..., Re w4, Im w4)`` (10 numbers), where
zeta is an affine coordinate of the CP^1 factor.  Phase-space points use the
8 coordinates (x, p).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import geom
from ..conifold import AffineChart, isotopy_inverse_tangent
from ..conormal import PerturbationField

BilinearEval = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FormHandle:
    """A 2-form given by ``evaluator(base, u, v)`` (vectorised, broadcasting)."""

    name: str
    evaluator: BilinearEval

    def __call__(self, base, u, v):
        return self.evaluator(base, u, v)


@dataclass(frozen=True)
class MetricHandle:
    """A Riemannian metric given by ``evaluator(base, u, v)``."""

    name: str
    evaluator: BilinearEval

    def __call__(self, base, u, v):
        return self.evaluator(base, u, v)

    def gram(self, base, vecs):
        """Gram matrices (..., k, k) of vectors (..., k, D) at base (..., D)."""
        b = np.asarray(base)[..., None, None, :]
        return self.evaluator(b, vecs[..., :, None, :], vecs[..., None, :, :])

    def matrix(self, base, dim: int):
        """Matrix of the metric in the ambient coordinates."""
        eye = np.broadcast_to(np.eye(dim), np.shape(base)[:-1] + (dim, dim))
        return self.gram(base, eye)


@dataclass(frozen=True)
class GridSpec:
    lows: tuple
    highs: tuple
    counts: tuple
    periodic: tuple = ()

    def points(self) -> np.ndarray:
        axes = []
        for i, (lo, hi, n) in enumerate(zip(self.lows, self.highs, self.counts)):
            per = self.periodic[i] if i < len(self.periodic) else False
            axes.append(np.linspace(lo, hi, n, endpoint=not per) if n > 1 else np.array([lo]))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def describe(self) -> str:
        return "x".join(str(n) for n in self.counts)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))


@dataclass
class SubmanifoldSampler:
    """A parametrised submanifold of a coordinate ambient space.

    ``param`` maps parameters (N, k) to ambient coordinates (N, D);
    ``tangents`` maps parameters to tangent bases (N, k, D) and defaults to
    central differences of ``param``.  ``ambient_tangents(base, rng, n)``
    draws random tangent vectors of the ambient manifold (default: R^D).
    """

    name: str
    param: Callable[[np.ndarray], np.ndarray]
    grid: GridSpec
    ambient_dim: int
    tangents: Optional[Callable[[np.ndarray], np.ndarray]] = None
    metric: Optional[MetricHandle] = None
    J: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    ambient_tangents: Optional[Callable] = None
    info: dict = field(default_factory=dict)

    def parameters(self) -> np.ndarray:
        return self.grid.points()

    def points(self, u=None) -> np.ndarray:
        return self.param(self.parameters() if u is None else u)

    def tangent_basis(self, u=None) -> np.ndarray:
        u = self.parameters() if u is None else np.asarray(u, float)
        if self.tangents is not None:
            return self.tangents(u)
        jac = geom.jacobian_fd(self.param, u)                # (N, D, k)
        return np.swapaxes(jac, -1, -2)

    def metric_handle(self) -> MetricHandle:
        return self.metric if self.metric is not None else EUCLIDEAN

    def random_ambient(self, base, rng: np.random.Generator, n: int):
        if self.ambient_tangents is not None:
            return self.ambient_tangents(base, rng, n)
        return rng.normal(size=np.shape(base)[:-1] + (n, self.ambient_dim))


# -------------------------------------------------------- standard handles


def _euclid(base, u, v):
    return np.sum(np.asarray(u) * np.asarray(v), axis=-1)


EUCLIDEAN = MetricHandle("g_st", _euclid)

OMEGA = FormHandle("omega", lambda base, u, v: geom.omega(u, v))


def j_standard(base, v):
    return geom.apply_J(v, "standard_z")


def _hat_split(v):
    c = geom.complex_view(v)
    return c[..., 0], c[..., 1:]


def _omega_hat(base, u, v):
    zeta = geom.complex_view(np.asarray(base)[..., :2])[..., 0]
    zu, wu = _hat_split(u)
    zv, wv = _hat_split(v)
    return geom.fubini_study_form(zeta, zu, zv) + geom.omega_w(wu, wv)


def _g_hat(base, u, v):
    zeta = geom.complex_view(np.asarray(base)[..., :2])[..., 0]
    zu, wu = _hat_split(u)
    zv, wv = _hat_split(v)
    return geom.fubini_study(zeta, zu, zv) + geom.g_st_w(wu, wv)


OMEGA_HAT = FormHandle("omega_hat", _omega_hat)
G_HAT = MetricHandle("g_hat", _g_hat)


def j_complex(base, v):
    """Multiplication by i on every complex coordinate pair."""
    return geom.real_view(1j * geom.complex_view(v))


def omega_tilde(field_: PerturbationField) -> FormHandle:
    """The pushed-forward form (inverse isotopy then omega) on resolved-conifold
    coordinates; the CP^1 component of the vectors is dropped."""

    def ev(base, u, v):
        w = geom.complex_view(np.asarray(base)[..., 2:])
        x, _ = geom.w_to_xp(w)
        jac = field_.jacobian(x)

        def to_xp(vec):
            z = geom.w_to_z(geom.complex_view(np.asarray(vec)[..., 2:]))
            return np.concatenate([z.real, z.imag], axis=-1)

        a = isotopy_inverse_tangent(field_, x, to_xp(u), jac)
        b = isotopy_inverse_tangent(field_, x, to_xp(v), jac)
        return geom.omega(a, b)

    return FormHandle("omega_tilde_eps", ev)


def pushforward_omega(field_: PerturbationField) -> FormHandle:
    """The pushed-forward form on phase-space coordinates (x, p)."""

    def ev(base, u, v):
        x = np.asarray(base)[..., :4]
        jac = field_.jacobian(x)
        return geom.omega(isotopy_inverse_tangent(field_, x, np.asarray(u), jac),
                          isotopy_inverse_tangent(field_, x, np.asarray(v), jac))

    return FormHandle("omega_pushforward", ev)


def resolved_coords(w, chart: AffineChart | None = None):
    """Real resolved-conifold coordinates (zeta, w) of points w != 0."""
    w = np.asarray(w, complex)
    chart = AffineChart(w) if chart is None else chart
    return np.concatenate([geom.real_view(chart.zeta[..., None]), geom.real_view(w)], axis=-1)


def resolved_tangents(w, dw, chart: AffineChart | None = None):
    """Lift w-tangent vectors (..., k, 4) to resolved coordinates (..., k, 10)."""
    chart = AffineChart(w) if chart is None else chart
    dz = chart.differential(w, dw)
    return np.concatenate([geom.real_view(dz[..., None]), geom.real_view(dw)], axis=-1)


def conifold_tangent_space(w, rng: np.random.Generator, n: int):
    """n random complex tangent vectors of the conifold at w (..., 4) -> (..., n, 4)."""
    w = np.asarray(w, complex)
    c = np.stack([w[..., 3], -w[..., 2], -w[..., 1], w[..., 0]], axis=-1)
    shape = w.shape[:-1] + (n, 4)
    dw = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    s = np.sum(c[..., None, :] * dw, axis=-1, keepdims=True)
    return dw - s * np.conj(c[..., None, :]) / np.sum(np.abs(c) ** 2, -1)[..., None, None]


def resolved_ambient_tangents(base, rng, n):
    w = geom.complex_view(np.asarray(base)[..., 2:])
    return resolved_tangents(w, conifold_tangent_space(w, rng, n))
