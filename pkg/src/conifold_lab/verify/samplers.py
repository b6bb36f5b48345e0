"""Concrete samplers: conormal bundles, their contractions and conifold
transitions, closed-form oracles, and classical test submanifolds."""
from __future__ import annotations

import numpy as np

from .. import geom
from ..conifold import (AffineChart, contract_tangent, contract_xp, ct_tangents_w,
                        unknot_oracle_arrays)
from ..conormal import conormal_tangents, conormal_xp
from ..geom import TWO_PI
from ..knots import KnotCurve
from .handles import (G_HAT, GridSpec, SubmanifoldSampler, j_complex, j_standard,
                      resolved_ambient_tangents, resolved_coords, resolved_tangents)


def polar_spec(n_t: int, n_theta: int, n_r: int, r_range) -> GridSpec:
    """Grid over (t, theta, r); t and theta periodic."""
    return GridSpec((0.0, 0.0, r_range[0]), (TWO_PI, TWO_PI, r_range[1]),
                    (n_t, n_theta, n_r), (True, True, False))


def _polar(u):
    u = np.asarray(u, float)
    t, th, r = u[..., 0], u[..., 1], u[..., 2]
    return t, r * np.cos(th), r * np.sin(th)


def conormal_sampler(knot: KnotCurve, eps: float, spec: GridSpec) -> SubmanifoldSampler:
    """The (perturbed) conormal bundle in R^8 with tangents (d/dt, d/dalpha, d/dbeta)."""

    def param(u):
        x, p = conormal_xp(knot, *_polar(u), eps)
        return np.concatenate([x, p], axis=-1)

    def tangents(u):
        return conormal_tangents(knot, *_polar(u), eps)

    return SubmanifoldSampler(f"conormal[{knot.name}, eps={eps}]", param, spec, 8, tangents,
                              J=j_standard, info={"knot": knot.name, "eps": eps})


def contracted_sampler(knot: KnotCurve, eps: float, spec: GridSpec) -> SubmanifoldSampler:
    """The regularised contraction of the unperturbed conormal bundle."""

    def param(u):
        x, p = conormal_xp(knot, *_polar(u))
        return np.concatenate(contract_xp(x, p, eps), axis=-1)

    def tangents(u):
        t, a, b = _polar(u)
        x, p = conormal_xp(knot, t, a, b)
        return contract_tangent(x, p, conormal_tangents(knot, t, a, b), eps)

    return SubmanifoldSampler(f"contracted[{knot.name}, eps={eps}]", param, spec, 8, tangents,
                              J=j_standard, info={"knot": knot.name, "eps": eps})


def ct_sampler(knot: KnotCurve, eps: float, spec: GridSpec) -> SubmanifoldSampler:
    """CT of the perturbed conormal bundle in resolved coordinates (zeta, w).

    eps = 0 is accepted here for r > 0 (the unperturbed transition away from
    the exceptional fibre); the public ct_point refuses it.
    """

    def param(u):
        t, a, b = _polar(u)
        w, _ = ct_tangents_w(knot, eps, t, a, b)
        return resolved_coords(w)

    def tangents(u):
        t, a, b = _polar(u)
        w, dw = ct_tangents_w(knot, eps, t, a, b)
        return resolved_tangents(w, dw, AffineChart(w))

    return SubmanifoldSampler(f"CT[{knot.name}, eps={eps}]", param, spec, 10, tangents,
                              metric=G_HAT, J=j_complex, ambient_tangents=resolved_ambient_tangents,
                              info={"knot": knot.name, "eps": eps})


def unknot_oracle_sampler(spec: GridSpec) -> SubmanifoldSampler:
    """Closed-form CT of the unknot conormal with the chart zeta = i e^{i(t + theta)}."""

    def param(u):
        u = np.asarray(u, float)
        w, _, _ = unknot_oracle_arrays(u[..., 0], u[..., 1], u[..., 2])
        zeta = 1j * np.exp(1j * (u[..., 0] + u[..., 1]))
        return np.concatenate([geom.real_view(zeta[..., None]), geom.real_view(w)], axis=-1)

    return SubmanifoldSampler("CT-oracle[unknot]", param, spec, 10, None, metric=G_HAT,
                              J=j_complex, ambient_tangents=resolved_ambient_tangents)


# ------------------------------------------------------ classical fixtures


def sphere3_param(radius: float = 1.0):
    """Hyperspherical coordinates (a, b, c) -> S^3 of the given radius in R^4."""

    def param(u):
        u = np.asarray(u, float)
        a, b, c = u[..., 0], u[..., 1], u[..., 2]
        return radius * np.stack([np.cos(a), np.sin(a) * np.cos(b),
                                  np.sin(a) * np.sin(b) * np.cos(c),
                                  np.sin(a) * np.sin(b) * np.sin(c)], axis=-1)

    return param


def sphere3_sampler(radius: float = 1.0, counts=(6, 6, 6)) -> SubmanifoldSampler:
    # stay away from the coordinate singularities at a, b in {0, pi}
    spec = GridSpec((0.4, 0.4, 0.0), (np.pi - 0.4, np.pi - 0.4, TWO_PI), counts, (False, False, True))
    return SubmanifoldSampler(f"S3(r={radius})", sphere3_param(radius), spec, 4)


def clifford_torus_param(u):
    u = np.asarray(u, float)
    a, b = u[..., 0], u[..., 1]
    return np.stack([np.cos(a), np.sin(a), np.cos(b), np.sin(b)], axis=-1) / np.sqrt(2.0)


def clifford_torus_sampler(counts=(8, 8)) -> SubmanifoldSampler:
    spec = GridSpec((0.0, 0.0), (TWO_PI, TWO_PI), counts, (True, True))
    return SubmanifoldSampler("clifford-torus", clifford_torus_param, spec, 4)


def cone_chart_real(u):
    """The cone chart (z, xi, eta) -> (xi, z xi, eta, z eta) on real coordinates
    (R^6 -> R^8, complex pairs interleaved)."""
    c = geom.complex_view(np.asarray(u, float))
    z, xi, eta = c[..., 0], c[..., 1], c[..., 2]
    return geom.real_view(np.stack([xi, z * xi, eta, z * eta], axis=-1))
