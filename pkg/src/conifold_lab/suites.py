"""Measurement routines and the check suites run by the command line.

Each measurement returns plain numbers plus sample bookkeeping; each suite
turns measurements into :class:`CheckRecord` entries.  Random streams are
derived from (seed, check name) so results do not depend on suite order.
"""
from __future__ import annotations

import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import geom
from .conifold import contract_tangent
from .conormal import PerturbationField, conormal_tangents, conormal_xp
from .distance import build_mesh, embed_resolved, two_point_scan
from .errors import PreconditionError
from .knots import KnotCurve, parse_knot_spec, torus_knot
from .verify import curvature as cv
from .verify.engines import (bilipschitz_bounds, form_restriction_max, generalized_eigenvalues,
                             tameness_bounds, tameness_on_points, totally_real_angle)
from .verify.handles import EUCLIDEAN, G_HAT, j_standard, omega_tilde, pushforward_omega
from .verify.samplers import (clifford_torus_sampler, cone_chart_real, ct_sampler, polar_spec,
                              sphere3_sampler)
from .verify.stokes import (arbitrary_disc, conormal_residual, random_conormal_disc, stokes_check,
                            zero_section_disc, zero_section_residual)

SUITES = ("lagrangian", "tame", "bilipschitz", "curvature", "totally-real", "stokes", "two-point")


def rng_for(seed: int, name: str) -> np.random.Generator:
    """Independent stream per (seed, check name)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2 ** 64 - 1), zlib.crc32(name.encode())]))


@dataclass
class CheckRecord:
    name: str
    anchor: str
    value: float
    bound: str
    passed: bool
    samples: Optional[int] = None
    grid: Optional[str] = None
    excluded: int = 0
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["value"] = _clean(d["value"])
        d["details"] = {k: _clean(v) for k, v in d["details"].items()}
        return d


def _clean(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not np.isfinite(v):
            return str(v)
        return v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_clean(a) for a in v]
    if isinstance(v, np.ndarray):
        return [_clean(a) for a in v.tolist()]
    return v


# ------------------------------------------------------------ configuration


@dataclass
class Settings:
    """Everything a suite needs; the CLI builds this from RunConfig."""

    knot: KnotCurve
    eps: float = 0.1
    grid: tuple = (16, 16, 4)
    r_range: tuple = (0.25, 2.0)
    seed: int = 0
    tol: geom.Tolerances = geom.DEFAULT_TOL
    fixture: str = "all"
    rho: float = 1.0
    neighbors: int = 20
    discs: int = 20
    vector_samples: int = 8
    sigma_samples: int = 4000


# ------------------------------------------------------------ measurements


def sigma_points(field_: PerturbationField, r_range, n: int, rng) -> np.ndarray:
    """Points of the taming neighbourhood: the shell |x| in
    [sqrt(r_min^2+eps^2), sqrt(r_max^2+eps^2)] within half a tube radius of
    the cone over the knot."""
    eps = field_.eps
    s_range = (np.hypot(r_range[0], eps), np.hypot(r_range[1], eps))
    return field_.shell_samples(n, rng, s_range)


def measure_sigma(knot: KnotCurve, eps: float, r_range, n: int, rng):
    field_ = PerturbationField(knot, eps)
    pts = sigma_points(field_, r_range, n, rng)
    norms = field_.norm(pts)
    return float(norms.max()), field_, pts


def pushforward_tameness(field_: PerturbationField, points, directions: int, rng):
    """Ratios Phi_* omega(X, JX) / |X|^2 at phase points over the given x."""
    n = len(points)
    base = np.concatenate([points, np.zeros_like(points)], -1)
    X = rng.normal(size=(n, directions, 8))
    form = pushforward_omega(field_)
    return tameness_on_points(form, j_standard, EUCLIDEAN, base, X, raise_on_failure=False)


def exact_lagrangian_residual(knot: KnotCurve, n: int, rng) -> float:
    """max |lambda(T)| over random conormal points and unit tangent vectors."""
    t = rng.uniform(0, 2 * np.pi, n)
    a, b = rng.normal(size=(2, n)) * 2.0
    x, p = conormal_xp(knot, t, a, b)
    T = conormal_tangents(knot, t, a, b)
    T = T / np.linalg.norm(T, axis=-1, keepdims=True)
    return float(np.max(np.abs(geom.liouville(p[:, None, :], T[..., :4]))))


def isotropy_residuals(knot: KnotCurve, eps: float, n: int, rng):
    """max |omega(T_i, T_j)| and max |g(J T_i, T_j)| on the regularised
    contraction of the conormal bundle (unit tangent vectors)."""
    t = rng.uniform(0, 2 * np.pi, n)
    a, b = rng.normal(size=(2, n)) * 2.0
    x, p = conormal_xp(knot, t, a, b)
    T = contract_tangent(x, p, conormal_tangents(knot, t, a, b), eps)
    T = T / np.linalg.norm(T, axis=-1, keepdims=True)
    i, j = np.triu_indices(3, 1)
    om = geom.omega(T[:, i], T[:, j])
    gj = geom.g_st(geom.apply_J(T[:, i]), T[:, j])
    return float(np.max(np.abs(om))), float(np.max(np.abs(gj)))


def cone_points(n: int, rng, radius=None, z_max: float = 1.0):
    """Real cone-chart parameters (z, xi, eta) with |z| <= z_max; if ``radius``
    is given, scaled so that |w| = radius."""
    z = np.sqrt(rng.uniform(0, 1, n)) * z_max * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    fib = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    if radius is not None:
        fib *= radius / (np.sqrt(1 + np.abs(z) ** 2) * np.linalg.norm(fib, axis=-1))[:, None]
    c = np.stack([z, fib[:, 0], fib[:, 1]], -1)
    return geom.real_view(c)


def resolved_cone_real(u):
    """(z, xi, eta) -> resolved coordinates (zeta = z, w) of the line [1 : z]."""
    u = np.asarray(u, float)
    return np.concatenate([u[..., :2], cone_chart_real(u)], -1)


def _pullback(param, metric_matrix):
    def fn(u):
        J = geom.jacobian_fd(param, u)
        return np.swapaxes(J, -1, -2) @ metric_matrix(param(u)) @ J
    return fn


def _gst_w_matrix(pts):
    # g_st on real views of w is half the Euclidean metric
    return np.broadcast_to(0.5 * np.eye(pts.shape[-1]), pts.shape[:-1] + (pts.shape[-1],) * 2)


def _ghat_matrix(pts):
    return G_HAT.matrix(pts, pts.shape[-1])


def resolution_bilipschitz(R: float, n: int, rng):
    """Extreme eigenvalues of (pi_2^-1)^* g_hat against g_st on the conifold at |w| = R."""
    u = cone_points(n, rng, radius=R)
    src = _pullback(cone_chart_real, _gst_w_matrix)
    return bilipschitz_bounds(resolved_cone_real, src, _ghat_matrix, u, grid=f"{n} points at |w|={R}")


def fs_pullback_max(R: float, n: int, rng) -> float:
    """max generalised eigenvalue of the Fubini-Study part of the resolution
    pulled back to the conifold, against g_st, at |w| = R."""
    u = cone_points(n, rng, radius=R)
    B = _pullback(cone_chart_real, _gst_w_matrix)(u)
    J = geom.jacobian_fd(resolved_cone_real, u)[..., :2, :]
    A = np.swapaxes(J, -1, -2) @ cv.fs_metric_matrix(u[..., :2]) @ J
    return float(generalized_eigenvalues(A, B)[..., -1].max())


def cone_metric_matrix(u):
    """The comparison metric (|xi|^2+|eta|^2)|dz|^2 + |dxi|^2 + |deta|^2 on (z, xi, eta)."""
    u = np.asarray(u, float)
    a = np.sum(u[..., 2:] ** 2, -1)
    d = np.stack([a, a, np.ones_like(a), np.ones_like(a), np.ones_like(a), np.ones_like(a)], -1)
    return d[..., None] * np.eye(6)


def cone_chart_bilipschitz(n: int, rng):
    u = cone_points(n, rng, z_max=1.999)
    u[:, 2:] *= rng.uniform(0.05, 20.0, n)[:, None]
    return bilipschitz_bounds(cone_chart_real, cone_metric_matrix, _gst_w_matrix, u,
                              grid=f"{n} random chart points")


def fmap_bilipschitz(n_bases: int, n_per_base: int, rng, min_norm: float = 3.0):
    """The rescaling map (lambda, alpha, beta) -> (z0 + lambda / sqrt(1+|(xi0,eta0)|^2),
    xi0 + alpha, eta0 + beta) from the unit ball against the comparison metric
    (1+|xi|^2+|eta|^2)|dz|^2 + |dxi|^2 + |deta|^2."""
    lo, hi = np.inf, 0.0
    total = 0
    for _ in range(n_bases):
        z0 = 1.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        fib = rng.normal(size=2) + 1j * rng.normal(size=2)
        fib *= rng.uniform(min_norm, 4 * min_norm) / np.linalg.norm(fib)
        base = geom.real_view(np.array([z0, *fib]))
        scale = np.sqrt(1 + np.sum(np.abs(fib) ** 2))

        def fmap(v, base=base, scale=scale):
            v = np.asarray(v, float)
            out = base + v
            return np.concatenate([base[:2] + v[..., :2] / scale, out[..., 2:]], -1)

        def target(pts):
            a = 1.0 + np.sum(pts[..., 2:] ** 2, -1)
            d = np.stack([a, a] + [np.ones_like(a)] * 4, -1)
            return d[..., None] * np.eye(6)

        v = rng.normal(size=(n_per_base, 6))
        v *= (rng.uniform(0, 1, n_per_base) ** (1 / 6) / np.linalg.norm(v, axis=-1))[:, None]
        res = bilipschitz_bounds(fmap, lambda p: np.broadcast_to(np.eye(6), p.shape[:-1] + (6, 6)),
                                 target, v)
        lo, hi = min(lo, res.min_eig), max(hi, res.max_eig)
        total += res.samples
    return lo, hi, total


def composition_identity_residual(rng, n: int = 8) -> float:
    """Composition identity for the cone chart applied to a test surface: the
    image's second fundamental form against the normal projection of
    Phi_* II + covariant Hessian."""
    c = rng.normal(size=(3, 6)) * 0.3
    base = cone_points(1, rng, radius=2.0)[0]

    def surface(v):
        v = np.asarray(v, float)
        a, b = v[..., 0:1], v[..., 1:2]
        return base + a * c[0] + b * c[1] + np.sin(a * b) * c[2] + 0.2 * a * a * c[1]

    def image(v):
        return cone_chart_real(surface(v))

    u = rng.uniform(-0.5, 0.5, size=(n, 2))
    gam_src = cv.christoffel_contract(lambda p: cv.christoffel_from_metric(cone_metric_matrix, p, h=1e-4))
    iiL = cv.IITensor(surface, u, metric=cone_metric_matrix, christoffel=gam_src)
    iiT = cv.IITensor(image, u, metric=_gst_w_matrix)
    worst = 0.0
    for X, Y in ((np.array([1.0, 0.0]), np.array([1.0, 0.0])), (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
                 (np.array([0.3, -1.1]), np.array([0.7, 0.4]))):
        pts = surface(u)
        sX = np.einsum("nki,k->ni", iiL.T, X)
        sY = np.einsum("nki,k->ni", iiL.T, Y)
        hess = cv.covariant_hessian(cone_chart_real, pts, sX, sY, gamma_source=gam_src)
        dphi = geom.jacobian_fd(cone_chart_real, pts)
        pushed = np.einsum("nmi,ni->nm", dphi, iiL(X, Y)) + hess
        # normal projection in the image
        G = iiT.G
        coef = np.linalg.solve(iiT.g, np.einsum("nkd,nde,ne->nk", iiT.T, G, pushed)[..., None])[..., 0]
        proj = pushed - np.einsum("nk,nkd->nd", coef, iiT.T)
        worst = max(worst, float(np.max(np.linalg.norm(proj - iiT(X, Y), axis=-1))))
    return worst


def cone_ii_envelope(deltas, n: int, rng):
    """max |II| of the conifold in C^4 at |w| = delta, per delta."""
    out = []
    for d in deltas:
        u = cone_points(n, rng, radius=d)
        out.append(float(cv.IITensor(cone_chart_real, u, metric=_gst_w_matrix).norm().max()))
    return np.array(out)


def resolved_sectional_samples(n: int, rng) -> np.ndarray:
    """Sectional curvature of the resolved conifold (Gauss equation in
    CP^1 x C^4) on random planes at random points."""
    u = cone_points(n, rng, radius=None)
    u[:, 2:] *= rng.uniform(0.3, 3.0, n)[:, None]
    X, Y = rng.normal(size=(2, n, 6))
    return cv.gauss_sectional(resolved_cone_real, u, X, Y, metric=G_HAT,
                              christoffel=cv.resolved_christoffel,
                              ambient_sectional=cv.resolved_ambient_sectional)


# ------------------------------------------------------------------ suites


def _rec(name, anchor, value, bound, passed, **kw):
    return CheckRecord(name, anchor, float(value), bound, bool(passed), **kw)


def suite_lagrangian(s: Settings) -> list[CheckRecord]:
    out = []
    rng = rng_for(s.seed, "exact-lagrangian")
    v = exact_lagrangian_residual(s.knot, 10000, rng)
    out.append(_rec("liouville_on_conormal", "conormal bundle is an exact Lagrangian", v, "< 1e-9",
                    v < 1e-9, samples=10000))
    a, b = isotropy_residuals(s.knot, s.eps, 10000, rng_for(s.seed, "isotropy"))
    out.append(_rec("omega_on_contraction", "contracted conormal bundle is isotropic", a, "< 1e-9",
                    a < 1e-9, samples=10000))
    out.append(_rec("gJ_on_contraction", "contracted conormal bundle is isotropic", b, "< 1e-9",
                    b < 1e-9, samples=10000))
    sampler = ct_sampler(s.knot, s.eps, polar_spec(*s.grid, s.r_range))
    field_ = PerturbationField(s.knot, s.eps)
    res = form_restriction_max(omega_tilde(field_), sampler, tol=s.tol)
    out.append(_rec("omega_tilde_on_ct", "transition of the perturbed bundle is Lagrangian",
                    res.value, "< 1e-7", res.value < 1e-7 and res.excluded_ok, samples=res.samples,
                    grid=res.grid, excluded=res.excluded))
    return out


def suite_tame(s: Settings) -> list[CheckRecord]:
    sigma, field_, pts = measure_sigma(s.knot, s.eps, s.r_range, s.sigma_samples, rng_for(s.seed, "sigma"))
    if s.eps * sigma >= 1.0:
        raise PreconditionError(f"refused: eps >= 1/sigma (eps={s.eps}, sigma={sigma:.4g}, "
                                f"1/sigma={1 / sigma:.4g})")
    out = []
    tr = pushforward_tameness(field_, pts, s.vector_samples, rng_for(s.seed, "pushforward"))
    lo, hi = 1 - s.eps * sigma - 1e-6, 1 + s.eps * sigma + 1e-6
    out.append(_rec("pushforward_ratio_min", "isotopy pushforward tames J", tr.inf_ratio,
                    f">= 1 - eps*sigma = {lo:.6g}", tr.inf_ratio >= lo, samples=tr.samples,
                    details={"sigma": sigma, "sup_ratio": tr.sup_ratio}))
    out.append(_rec("pushforward_ratio_max", "isotopy pushforward tames J", tr.sup_ratio,
                    f"<= 1 + eps*sigma = {hi:.6g}", tr.sup_ratio <= hi, samples=tr.samples))
    c1 = 1.0 / (1.0 - s.eps * sigma)
    c2 = 1.0 + 2.0 / (2 * s.eps) ** 2
    sampler = ct_sampler(s.knot, s.eps, polar_spec(*s.grid, s.r_range))
    tb = tameness_bounds(omega_tilde(field_), sampler, s.vector_samples, rng_for(s.seed, "ct-tame"),
                         raise_on_failure=False)
    out.append(_rec("omega_tilde_taming_constant", "transition of the perturbed bundle is a tame Lagrangian",
                    tb.constant, f"<= C1*C2 = {c1 * c2:.6g}", 0 < tb.inf_ratio and tb.constant <= c1 * c2 + 1e-6,
                    samples=tb.samples, grid=tb.grid,
                    details={"inf_ratio": tb.inf_ratio, "sup_ratio": tb.sup_ratio, "C1": c1, "C2": c2}))
    return out


def suite_bilipschitz(s: Settings) -> list[CheckRecord]:
    out = []
    for R in (0.5, 1.0, 2.0):
        res = resolution_bilipschitz(R, 2000, rng_for(s.seed, f"pi2-{R}"))
        ok = res.min_eig >= 1 - 1e-6 and res.max_eig <= 1 + 2 / R ** 2 + 1e-6
        out.append(_rec(f"resolution_R={R}", "resolution map is bi-Lipschitz away from the node",
                        res.max_eig, f"in [1, {1 + 2 / R ** 2:.6g}]", ok, samples=res.samples,
                        details={"min_eig": res.min_eig}))
    for R in (1.0, 2.0, 5.0):
        m = fs_pullback_max(R, 2000, rng_for(s.seed, f"fs-{R}"))
        out.append(_rec(f"fs_pullback_R={R}", "Fubini-Study pullback decays like 2/|w|^2", m,
                        f"<= {2 / R ** 2:.6g}", m <= 2 / R ** 2 + 1e-6, samples=2000))
    res = cone_chart_bilipschitz(4000, rng_for(s.seed, "cone"))
    ok = res.min_eig >= 1 / 20 - 1e-9 and res.max_eig <= 20 + 1e-9
    out.append(_rec("cone_chart", "cone chart is bi-Lipschitz for the comparison metric", res.constant,
                    "eigenvalues in [1/20, 20]", ok, samples=res.samples,
                    details={"min_eig": res.min_eig, "max_eig": res.max_eig}))
    lo, hi, n = fmap_bilipschitz(40, 100, rng_for(s.seed, "fmap"))
    out.append(_rec("rescaling_map", "unit-ball rescaling is bi-Lipschitz", max(hi, 1 / lo),
                    "eigenvalues in [1/4, 4]", lo >= 0.25 - 1e-9 and hi <= 4 + 1e-9, samples=n,
                    details={"min_eig": lo, "max_eig": hi}))
    return out


FIXTURES = {
    "s3": (lambda: sphere3_sampler(1.0), 1.0),
    "s3r2": (lambda: sphere3_sampler(2.0), 0.25),
    "clifford": (lambda: clifford_torus_sampler(), 0.0),
}


def suite_curvature(s: Settings) -> list[CheckRecord]:
    out = []
    names = [s.fixture] if s.fixture in FIXTURES else list(FIXTURES)
    for name in names:
        make, expected = FIXTURES[name]
        smp = make()
        u = smp.parameters()
        rng = rng_for(s.seed, f"fixture-{name}")
        X, Y = rng.normal(size=(2,) + u.shape)
        sec = cv.gauss_sectional(smp.param, u, X, Y)
        err = float(np.max(np.abs(sec - expected)))
        out.append(_rec(f"sectional_{name}", "Gauss equation for a classical fixture", err,
                        f"|sec - {expected}| < 1e-4", err < 1e-4, samples=len(u), grid=smp.grid.describe()))
    # Gauss equation against the intrinsic curvature of the induced metric
    smp = sphere3_sampler(1.0, counts=(3, 3, 3))
    u = smp.parameters()
    X, Y = rng_for(s.seed, "gauss-intrinsic").normal(size=(2,) + u.shape)
    intrinsic = cv.intrinsic_sectional(cv.induced_metric(smp.param), u, X, Y, h=5e-4)
    d = np.abs(cv.gauss_sectional(smp.param, u, X, Y) - intrinsic)
    out.append(_rec("gauss_vs_intrinsic_s3", "Gauss equation", float(d.max()), "< 1e-3", d.max() < 1e-3,
                    samples=len(u)))
    # Fubini-Study factor curvature, validated before use in the product formula
    uf = rng_for(s.seed, "fs-curv").normal(size=(16, 2))
    k = cv.intrinsic_sectional(cv.fs_metric_matrix, uf, [1.0, 0.0], [0.0, 1.0])
    e = float(np.max(np.abs(k - cv.FS_CURVATURE)))
    out.append(_rec("fubini_study_curvature", "product curvature of CP^1 x C^4", e,
                    f"|K - {cv.FS_CURVATURE}| < 1e-3", e < 1e-3, samples=16))
    secs = resolved_sectional_samples(64, rng_for(s.seed, "resolved-sec"))
    out.append(_rec("resolved_sectional_max", "resolved conifold has bounded sectional curvature",
                    float(np.max(np.abs(secs))), "finite (reported)", bool(np.all(np.isfinite(secs))),
                    samples=64))
    r = composition_identity_residual(rng_for(s.seed, "composition"))
    out.append(_rec("composition_identity", "second fundamental form under a map", r, "< 1e-5", r < 1e-5))
    deltas = np.array([1.0, 2.0, 4.0, 8.0])
    env = cone_ii_envelope(deltas, 200, rng_for(s.seed, "cone-ii"))
    c = float(np.max(env * deltas ** 2))
    slope = float(np.polyfit(np.log(deltas), np.log(env), 1)[0])
    trend = bool(np.all(np.diff(env) <= 1e-9))
    out.append(_rec("cone_ii_envelope", "second fundamental form of the cone is bounded away from the node",
                    c, "c = max delta^2 |II| <= 100 and nonincreasing", c <= 100 and trend, samples=800,
                    details={"deltas": deltas.tolist(), "max_norm": env.tolist(), "loglog_slope": slope}))
    t = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    worst = -np.inf
    for kn in (s.knot, torus_knot(2, 3)):
        a, b = cv.curve_ii_norms(lambda v, kn=kn: kn.point(v[..., 0]), t)
        worst = max(worst, float(np.max(a - b)))
    out.append(_rec("curve_ii_monotone", "second fundamental form shrinks in a totally geodesic chain", worst,
                    "II(curve/S3) - II(curve/R4) <= 1e-6", worst <= 1e-6, samples=400))
    H = cv.holomorphic_hessian(lambda w: w[..., 0] / w[..., 1], np.array([0.0, 1.0 + 0j]))
    e = float(np.max(np.abs(H - np.array([[0, -1], [-1, 0]]))))
    out.append(_rec("affine_chart_hessian", "covariant Hessian of the resolution extension", e, "< 1e-6",
                    e < 1e-6))
    return out


def suite_totally_real(s: Settings) -> list[CheckRecord]:
    sampler = ct_sampler(s.knot, s.eps, polar_spec(*s.grid, s.r_range))
    res = totally_real_angle(sampler)
    return [_rec("min_totally_real_angle", "tame Lagrangians are totally real", res.value, "> 0",
                 res.value > 0, samples=res.samples, grid=res.grid)]


def suite_stokes(s: Settings) -> list[CheckRecord]:
    rng = rng_for(s.seed, "stokes")
    residual = conormal_residual(s.knot)
    diff = bnd = 0.0
    for _ in range(s.discs):
        r = stokes_check(random_conormal_disc(s.knot, rng), residual)
        diff, bnd = max(diff, r.difference), max(bnd, abs(r.boundary))
    out = [_rec("stokes_difference", "area of discs with boundary on an exact Lagrangian", diff, "< 1e-6",
                diff < 1e-6, samples=s.discs),
           _rec("stokes_boundary", "area of discs with boundary on an exact Lagrangian", bnd, "< 1e-6",
                bnd < 1e-6, samples=s.discs)]
    z = stokes_check(zero_section_disc(rng), zero_section_residual)
    out.append(_rec("zero_section_disc", "area of discs ending on the zero section",
                    max(abs(z.interior), abs(z.boundary)), "< 1e-6",
                    max(abs(z.interior), abs(z.boundary)) < 1e-6))
    a = stokes_check(arbitrary_disc(rng))
    out.append(_rec("exact_form_disc", "Stokes theorem", a.difference, "< 1e-6", a.difference < 1e-6))
    return out


def suite_two_point(s: Settings) -> list[CheckRecord]:
    sampler = ct_sampler(s.knot, s.eps, polar_spec(*s.grid, s.r_range))
    mesh = build_mesh(sampler, k=s.neighbors, embed=embed_resolved)
    res = two_point_scan(mesh, s.rho, max_sources=500, rng=rng_for(s.seed, "two-point"))
    return [_rec("empirical_two_point_C", "transition of the perturbed bundle satisfies the 2-point estimate",
                 res.empirical_C, "finite", bool(np.isfinite(res.empirical_C)), samples=res.pairs,
                 grid="x".join(map(str, s.grid)),
                 details={"rho": s.rho, "components": mesh.n_components, "sources": res.sources,
                          "witnesses": [list(w) for w in res.witnesses[:3]]})]


RUNNERS: dict[str, Callable[[Settings], list[CheckRecord]]] = {
    "lagrangian": suite_lagrangian,
    "tame": suite_tame,
    "bilipschitz": suite_bilipschitz,
    "curvature": suite_curvature,
    "totally-real": suite_totally_real,
    "stokes": suite_stokes,
    "two-point": suite_two_point,
}


def report_constants(s: Settings) -> dict:
    """The measured constants for one configuration."""
    sigma, field_, pts = measure_sigma(s.knot, s.eps, s.r_range, s.sigma_samples, rng_for(s.seed, "sigma"))
    tr = pushforward_tameness(field_, pts, s.vector_samples, rng_for(s.seed, "pushforward"))
    R = 2 * s.eps
    bl = resolution_bilipschitz(R, 2000, rng_for(s.seed, f"pi2-{R}"))
    sampler = ct_sampler(s.knot, s.eps, polar_spec(*s.grid, s.r_range))
    angle = totally_real_angle(sampler)
    mesh = build_mesh(sampler, k=s.neighbors, embed=embed_resolved)
    tp = two_point_scan(mesh, s.rho, max_sources=500, rng=rng_for(s.seed, "two-point"))
    taming_bound = 1.0 / (1.0 - s.eps * sigma) if s.eps * sigma < 1 else float("inf")
    return {
        "sigma": sigma,
        "sigma_samples": len(pts),
        "taming_constant": tr.constant,
        "taming_bound": taming_bound,
        "taming_ratio_range": [tr.inf_ratio, tr.sup_ratio],
        "resolution_radius": R,
        "bilipschitz_constant": bl.max_eig,
        "bilipschitz_bound": 1 + 2 / R ** 2,
        "two_point_C": tp.empirical_C,
        "two_point_rho": s.rho,
        "min_totally_real_angle": angle.value,
    }


def settings_for(knot_spec: str = "unknot", **kw) -> Settings:
    return Settings(knot=parse_knot_spec(knot_spec), **kw)


__all__ = ["CheckRecord", "Settings", "SUITES", "RUNNERS", "FIXTURES", "report_constants", "rng_for",
           "settings_for"]
