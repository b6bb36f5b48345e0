"""Sampling engines: form restrictions, tameness, bi-Lipschitz bounds and
totally-real angles.  Every result carries its sample count and grid so that
reports state sampled bounds, never suprema."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import geom
from ..errors import DegenerateError, PreconditionError
from .handles import FormHandle, MetricHandle, SubmanifoldSampler

MAX_EXCLUDED_FRACTION = 1e-3


@dataclass
class SampledBound:
    value: float
    samples: int
    grid: str
    excluded: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def excluded_ok(self) -> bool:
        return self.excluded <= MAX_EXCLUDED_FRACTION * max(self.samples + self.excluded, 1)


def _condition(gram):
    ev = np.linalg.eigvalsh(gram)
    with np.errstate(divide="ignore"):
        return np.where(ev[..., 0] > 0, np.sqrt(ev[..., -1] / np.where(ev[..., 0] > 0, ev[..., 0], 1.0)), np.inf)


def form_restriction_max(form: FormHandle, sampler: SubmanifoldSampler, u=None,
                         tol: geom.Tolerances = geom.DEFAULT_TOL) -> SampledBound:
    """max |form(T_i, T_j)| over the grid with each tangent vector normalised
    in the sampler's metric.  Bases with condition number above the tolerance
    are excluded and counted."""
    u = sampler.parameters() if u is None else u
    base = sampler.points(u)
    T = sampler.tangent_basis(u)                            # (N, k, D)
    metric = sampler.metric_handle()
    gram = metric.gram(base, T)
    good = _condition(gram) <= tol.max_condition
    norms = np.sqrt(np.abs(np.diagonal(gram, axis1=-2, axis2=-1)))
    Tn = T / np.where(norms > 0, norms, 1.0)[..., None]
    k = T.shape[-2]
    ii, jj = np.triu_indices(k, 1)
    vals = form(base[:, None, :], Tn[:, ii, :], Tn[:, jj, :])   # (N, pairs)
    per_sample = np.max(np.abs(vals), axis=-1)
    kept = per_sample[good]
    worst = int(np.argmax(np.where(good, per_sample, -np.inf))) if kept.size else -1
    return SampledBound(float(kept.max()) if kept.size else float("nan"), int(kept.size),
                        sampler.grid.describe(), int((~good).sum()),
                        {"witness_parameters": u[worst].tolist() if worst >= 0 else None})


def tameness_ratios(form: FormHandle, J: Callable, metric: MetricHandle, base, vectors):
    """form(X, JX) / metric(X, X) for vectors (N, n, D) at base (N, D)."""
    b = np.asarray(base)[:, None, :]
    JX = J(b, vectors)
    return form(b, vectors, JX) / metric(b, vectors, vectors)


@dataclass
class TamenessResult:
    inf_ratio: float
    sup_ratio: float
    samples: int
    grid: str
    witness: Optional[dict] = None

    @property
    def constant(self) -> float:
        """Smallest C with C^-1 <= ratio <= C on the samples."""
        if self.inf_ratio <= 0:
            return float("inf")
        return float(max(self.sup_ratio, 1.0 / self.inf_ratio))


class TamingFailure(PreconditionError):
    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


def tameness_bounds(form: FormHandle, sampler: SubmanifoldSampler, vector_samples: int = 8,
                    rng: np.random.Generator | None = None, J=None, metric: MetricHandle | None = None,
                    u=None, raise_on_failure: bool = True) -> TamenessResult:
    """inf and sup of form(X, JX)/g(X, X) over random ambient tangent vectors X at
    the sampler's base points."""
    rng = np.random.default_rng(0) if rng is None else rng
    J = J if J is not None else sampler.J
    metric = metric if metric is not None else sampler.metric_handle()
    u = sampler.parameters() if u is None else u
    base = sampler.points(u)
    X = sampler.random_ambient(base, rng, vector_samples)
    ratios = tameness_ratios(form, J, metric, base, X)
    return _summarise(ratios, base, X, sampler.grid.describe(), raise_on_failure)


def _summarise(ratios, base, X, grid, raise_on_failure):
    flat = ratios.reshape(-1)
    i = int(np.argmin(flat))
    witness = None
    if flat[i] <= 0:
        n = ratios.shape[-1]
        witness = {"base": base[i // n].tolist(), "vector": X.reshape(-1, X.shape[-1])[i].tolist(),
                   "ratio": float(flat[i])}
        if raise_on_failure:
            raise TamingFailure("nonpositive taming ratio", witness)
    return TamenessResult(float(flat.min()), float(flat.max()), int(flat.size), grid, witness)


def tameness_on_points(form: FormHandle, J, metric: MetricHandle, base, vectors,
                       raise_on_failure: bool = True) -> TamenessResult:
    ratios = tameness_ratios(form, J, metric, base, vectors)
    return _summarise(ratios, base, vectors, f"{len(base)} points", raise_on_failure)


@dataclass
class BiLipschitzResult:
    min_eig: float
    max_eig: float
    samples: int
    grid: str
    excluded: int = 0

    @property
    def constant(self) -> float:
        return float(max(self.max_eig, 1.0 / self.min_eig))


def generalized_eigenvalues(A, B):
    """Eigenvalues of A relative to B (both symmetric, B positive definite),
    batched over leading dimensions."""
    L = np.linalg.cholesky(B)
    Linv = np.linalg.inv(L)
    C = Linv @ A @ np.swapaxes(Linv, -1, -2)
    return np.linalg.eigvalsh(0.5 * (C + np.swapaxes(C, -1, -2)))


def bilipschitz_bounds(fmap: Callable, source_metric: Callable, target_metric: Callable, points,
                       jac: Callable | None = None, grid: str = "",
                       tol: geom.Tolerances = geom.DEFAULT_TOL) -> BiLipschitzResult:
    """Extreme generalised eigenvalues of the pulled-back target metric against
    the source metric.

    ``source_metric(points)`` gives (N, n, n) matrices, ``target_metric(images)``
    gives (N, m, m); ``fmap`` is vectorised (N, n) -> (N, m).  Points where the
    pullback is numerically singular are excluded and counted.
    """
    points = np.asarray(points, float)
    D = jac(points) if jac is not None else geom.jacobian_fd(fmap, points, tol=tol)
    G = target_metric(fmap(points))
    A = np.swapaxes(D, -1, -2) @ G @ D
    B = source_metric(points)
    ev = generalized_eigenvalues(A, B)
    good = ev[..., 0] > ev[..., -1] / tol.max_condition
    if not np.any(good):
        raise DegenerateError("pullback metric is singular at every sample")
    ev = ev[good]
    return BiLipschitzResult(float(ev[:, 0].min()), float(ev[:, -1].max()), int(good.sum()),
                             grid or f"{len(points)} points", int((~good).sum()))


def principal_angles(metric: MetricHandle, base, A, B):
    """Principal angles between span(A) and span(B), A, B of shape (..., k, D)."""
    b = np.asarray(base)[..., None, None, :]
    gA = metric(b, A[..., :, None, :], A[..., None, :, :])
    gB = metric(b, B[..., :, None, :], B[..., None, :, :])
    gAB = metric(b, A[..., :, None, :], B[..., None, :, :])
    La = np.linalg.cholesky(gA)
    Lb = np.linalg.cholesky(gB)
    # coefficients of orthonormal bases are L^-1; cross Gram is L_a^-1 gAB L_b^-T
    C = np.linalg.solve(La, np.swapaxes(np.linalg.solve(Lb, np.swapaxes(gAB, -1, -2)), -1, -2))
    s = np.linalg.svd(C, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


def totally_real_angle_values(sampler: SubmanifoldSampler, u=None, J=None) -> np.ndarray:
    """Minimal principal angle between TL and J(TL) at each sample."""
    u = sampler.parameters() if u is None else u
    J = J if J is not None else sampler.J
    base = sampler.points(u)
    T = sampler.tangent_basis(u)
    JT = J(base[:, None, :], T)
    ang = principal_angles(sampler.metric_handle(), base, T, JT)
    return np.min(ang, axis=-1)


def totally_real_angle(sampler: SubmanifoldSampler, u=None, J=None) -> SampledBound:
    vals = totally_real_angle_values(sampler, u, J)
    return SampledBound(float(vals.min()), int(vals.size), sampler.grid.describe())
