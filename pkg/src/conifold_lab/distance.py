"""Graph geodesics on sampled submanifolds and the 2-point estimate.

Intrinsic distances are shortest paths in a symmetrised k-nearest-neighbour
graph whose edges carry chordal lengths in a Euclidean embedding of the
ambient space.  Ambient distances are chordal distances in the same
embedding.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from . import geom
from .conifold import lift_line
from .errors import ParameterError
from .knots import KnotCurve
from .conormal import conormal_xp
from .geom import TWO_PI


@dataclass
class SampleMesh:
    params: np.ndarray            # (N, k) parameter coordinates
    points: np.ndarray            # (N, D) ambient coordinates
    embedded: np.ndarray          # (N, E) Euclidean embedding used for lengths
    graph: sparse.csr_matrix      # symmetric weighted adjacency
    n_components: int
    labels: np.ndarray

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def connected(self) -> bool:
        return self.n_components == 1

    def ambient_distance(self, i, j):
        return np.linalg.norm(self.embedded[i] - self.embedded[j], axis=-1)


def embed_resolved(base):
    """Euclidean embedding of resolved-conifold coordinates (zeta, w): the
    line [u:v] goes to the sphere of radius 1/2 in R^3 (isometric to the
    Fubini-Study CP^1 of curvature 4) and w to its (x, p) coordinates."""
    base = np.asarray(base, float)
    w = geom.complex_view(base[..., 2:])
    u, v = lift_line(w)
    uv = u * np.conj(v)
    sphere = 0.5 * np.stack([2 * uv.real, 2 * uv.imag, np.abs(u) ** 2 - np.abs(v) ** 2], -1)
    x, p = geom.w_to_xp(w)
    return np.concatenate([sphere, x, p], -1)


def mesh_from_points(points, params=None, k: int = 12, embed: Optional[Callable] = None) -> SampleMesh:
    """kNN graph on the given points (symmetrised, chordal weights)."""
    points = np.asarray(points, float)
    if points.ndim != 2 or len(points) == 0:
        raise ParameterError("cannot build a mesh from an empty point set")
    if k < 1:
        raise ParameterError("neighbour count must be positive")
    params = np.zeros((len(points), 0)) if params is None else np.asarray(params, float)
    emb = embed(points) if embed is not None else points
    n = len(emb)
    kk = min(k, n - 1)
    tree = cKDTree(emb)
    dist, idx = tree.query(emb, k=kk + 1)
    rows = np.repeat(np.arange(n), kk)
    cols = idx[:, 1:].ravel()
    wts = dist[:, 1:].ravel()
    keep = wts > 0
    g = sparse.coo_matrix((wts[keep], (rows[keep], cols[keep])), shape=(n, n)).tocsr()
    g = g.maximum(g.T).tocsr()
    ncomp, labels = connected_components(g, directed=False)
    if ncomp > 1:
        warnings.warn(f"sample graph is disconnected ({ncomp} components)", RuntimeWarning, stacklevel=2)
    return SampleMesh(params, points, emb, g, int(ncomp), labels)


def polyline_mesh(points, params=None, closed: bool = False) -> SampleMesh:
    """Path graph through the points in order (a sampled curve)."""
    points = np.asarray(points, float)
    if points.ndim != 2 or len(points) < 2:
        raise ParameterError("a polyline needs at least two points")
    n = len(points)
    i = np.arange(n - 1)
    j = i + 1
    if closed:
        i, j = np.append(i, n - 1), np.append(j, 0)
    w = np.linalg.norm(points[i] - points[j], axis=-1)
    g = sparse.coo_matrix((w, (i, j)), shape=(n, n)).tocsr()
    g = g.maximum(g.T).tocsr()
    params = np.zeros((n, 0)) if params is None else np.asarray(params, float)
    return SampleMesh(params, points, points, g, 1, np.zeros(n, int))


def build_mesh(sampler, grid=None, k: int = 12, embed: Optional[Callable] = None) -> SampleMesh:
    """Mesh of a SubmanifoldSampler on its grid (or the given GridSpec)."""
    if grid is not None:
        u = grid.points()
    else:
        u = sampler.parameters()
    if len(u) == 0:
        raise ParameterError("empty sampling grid")
    return mesh_from_points(sampler.param(u), u, k, embed)


def intrinsic_distance(mesh: SampleMesh, i: int, j: int) -> float:
    """Shortest-path distance (inf across components)."""
    if i == j:
        return 0.0
    d = dijkstra(mesh.graph, directed=False, indices=i)
    return float(d[j])


def distances_from(mesh: SampleMesh, sources, limit: float = np.inf) -> np.ndarray:
    return dijkstra(mesh.graph, directed=False, indices=np.asarray(sources), limit=limit)


@dataclass
class TwoPointResult:
    empirical_C: float
    witnesses: list
    pairs: int
    sources: int
    rho: float
    extra: dict = field(default_factory=dict)


def two_point_scan(mesh: SampleMesh, rho: float, max_sources: Optional[int] = None,
                   rng: Optional[np.random.Generator] = None, batch: int = 64,
                   min_ambient: float = 1e-12) -> TwoPointResult:
    """max dist^L / dist^M over pairs with dist^M < rho.

    With ``max_sources`` only pairs whose first vertex lies in a seeded
    random subset of sources are scanned.  Each source is searched up to a
    generous cutoff first; sources with any qualifying pair beyond the cutoff
    are re-run without it.
    """
    if not rho > 0:
        raise ParameterError("rho must be positive")
    pairs = cKDTree(mesh.embedded).query_pairs(rho, output_type="ndarray")
    if len(pairs) == 0:
        raise ParameterError(f"no pairs closer than rho={rho}; try a larger rho")
    pairs = np.concatenate([pairs, pairs[:, ::-1]])
    amb = mesh.ambient_distance(pairs[:, 0], pairs[:, 1])
    pairs, amb = pairs[amb > min_ambient], amb[amb > min_ambient]
    sources = np.unique(pairs[:, 0])
    if max_sources is not None and len(sources) > max_sources:
        rng = np.random.default_rng(0) if rng is None else rng
        sources = np.sort(rng.choice(sources, max_sources, replace=False))
    sel = np.isin(pairs[:, 0], sources)
    pairs, amb = pairs[sel], amb[sel]
    order = np.argsort(pairs[:, 0], kind="stable")
    pairs, amb = pairs[order], amb[order]
    ratios = np.empty(len(pairs))
    limit = 20.0 * rho
    starts = np.searchsorted(pairs[:, 0], sources)
    ends = np.searchsorted(pairs[:, 0], sources, side="right")
    for b in range(0, len(sources), batch):
        src = sources[b:b + batch]
        D = distances_from(mesh, src, limit)
        for r, s in enumerate(src):
            a, e = starts[b + r], ends[b + r]
            d = D[r, pairs[a:e, 1]]
            if np.any(np.isinf(d)):
                d = distances_from(mesh, [s])[0, pairs[a:e, 1]]
            ratios[a:e] = d / amb[a:e]
    top = np.argsort(-ratios, kind="stable")[:10]
    witnesses = [(int(pairs[i, 0]), int(pairs[i, 1]), float(ratios[i])) for i in top]
    return TwoPointResult(float(ratios.max()), witnesses, int(len(pairs)), int(len(sources)), rho)


# ------------------------------------------------------------------ fixtures


def circle_mesh(n: int = 256, k: int = 2) -> SampleMesh:
    t = np.linspace(0.0, TWO_PI, n, endpoint=False)
    return mesh_from_points(np.stack([np.cos(t), np.sin(t)], -1), t[:, None], k)


def flat_grid_mesh(n: int, k: int = 8, size: float = 1.0) -> SampleMesh:
    """Uniform n x n grid of the square [0, size]^2 (exact geodesics are straight)."""
    a = np.linspace(0.0, size, n)
    P = np.stack(np.meshgrid(a, a, indexing="ij"), -1).reshape(-1, 2)
    return mesh_from_points(P, P, k)


def sin_exp_curve(x):
    return np.sin(np.pi * np.exp(x))


def sin_exp_fixture(x_max: float = 3.5, ds: float = 0.005, x_min: float = 0.0):
    """Arclength-uniform samples of the graph y = sin(pi e^x) with the zeros
    x = ln n inserted as vertices.  Returns (mesh, zero_x, zero_index)."""
    fine = np.linspace(x_min, x_max, 400001)
    y = sin_exp_curve(fine)
    seg = np.hypot(np.diff(fine), np.diff(y))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.arange(0.0, s[-1], ds)
    xs = np.interp(targets, s, fine)
    n0 = int(np.ceil(np.exp(x_min)))
    zeros = np.log(np.arange(max(n0, 1), int(np.floor(np.exp(x_max))) + 1))
    zeros = zeros[(zeros >= x_min) & (zeros <= x_max)]
    xs = np.unique(np.concatenate([xs, zeros, [x_max]]))
    pts = np.stack([xs, sin_exp_curve(xs)], -1)
    mesh = polyline_mesh(pts, xs[:, None])
    zero_index = np.searchsorted(xs, zeros)
    return mesh, zeros, zero_index


def consecutive_zero_ratios(mesh: SampleMesh, zero_index) -> np.ndarray:
    """dist^L / dist^M between consecutive zeros of the fixture."""
    zi = np.asarray(zero_index)
    D = distances_from(mesh, zi[:-1])
    dl = D[np.arange(len(zi) - 1), zi[1:]]
    return dl / mesh.ambient_distance(zi[:-1], zi[1:])


def window_ratios(mesh: SampleMesh, zeros, zero_index, windows) -> list[float]:
    """Largest consecutive-zero ratio with the left zero inside each window."""
    r = consecutive_zero_ratios(mesh, zero_index)
    left = np.asarray(zeros)[:-1]
    out = []
    for lo, hi in windows:
        sel = (left >= lo) & (left < hi)
        out.append(float(r[sel].max()) if np.any(sel) else float("nan"))
    return out


def slice_points(knot: KnotCurve, eps: float, r: float, n_t: int, n_theta: int):
    """The slice |p| = r of the regularised contraction of the conormal bundle."""
    t, th = np.meshgrid(np.linspace(0, TWO_PI, n_t, endpoint=False),
                        np.linspace(0, TWO_PI, n_theta, endpoint=False), indexing="ij")
    t, th = t.ravel(), th.ravel()
    x, p = conormal_xp(knot, t, r * np.cos(th), r * np.sin(th))
    x = x * np.sqrt(r * r + eps * eps)
    return np.concatenate([x, p], -1), np.stack([t, th], -1)


def dilation(eps: float, r: float):
    """(x, p) -> (x sqrt((r^2+eps^2)/(1+eps^2)), r p), taking the slice r=1 to r."""
    a = np.sqrt((r * r + eps * eps) / (1.0 + eps * eps))

    def f(pts):
        pts = np.asarray(pts, float)
        return np.concatenate([a * pts[..., :4], r * pts[..., 4:]], -1)

    return f


def scaling_factors(mesh: SampleMesh, fmap: Callable, pairs) -> np.ndarray:
    """Ratios of shortest-path lengths after mapping every vertex by ``fmap``
    (same graph, edge lengths recomputed)."""
    g = mesh.graph.tocoo()
    img = fmap(mesh.points)
    w = np.linalg.norm(img[g.row] - img[g.col], axis=-1)
    g2 = sparse.csr_matrix((w, (g.row, g.col)), shape=g.shape)
    pairs = np.asarray(pairs)
    d1 = dijkstra(mesh.graph, directed=False, indices=pairs[:, 0])[np.arange(len(pairs)), pairs[:, 1]]
    d2 = dijkstra(g2, directed=False, indices=pairs[:, 0])[np.arange(len(pairs)), pairs[:, 1]]
    return d2 / d1


def export_csv(mesh: SampleMesh, path_or_file) -> None:
    """Write point id, parameters and ambient coordinates."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"u{i}" for i in range(mesh.params.shape[1])]
                   + [f"c{i}" for i in range(mesh.points.shape[1])])
        for i in range(mesh.size):
            w.writerow([i] + [repr(float(v)) for v in mesh.params[i]]
                       + [repr(float(v)) for v in mesh.points[i]])
    finally:
        if own:
            fh.close()
