"""Smooth closed curves on the unit sphere S^3 in R^4 with exact derivatives."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .errors import DegenerateError, ParameterError
from .geom import TWO_PI

Evaluator = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]

# |x(t)| below this makes the radial projection of a Fourier series unreliable
MIN_RADIUS = 0.1
MIN_SPEED = 1e-8

# (cos t + 2 cos 2t, sin t - 2 sin 2t, sin 3t, 0.5), a trefoil pushed into S^3
TREFOIL_LIKE = [
    {"axis": 0, "harmonic": 1, "cos": 1.0, "sin": 0.0},
    {"axis": 0, "harmonic": 2, "cos": 2.0, "sin": 0.0},
    {"axis": 1, "harmonic": 1, "cos": 0.0, "sin": 1.0},
    {"axis": 1, "harmonic": 2, "cos": 0.0, "sin": -2.0},
    {"axis": 2, "harmonic": 3, "cos": 0.0, "sin": 1.0},
    {"axis": 3, "harmonic": 0, "cos": 0.5, "sin": 0.0},
]


@dataclass(frozen=True, eq=False)
class KnotCurve:
    """t -> (k, k', k'') for t in [0, 2 pi), vectorised over t.

    ``speed`` is 'unit', 'constant' or 'general'.  Instances hash by identity
    so per-knot tables can be cached.
    """

    name: str
    evaluator: Evaluator
    speed: str
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.evaluator(np.asarray(t, float))

    def point(self, t):
        return self(t)[0]

    def velocity(self, t):
        return self(t)[1]

    def unit_tangent(self, t):
        _, kd, _ = self(t)
        return kd / np.linalg.norm(kd, axis=-1, keepdims=True)

    def spec(self) -> str:
        return self.params.get("spec", self.name)


def unknot() -> KnotCurve:
    def ev(t):
        c, s, z = np.cos(t), np.sin(t), np.zeros_like(t)
        k = np.stack([c, s, z, z], axis=-1)
        kd = np.stack([-s, c, z, z], axis=-1)
        return k, kd, -k

    return KnotCurve("unknot", ev, "unit", {"spec": "unknot"})


def torus_knot(m: int, n: int) -> KnotCurve:
    """k(t) = (e^{imt}, e^{int}) / sqrt(2), packed as (x1 + i x2, x3 + i x4)."""
    if int(m) != m or int(n) != n:
        raise ParameterError("torus knot parameters must be integers")
    m, n = int(m), int(n)
    if m == n or math.gcd(m, n) != 1:
        raise ParameterError(f"torus knot needs gcd(m, n) = 1 and m != n, got ({m}, {n})")
    c = 1.0 / math.sqrt(2.0)

    def ev(t):
        cm, sm, cn, sn = np.cos(m * t), np.sin(m * t), np.cos(n * t), np.sin(n * t)
        k = c * np.stack([cm, sm, cn, sn], axis=-1)
        kd = c * np.stack([-m * sm, m * cm, -n * sn, n * cn], axis=-1)
        kdd = -c * np.stack([m * m * cm, m * m * sm, n * n * cn, n * n * sn], axis=-1)
        return k, kd, kdd

    return KnotCurve(f"torus({m},{n})", ev, "constant", {"spec": f"torus:{m},{n}", "m": m, "n": n})


def _series(coefficients):
    axes, harm, ca, sa = [], [], [], []
    for term in coefficients:
        axis = int(term["axis"])
        if axis not in range(4):
            raise ParameterError(f"axis must be in 0..3, got {axis}")
        axes.append(axis)
        harm.append(int(term["harmonic"]))
        ca.append(float(term.get("cos", 0.0)))
        sa.append(float(term.get("sin", 0.0)))
    if not axes:
        raise ParameterError("empty Fourier series")
    return np.array(axes), np.array(harm, float), np.array(ca), np.array(sa)


def fourier_knot(coefficients: Iterable[dict], name: str = "fourier") -> KnotCurve:
    """Radial projection x(t)/|x(t)| of a truncated Fourier series in R^4.

    Each term is ``{axis, harmonic, cos, sin}`` and contributes
    ``cos * cos(h t) + sin * sin(h t)`` to coordinate ``axis``.
    """
    coefficients = list(coefficients)
    axes, harm, ca, sa = _series(coefficients)
    onehot = np.eye(4)[axes]                                # (T, 4)

    def raw(t):
        ht = t[..., None] * harm                            # (..., T)
        c, s = np.cos(ht), np.sin(ht)
        x = (ca * c + sa * s) @ onehot
        xd = (harm * (-ca * s + sa * c)) @ onehot
        xdd = (-harm ** 2 * (ca * c + sa * s)) @ onehot
        return x, xd, xdd

    def ev(t):
        x, xd, xdd = raw(t)
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        k = x / r
        rd = np.sum(k * xd, axis=-1, keepdims=True)
        kd = (xd - rd * k) / r
        rdd = np.sum(kd * xd + k * xdd, axis=-1, keepdims=True)
        kdd = (xdd - rdd * k - 2.0 * rd * kd) / r
        return k, kd, kdd

    ts = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
    x, _, _ = raw(ts)
    if np.min(np.linalg.norm(x, axis=-1)) < MIN_RADIUS:
        raise ParameterError("Fourier series passes too close to the origin")
    _, kd, _ = ev(ts)
    if np.min(np.linalg.norm(kd, axis=-1)) < MIN_SPEED:
        raise ParameterError("Fourier series does not define an immersed curve")
    return KnotCurve(name, ev, "general", {"spec": name, "coefficients": coefficients})


def load_fourier_coefficients(path) -> list[dict]:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ParameterError("Fourier coefficient file must hold a JSON array")
    return data


def parse_knot_spec(spec: str) -> KnotCurve:
    """'unknot', 'torus:m,n' or 'fourier:<path to JSON coefficients>'."""
    spec = spec.strip()
    if spec == "unknot":
        return unknot()
    kind, _, arg = spec.partition(":")
    if kind == "torus":
        try:
            m, n = (int(a) for a in arg.split(","))
        except ValueError:
            raise ParameterError(f"bad torus knot spec {spec!r}") from None
        return torus_knot(m, n)
    if kind == "fourier" and arg:
        try:
            coeffs = load_fourier_coefficients(arg)
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParameterError(f"cannot read Fourier coefficients: {exc}") from None
        knot = fourier_knot(coeffs, name=spec)
        return knot
    raise ParameterError(f"unknown knot spec {spec!r}")


def circular_gap(t1, t2):
    d = np.abs(np.mod(t1 - t2, TWO_PI))
    return np.minimum(d, TWO_PI - d)


def min_self_distance(knot: KnotCurve, min_gap: float = 0.5, n: int = 1024) -> float:
    """Sampled min of |k(t) - k(t')| over parameter pairs at least ``min_gap`` apart."""
    ts = np.linspace(0.0, TWO_PI, n, endpoint=False)
    k = knot.point(ts)
    d = np.linalg.norm(k[:, None, :] - k[None, :, :], axis=-1)
    mask = circular_gap(ts[:, None], ts[None, :]) > min_gap
    return float(np.min(d[mask]))


class NearestParameter:
    """Projection of unit vectors onto the knot: t*(y) minimising |y - k(t)|."""

    def __init__(self, knot: KnotCurve, n: int = 2048, iterations: int = 12):
        self.knot = knot
        self.ts = np.linspace(0.0, TWO_PI, n, endpoint=False)
        self.table = knot.point(self.ts)
        self.iterations = iterations

    def __call__(self, y):
        """Return (t*, cos of the spherical distance) for unit vectors y (..., 4)."""
        y = np.asarray(y, float)
        idx = np.argmax(y @ self.table.T, axis=-1)
        t = self.ts[idx]
        step = self.ts[1] - self.ts[0]
        for _ in range(self.iterations):
            _, kd, kdd = self.knot(t)
            f = np.sum(y * kd, axis=-1)
            fp = np.sum(y * kdd, axis=-1)
            # maximise y.k(t); fall back to a bounded step off the concave region
            dt = np.where(fp < 0, -f / np.where(fp < 0, fp, -1.0), np.sign(f) * step)
            t = t + np.clip(dt, -step, step)
        k = self.knot.point(t)
        return np.mod(t, TWO_PI), np.sum(y * k, axis=-1)


def check_immersed(knot: KnotCurve, t) -> None:
    _, kd, _ = knot(t)
    if np.any(np.linalg.norm(kd, axis=-1) < 1e-12):
        raise DegenerateError(f"{knot.name}: velocity vanishes")
