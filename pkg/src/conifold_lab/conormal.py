"""Orthonormal frames along knots, conormal bundles and the perturbation field.

The conormal bundle of a knot k is parametrised by
``(t, alpha, beta) -> (k(t), alpha p1(t) + beta p2(t))`` where
``(k, tau, p1, p2)`` is an orthonormal frame of R^4 along the knot.  The
perturbed bundle shifts the fibre by ``eps * tau``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, ParameterError
from .geom import DEFAULT_TOL, TWO_PI, PhasePoint, TangentVec, Tolerances, jacobian_fd
from .knots import KnotCurve, NearestParameter, min_self_distance

# ------------------------------------------------------------------ frames


def cross4(a, b, c):
    """Triple cross product in R^4: the vector X with X.d = det[a, b, c, d]."""
    m = np.stack(np.broadcast_arrays(a, b, c), axis=-2)     # (..., 3, 4)
    cols = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]
    out = [(-1) ** (i + 1) * np.linalg.det(m[..., cols[i]]) for i in range(4)]
    return np.stack(out, axis=-1)


@dataclass(frozen=True)
class Frame:
    k: np.ndarray
    tau: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    def matrix(self) -> np.ndarray:
        """Rows k, tau, p1, p2."""
        return np.stack([self.k, self.tau, self.p1, self.p2], axis=-2)


@dataclass(frozen=True)
class ConormalCoords:
    t: float
    alpha: float
    beta: float

    @property
    def r(self) -> float:
        return float(np.hypot(self.alpha, self.beta))

    @property
    def theta(self) -> float:
        return float(np.mod(np.arctan2(self.beta, self.alpha), TWO_PI))

    @classmethod
    def polar(cls, t, r, theta) -> "ConormalCoords":
        if r < 0:
            raise ParameterError("r must be nonnegative")
        return cls(t, r * np.cos(theta), r * np.sin(theta))


def _project_out(s, k, tau):
    return s - np.sum(s * k, -1, keepdims=True) * k - np.sum(s * tau, -1, keepdims=True) * tau


class FrameField:
    """A smooth periodic orthonormal frame (k, tau, p1, p2) along a knot.

    Built once per knot: p1 is carried around a grid by repeated Gram-Schmidt
    against (k, tau) starting from the coordinate axis most orthogonal to them,
    the closing rotation (holonomy) is spread linearly over the loop, and the
    result is turned into a trigonometric seed s(t) (modes below ``coeff_cut``
    are dropped; the seed only has to stay away from span(k, tau)).  At any t the frame is
    Gram-Schmidt of s(t), so it is exactly orthonormal, smooth and periodic,
    with derivatives available in closed form.
    """

    def __init__(self, knot: KnotCurve, n: int = 512, coeff_cut: float = 1e-7):
        self.knot = knot
        ts = np.linspace(0.0, TWO_PI, n, endpoint=False)
        k, kd, _ = knot(ts)
        speed = np.linalg.norm(kd, axis=-1)
        if np.min(speed) < 1e-12:
            raise DegenerateError(f"{knot.name}: velocity vanishes on the frame grid")
        tau = kd / speed[:, None]

        resid = _project_out(np.eye(4), k[0], tau[0])
        seed = np.eye(4)[int(np.argmax(np.linalg.norm(resid, axis=-1)))]
        p1 = np.empty((n + 1, 4))
        cur = seed
        for j in range(n + 1):
            q = _project_out(cur, k[j % n], tau[j % n])
            cur = q / np.linalg.norm(q)
            p1[j] = cur
        p2_0 = cross4(k[0], tau[0], p1[0])
        holonomy = np.arctan2(p1[n] @ p2_0, p1[n] @ p1[0])
        p1 = p1[:n]
        p2 = cross4(k, tau, p1)
        ang = -holonomy * ts / TWO_PI
        table = np.cos(ang)[:, None] * p1 + np.sin(ang)[:, None] * p2
        self.holonomy = float(holonomy)
        self.table_t = ts
        self.table_p1 = table

        coef = np.fft.rfft(table, axis=0) / n               # (n//2 + 1, 4)
        if n % 2 == 0:
            coef = coef[:-1]                                # drop the Nyquist mode
        scale = np.max(np.abs(coef))
        keep = np.nonzero(np.max(np.abs(coef), axis=1) > coeff_cut * scale)[0]
        self.modes = keep.astype(float)
        weights = np.where(keep == 0, 1.0, 2.0)[:, None]
        self.coef = coef[keep] * weights

    def seed(self, t):
        t = np.asarray(t, float)
        flat = t.reshape(-1)
        s = np.empty((flat.size, 4))
        sd = np.empty((flat.size, 4))
        for lo in range(0, flat.size, 8192):
            ph = np.exp(1j * flat[lo:lo + 8192, None] * self.modes)
            s[lo:lo + 8192] = np.real(ph @ self.coef)
            sd[lo:lo + 8192] = np.real((1j * self.modes * ph) @ self.coef)
        return s.reshape(t.shape + (4,)), sd.reshape(t.shape + (4,))

    def __call__(self, t, derivative: bool = False):
        t = np.asarray(t, float)
        k, kd, kdd = self.knot(t)
        speed = np.linalg.norm(kd, axis=-1, keepdims=True)
        if np.any(speed < 1e-12):
            raise DegenerateError(f"{self.knot.name}: |k'| < 1e-12")
        tau = kd / speed
        s, sd = self.seed(t)
        q = _project_out(s, k, tau)
        qn = np.linalg.norm(q, axis=-1, keepdims=True)
        p1 = q / qn
        p2 = cross4(k, tau, p1)
        frame = Frame(k, tau, p1, p2)
        if not derivative:
            return frame

        def dot(a, b):
            return np.sum(a * b, axis=-1, keepdims=True)

        taud = (kdd - tau * dot(tau, kdd)) / speed
        qd = (sd - (dot(sd, k) + dot(s, kd)) * k - dot(s, k) * kd
              - (dot(sd, tau) + dot(s, taud)) * tau - dot(s, tau) * taud)
        p1d = (qd - p1 * dot(p1, qd)) / qn
        p2d = cross4(kd, tau, p1) + cross4(k, taud, p1) + cross4(k, tau, p1d)
        return frame, Frame(kd, taud, p1d, p2d)


@functools.lru_cache(maxsize=32)
def frame_field(knot: KnotCurve) -> FrameField:
    return FrameField(knot)


def frame_at(knot: KnotCurve, t: float) -> Frame:
    f = frame_field(knot)(np.asarray(t, float))
    return f


# -------------------------------------------------------- parametrisations


def conormal_xp(knot: KnotCurve, t, alpha, beta, eps: float = 0.0):
    """Vectorised (x, p) of the (perturbed) conormal bundle."""
    if eps < 0:
        raise ParameterError("eps must be nonnegative")
    t, alpha, beta = np.broadcast_arrays(*(np.asarray(a, float) for a in (t, alpha, beta)))
    fr = frame_field(knot)(t)
    p = alpha[..., None] * fr.p1 + beta[..., None] * fr.p2 + eps * fr.tau
    return fr.k, p


def conormal_tangents(knot: KnotCurve, t, alpha, beta, eps: float = 0.0):
    """Tangent vectors (d/dt, d/dalpha, d/dbeta) as (..., 3, 8) arrays."""
    t, alpha, beta = np.broadcast_arrays(*(np.asarray(a, float) for a in (t, alpha, beta)))
    fr, dfr = frame_field(knot)(t, derivative=True)
    a, b = alpha[..., None], beta[..., None]
    zero = np.zeros_like(fr.k)
    dt = np.concatenate([dfr.k, a * dfr.p1 + b * dfr.p2 + eps * dfr.tau], axis=-1)
    da = np.concatenate([zero, fr.p1], axis=-1)
    db = np.concatenate([zero, fr.p2], axis=-1)
    return np.stack([dt, da, db], axis=-2)


def conormal_point(knot: KnotCurve, coords: ConormalCoords) -> PhasePoint:
    x, p = conormal_xp(knot, coords.t, coords.alpha, coords.beta)
    return PhasePoint(x, p)


def perturbed_conormal_point(knot: KnotCurve, eps: float, coords: ConormalCoords) -> PhasePoint:
    x, p = conormal_xp(knot, coords.t, coords.alpha, coords.beta, eps)
    return PhasePoint(x, p)


def conormal_tangent_basis(knot: KnotCurve, eps: float, coords: ConormalCoords) -> list[TangentVec]:
    base = perturbed_conormal_point(knot, eps, coords)
    vecs = conormal_tangents(knot, coords.t, coords.alpha, coords.beta, eps)
    return [TangentVec(base, v) for v in vecs]


# ------------------------------------------------------ perturbation field


def _smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, float)

    def bump(v):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)

    a, b = bump(u), bump(1.0 - u)
    return a / (a + b)


class PerturbationField:
    """A compactly supported vector field on R^4 equal to tau along the cone over the knot.

    value(x) = chi(|x|) * phi(d / tube_radius) * tau(t*) where t* is the
    nearest knot parameter to x/|x| and d the spherical distance to the knot.
    The radial cutoff chi is 1 on [eps/2, r_max] and the profile phi is 1 on
    [0, 1/2] and 0 beyond 1.  Being constant along rays where chi = 1 is what
    makes the isotopy intertwine the two contractions.
    """

    def __init__(self, knot: KnotCurve, eps: float, tube_radius: float | None = None,
                 r_max: float = 8.0, tol: Tolerances = DEFAULT_TOL):
        if eps <= 0:
            raise ParameterError("the perturbation field needs eps > 0")
        self.knot = knot
        self.eps = float(eps)
        self.tube_radius = float(tube_radius if tube_radius is not None
                                 else 0.5 * min_self_distance(knot))
        self.r_max = float(r_max)
        self.tol = tol
        self._project = NearestParameter(knot)

    def radial_cutoff(self, s):
        lo = self.eps / 4.0
        rise = _smooth_step((s - lo) / lo)
        fall = _smooth_step((2.0 * self.r_max - s) / self.r_max)
        return rise * fall

    def profile(self, u):
        return _smooth_step(2.0 * (1.0 - u))

    def value(self, x):
        x = np.asarray(x, float)
        s = np.linalg.norm(x, axis=-1)
        y = x / np.where(s > 0, s, 1.0)[..., None]
        t, cosd = self._project(y)
        d = np.arccos(np.clip(cosd, -1.0, 1.0))
        weight = self.radial_cutoff(s) * self.profile(d / self.tube_radius)
        weight = np.where(s > 0, weight, 0.0)
        return weight[..., None] * self.knot.unit_tangent(t)

    def jacobian(self, x):
        return jacobian_fd(self.value, x, tol=self.tol)

    def __call__(self, x):
        return self.value(x), self.jacobian(x)

    def norm(self, x):
        """Operator norm of the Jacobian at x."""
        return np.linalg.norm(self.jacobian(x), ord=2, axis=(-2, -1))

    def shell_samples(self, n: int, rng: np.random.Generator, s_range: tuple[float, float],
                      spread: float = 0.5):
        """Random points x = s y with s in s_range and y within ``spread`` of the
        tube radius of the knot (spherical distance)."""
        t = rng.uniform(0.0, TWO_PI, n)
        fr = frame_field(self.knot)(t)
        ang = rng.uniform(0.0, TWO_PI, n)
        d = spread * self.tube_radius * np.sqrt(rng.uniform(0.0, 1.0, n))
        normal = np.cos(ang)[:, None] * fr.p1 + np.sin(ang)[:, None] * fr.p2
        y = np.cos(d)[:, None] * fr.k + np.sin(d)[:, None] * normal
        s = rng.uniform(*s_range, n)
        return s[:, None] * y


def perturbation_field(knot: KnotCurve, x, eps: float = 0.1, **kwargs):
    """(value, Jacobian) of the default perturbation field at x."""
    return PerturbationField(knot, eps, **kwargs)(x)


def measure_sigma(field: PerturbationField, points) -> float:
    """Empirical sup of |D xi| over the given points."""
    return float(np.max(field.norm(points)))
