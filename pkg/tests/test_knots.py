import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conifold_lab.errors import DegenerateError, ParameterError
from conifold_lab.geom import TWO_PI, jacobian_fd
from conifold_lab.knots import (TREFOIL_LIKE, NearestParameter, check_immersed, fourier_knot,
                                min_self_distance, parse_knot_spec, torus_knot, unknot)

KNOTS = [unknot(), torus_knot(2, 3), torus_knot(3, 5), fourier_knot(TREFOIL_LIKE, "trefoil-like")]


def test_unknot_values():
    k, kd, _ = unknot()(np.array([0.0, np.pi / 2]))
    np.testing.assert_allclose(k[0], [1, 0, 0, 0])
    np.testing.assert_allclose(kd[0], [0, 1, 0, 0])
    np.testing.assert_allclose(k[1], [0, 1, 0, 0], atol=1e-16)


def test_torus_value():
    np.testing.assert_allclose(torus_knot(2, 3).point(0.0), np.array([1, 0, 1, 0]) / np.sqrt(2))


@pytest.mark.parametrize("m,n", [(2, 2), (2, 4), (1.5, 3)])
def test_torus_rejects(m, n):
    with pytest.raises(ParameterError):
        torus_knot(m, n)


@pytest.mark.parametrize("knot", KNOTS, ids=lambda k: k.name)
def test_curve_invariants(knot):
    t = np.linspace(0, TWO_PI, 256, endpoint=False)
    k, kd, kdd = knot(t)
    assert np.max(np.abs(np.linalg.norm(k, axis=-1) - 1)) < 1e-10
    assert np.max(np.abs(np.sum(k * kd, -1))) < 1e-9
    fd = jacobian_fd(lambda s: knot.point(s[..., 0]), t[:, None])[..., 0]
    assert np.max(np.abs(fd - kd)) < 1e-6
    fd2 = jacobian_fd(lambda s: knot.velocity(s[..., 0]), t[:, None])[..., 0]
    assert np.max(np.abs(fd2 - kdd)) < 1e-5


def test_fourier_reproduces_unknot():
    circle = [{"axis": 0, "harmonic": 1, "cos": 1.0, "sin": 0.0},
              {"axis": 1, "harmonic": 1, "cos": 0.0, "sin": 1.0}]
    t = np.linspace(0, TWO_PI, 100)
    for a, b in zip(fourier_knot(circle)(t), unknot()(t)):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_fourier_normalised():
    k = fourier_knot(TREFOIL_LIKE).point(np.linspace(0, TWO_PI, 500))
    assert np.max(np.abs(np.linalg.norm(k, axis=-1) - 1)) < 1e-12


def test_constant_series_rejected():
    const = [{"axis": 0, "harmonic": 0, "cos": 1.0, "sin": 0.0}]
    with pytest.raises((ParameterError, DegenerateError)):
        knot = fourier_knot(const)
        check_immersed(knot, np.linspace(0, TWO_PI, 64))


def test_parse_specs(tmp_path):
    assert parse_knot_spec("unknot").name == "unknot"
    assert parse_knot_spec("torus:2,3").params["m"] == 2
    path = tmp_path / "k.json"
    path.write_text(json.dumps(TREFOIL_LIKE))
    knot = parse_knot_spec(f"fourier:{path}")
    np.testing.assert_allclose(knot.point(0.3), fourier_knot(TREFOIL_LIKE).point(0.3))
    for bad in ("torus:2,2", "torus:a,b", "trefoil", f"fourier:{tmp_path / 'missing.json'}"):
        with pytest.raises(ParameterError):
            parse_knot_spec(bad)


def test_self_distance_positive():
    # chord at the smallest sampled parameter gap above 0.5 (grid of 1024)
    d = min_self_distance(unknot(), min_gap=0.5, n=1024)
    assert 2 * np.sin(0.25) <= d <= 2 * np.sin(0.25 + np.pi / 1024) + 1e-12
    assert min_self_distance(torus_knot(2, 3)) > 0.1


@given(st.floats(0, TWO_PI, exclude_max=True), st.floats(-0.2, 0.2))
def test_nearest_parameter_recovers_knot_points(t, d):
    knot = torus_knot(2, 3)
    proj = NearestParameter(knot)
    from conifold_lab.conormal import frame_at
    fr = frame_at(knot, t)
    y = np.cos(d) * fr.k + np.sin(d) * fr.p1
    ts, cosd = proj(y)
    gap = np.abs(np.angle(np.exp(1j * (ts - t))))
    assert gap < 1e-8
    assert cosd == pytest.approx(np.cos(d), abs=1e-10)
