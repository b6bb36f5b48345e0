import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conifold_lab.errors import PreconditionError
from conifold_lab.knots import torus_knot, unknot
from conifold_lab.verify.stokes import (Disc, arbitrary_disc, boundary_integral, conormal_residual,
                                        interior_integral, random_conormal_disc, stokes_check,
                                        zero_section_disc, zero_section_residual)


def _linear_disc(a, b):
    """f(s, t) = s a + t b: omega integrates to omega(a, b) over the square."""
    return Disc(lambda u: u[..., :1] * a + u[..., 1:] * b, edges_on_L=())


def test_linear_disc_area(rng):
    a, b = rng.normal(size=(2, 8))
    expected = float(a[:4] @ b[4:] - a[4:] @ b[:4])       # omega = sum dx ^ dp
    assert interior_integral(_linear_disc(a, b), n=8) == pytest.approx(expected, abs=1e-9)
    assert boundary_integral(_linear_disc(a, b)) == pytest.approx(expected, abs=1e-9)


@given(st.integers(0, 2 ** 31))
@settings(max_examples=10)
def test_stokes_on_arbitrary_discs(seed):
    res = stokes_check(arbitrary_disc(np.random.default_rng(seed)))
    assert res.difference < 1e-6


def test_zero_section_disc_has_zero_area(rng):
    res = stokes_check(zero_section_disc(rng), zero_section_residual)
    assert res.boundary == 0.0
    assert abs(res.interior) < 1e-8


@pytest.mark.parametrize("eps", [0.0, 0.1])
@pytest.mark.parametrize("knot", [unknot(), torus_knot(2, 3)], ids=["unknot", "torus23"])
def test_conormal_discs(knot, eps, rng):
    for _ in range(2):
        disc = random_conormal_disc(knot, rng, eps)
        res = stokes_check(disc, conormal_residual(knot, eps))
        assert res.boundary_residual < 1e-8
        assert res.difference < 1e-6
        if eps == 0.0:
            # lambda vanishes on the unperturbed conormal bundle
            assert abs(res.boundary) < 1e-6 and abs(res.interior) < 1e-6


def test_boundary_off_lagrangian_is_refused(rng):
    with pytest.raises(PreconditionError):
        stokes_check(Disc(arbitrary_disc(rng).fmap), zero_section_residual)
