import numpy as np
import pytest
from hypothesis import given, strategies as st

from conifold_lab import geom
from conifold_lab.conifold import isotopy_xp
from conifold_lab.conormal import PerturbationField
from conifold_lab.knots import torus_knot, unknot
from conifold_lab.verify import (EUCLIDEAN, G_HAT, OMEGA, OMEGA_HAT, GridSpec, SubmanifoldSampler,
                                 bilipschitz_bounds, form_restriction_max, pushforward_omega,
                                 tameness_bounds, totally_real_angle)
from conifold_lab.verify.engines import (TamingFailure, generalized_eigenvalues,
                                         principal_angles, tameness_on_points)
from conifold_lab.verify.handles import j_complex, j_standard
from conifold_lab.verify.samplers import (conormal_sampler, contracted_sampler, ct_sampler,
                                          polar_spec, unknot_oracle_sampler)

SQUARE = GridSpec((-1.0, -1.0), (1.0, 1.0), (5, 5))


def _embedded(cols, name="plane"):
    """Linear 2-plane of R^8 spanned by coordinate axes ``cols``."""

    def param(u):
        out = np.zeros(u.shape[:-1] + (8,))
        out[..., cols[0]] = u[..., 0]
        out[..., cols[1]] = u[..., 1]
        return out

    return SubmanifoldSampler(name, param, SQUARE, 8, J=j_standard)


# ------------------------------------------------------------ bi-Lipschitz


def test_identity_bilipschitz(rng):
    pts = rng.normal(size=(50, 3))
    eye = lambda p: np.broadcast_to(np.eye(3), p.shape[:-1] + (3, 3))
    res = bilipschitz_bounds(lambda p: p, eye, eye, pts)
    assert res.min_eig == pytest.approx(1.0, abs=1e-8)
    assert res.max_eig == pytest.approx(1.0, abs=1e-8)
    assert res.constant == pytest.approx(1.0, abs=1e-8)
    assert res.samples == 50 and res.excluded == 0


def test_diagonal_map_eigenvalues(rng):
    pts = rng.normal(size=(20, 2))
    eye = lambda p: np.broadcast_to(np.eye(2), p.shape[:-1] + (2, 2))
    res = bilipschitz_bounds(lambda p: p * np.array([2.0, 3.0]), eye, eye, pts)
    assert (res.min_eig, res.max_eig) == pytest.approx((4.0, 9.0), abs=1e-7)


def test_bilipschitz_counts_singular_points():
    pts = np.array([[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]])
    eye = lambda p: np.broadcast_to(np.eye(2), p.shape[:-1] + (2, 2))
    # d/dx of x^3 vanishes at x = 0 only
    res = bilipschitz_bounds(lambda p: np.stack([p[..., 0] ** 3, p[..., 1]], -1), eye, eye, pts)
    assert res.excluded == 1 and res.samples == 2


@given(st.integers(0, 2 ** 31))
def test_generalized_eigenvalues_against_scipy(seed):
    from scipy.linalg import eigh
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(4, 4))
    N = rng.normal(size=(4, 4))
    A, B = M + M.T, N @ N.T + 0.5 * np.eye(4)
    np.testing.assert_allclose(generalized_eigenvalues(A, B), eigh(A, B, eigvals_only=True),
                               rtol=1e-9, atol=1e-9)


# -------------------------------------------------------------- tameness


def test_standard_structure_is_tame_with_constant_one(rng):
    s = _embedded((0, 1))
    res = tameness_bounds(OMEGA, s, 16, rng)
    assert (res.inf_ratio, res.sup_ratio) == pytest.approx((1.0, 1.0), abs=1e-12)
    assert res.constant == pytest.approx(1.0)
    assert res.samples == SQUARE.size * 16


def test_reversed_structure_raises_with_witness(rng):
    s = _embedded((0, 1))
    anti = lambda base, v: -j_standard(base, v)
    with pytest.raises(TamingFailure) as err:
        tameness_bounds(OMEGA, s, 4, rng, J=anti)
    assert err.value.witness["ratio"] == pytest.approx(-1.0)
    res = tameness_bounds(OMEGA, s, 4, rng, J=anti, raise_on_failure=False)
    assert res.constant == np.inf


def test_product_structure_tame(rng):
    # omega_hat(X, iX) / g_hat(X, X) = 1 for the product Kahler structure
    base = np.concatenate([rng.normal(size=(30, 2)), rng.normal(size=(30, 8))], -1)
    X = rng.normal(size=(30, 5, 10))
    res = tameness_on_points(OMEGA_HAT, j_complex, G_HAT, base, X)
    assert (res.inf_ratio, res.sup_ratio) == pytest.approx((1.0, 1.0), abs=1e-12)


def test_pushforward_inverts_isotopy(rng):
    # omega_pushforward(dphi u, dphi v) = omega(u, v), dphi by finite differences
    fld = PerturbationField(torus_knot(2, 3), 0.1)
    x = rng.normal(size=(12, 4))
    base = np.concatenate([x / np.linalg.norm(x, axis=-1, keepdims=True), rng.normal(size=(12, 4))], -1)

    def phi(pt):
        return np.concatenate(isotopy_xp(fld, pt[..., :4], pt[..., 4:]), -1)

    D = geom.jacobian_fd(phi, base)
    u, v = rng.normal(size=(2, 12, 8))
    du, dv = np.einsum("nij,nj->ni", D, u), np.einsum("nij,nj->ni", D, v)
    got = pushforward_omega(fld)(phi(base), du, dv)
    np.testing.assert_allclose(got, geom.omega(u, v), atol=1e-7)


# ------------------------------------------------------ form restriction


def test_zero_section_isotropic():
    res = form_restriction_max(OMEGA, _embedded((0, 1)))
    assert res.value == 0.0 and res.samples == SQUARE.size and res.excluded == 0


def test_complex_line_not_isotropic():
    # span(e_x1, e_p1) is a complex line: omega of the unit basis is 1
    assert form_restriction_max(OMEGA, _embedded((0, 4))).value == pytest.approx(1.0)


def test_degenerate_bases_are_excluded():
    def param(u):
        out = np.zeros(u.shape[:-1] + (8,))
        out[..., 0] = u[..., 0]
        out[..., 1] = u[..., 1] ** 2
        return out

    res = form_restriction_max(OMEGA, SubmanifoldSampler("fold", param, SQUARE, 8))
    # the row u1 = 0 of the 5 x 5 grid has a vanishing tangent
    assert res.excluded == 5 and res.samples == 20
    assert not res.excluded_ok


@pytest.mark.parametrize("knot", [unknot(), torus_knot(2, 3)], ids=["unknot", "torus23"])
def test_conormal_and_contraction_isotropic(knot):
    spec = polar_spec(8, 8, 3, (0.25, 2.0))
    assert form_restriction_max(OMEGA, conormal_sampler(knot, 0.0, spec)).value < 1e-12
    assert form_restriction_max(OMEGA, contracted_sampler(knot, 0.1, spec)).value < 1e-12


def test_perturbed_conormal_isotropic():
    spec = polar_spec(8, 8, 3, (0.25, 2.0))
    assert form_restriction_max(OMEGA, conormal_sampler(torus_knot(2, 3), 0.1, spec)).value < 1e-10


def test_unknot_oracle_lagrangian_for_omega_hat():
    spec = polar_spec(8, 8, 3, (0.25, 2.0))
    assert form_restriction_max(OMEGA_HAT, unknot_oracle_sampler(spec)).value < 1e-8


def test_torus_transition_not_lagrangian_for_omega_hat():
    spec = polar_spec(8, 8, 1, (1.0, 1.0))
    assert form_restriction_max(OMEGA_HAT, ct_sampler(torus_knot(2, 3), 0.0, spec)).value > 1e-2


# ------------------------------------------------------- totally real angle


def test_real_plane_angle_is_right_angle():
    assert totally_real_angle(_embedded((0, 1))).value == pytest.approx(np.pi / 2, abs=1e-12)


def test_complex_line_angle_zero():
    assert totally_real_angle(_embedded((0, 4))).value == pytest.approx(0.0, abs=1e-7)


def test_principal_angles_known():
    a = np.array([[[1.0, 0.0, 0.0]]])
    b = np.array([[[np.cos(0.3), np.sin(0.3), 0.0]]])
    ang = principal_angles(EUCLIDEAN, np.zeros((1, 3)), a, b)
    assert ang[0, 0] == pytest.approx(0.3, abs=1e-12)


def test_ct_torus_totally_real():
    spec = polar_spec(8, 8, 2, (0.5, 1.5))
    res = totally_real_angle(ct_sampler(torus_knot(2, 3), 0.1, spec))
    assert 0.0 < res.value <= np.pi / 2
