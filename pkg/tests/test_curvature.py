import numpy as np
import pytest
from hypothesis import given, strategies as st

from conifold_lab.verify import (IITensor, covariant_hessian, gauss_sectional, holomorphic_hessian,
                                 intrinsic_sectional, second_fundamental_form)
from conifold_lab.verify.curvature import (FS_CURVATURE, christoffel_contract, christoffel_from_metric,
                                           curve_ii_norms, fs_christoffel, fs_metric_matrix,
                                           induced_metric, product_sectional)
from conifold_lab.verify.samplers import clifford_torus_param, cone_chart_real, sphere3_param


def _sphere_params(rng, n=6):
    return np.stack([rng.uniform(0.5, np.pi - 0.5, n), rng.uniform(0.5, np.pi - 0.5, n),
                     rng.uniform(0, 2 * np.pi, n)], -1)


def _plane(u):
    A = np.array([[1.0, 2.0, 0.0, -1.0], [0.5, 0.0, 1.0, 3.0]])
    return u @ A + np.array([1.0, -1.0, 0.5, 2.0])


def _graph(u):
    # quadric graph z = u1^2 - u1 u2 + 2 u2^2 in R^3
    return np.concatenate([u, (u[..., :1] ** 2 - u[..., :1] * u[..., 1:] + 2 * u[..., 1:] ** 2)], -1)


# -------------------------------------------------- second fundamental form


@pytest.mark.parametrize("radius", [1.0, 2.0])
def test_sphere_ii_is_radial(radius, rng):
    u = _sphere_params(rng)
    param = sphere3_param(radius)
    ii = second_fundamental_form(param, u, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    # II(d_a, d_a) = -|d_a|^2 x / R^2 with |d_a| = R
    np.testing.assert_allclose(ii, -param(u), atol=1e-5)


def test_affine_plane_has_zero_ii(rng):
    ii = IITensor(_plane, rng.normal(size=(5, 2)))
    assert np.max(np.abs(ii.ii)) < 1e-8


def test_graph_ii_at_origin():
    # at the origin II_ij = Hessian of the height function times e_z
    ii = IITensor(_graph, np.zeros((1, 2)))
    np.testing.assert_allclose(ii.ii[0, :, :, 2], [[2.0, -1.0], [-1.0, 4.0]], atol=1e-6)
    np.testing.assert_allclose(ii.ii[0, :, :, :2], 0.0, atol=1e-6)


@given(st.integers(0, 2 ** 31))
def test_ii_symmetric_and_normal(seed):
    rng = np.random.default_rng(seed)
    ii = IITensor(_graph, rng.uniform(-1, 1, size=(3, 2)))
    np.testing.assert_allclose(ii.ii, np.swapaxes(ii.ii, 1, 2), atol=1e-6)
    np.testing.assert_allclose(np.einsum("nijd,nkd->nijk", ii.ii, ii.T), 0.0, atol=1e-6)


def test_sphere_ii_norm(rng):
    # S^2 of radius R in R^3: |II| = 1/R
    def param(u):
        a, b = u[..., 0], u[..., 1]
        return 3.0 * np.stack([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)], -1)

    u = np.stack([rng.uniform(0.5, 2.5, 5), rng.uniform(0, 6, 5)], -1)
    np.testing.assert_allclose(IITensor(param, u).norm(), 1 / 3.0, atol=1e-5)


# ------------------------------------------------------ sectional curvature


@pytest.mark.parametrize("radius", [1.0, 2.0])
def test_sphere_gauss_sectional(radius, rng):
    u = _sphere_params(rng)
    for X, Y in [([1, 0, 0], [0, 1, 0]), ([1, 1, 0], [0, 1, 2])]:
        K = gauss_sectional(sphere3_param(radius), u, X, Y)
        np.testing.assert_allclose(K, 1 / radius ** 2, atol=1e-5)


def test_sphere_intrinsic_sectional(rng):
    u = _sphere_params(rng, 3)
    K = intrinsic_sectional(induced_metric(sphere3_param(1.0)), u, [1, 0, 0], [0, 0, 1], h=5e-4)
    np.testing.assert_allclose(K, 1.0, atol=1e-3)


def test_clifford_torus_flat(rng):
    u = rng.uniform(0, 2 * np.pi, size=(5, 2))
    K = gauss_sectional(clifford_torus_param, u, [1, 0], [0, 1])
    np.testing.assert_allclose(K, 0.0, atol=1e-5)


def test_gauss_matches_intrinsic_on_quadric(rng):
    u = rng.uniform(-0.5, 0.5, size=(4, 2))
    ext = gauss_sectional(_graph, u, [1, 0], [0, 1])
    intr = intrinsic_sectional(induced_metric(_graph), u, [1, 0], [0, 1], h=5e-4)
    np.testing.assert_allclose(ext, intr, atol=1e-3)


def test_fs_christoffel_matches_metric_derivatives(rng):
    u = rng.normal(size=(6, 2))
    table = christoffel_from_metric(fs_metric_matrix, u, h=1e-4)
    A, B = rng.normal(size=(2, 6, 2))
    np.testing.assert_allclose(fs_christoffel(u, A, B), christoffel_contract(lambda p: table)(u, A, B),
                               atol=1e-6)


def test_fs_intrinsic_curvature(rng):
    u = rng.normal(size=(4, 2)) * 0.7
    K = intrinsic_sectional(fs_metric_matrix, u, [1, 0], [0, 1], h=5e-4)
    np.testing.assert_allclose(K, FS_CURVATURE, rtol=1e-3)


def test_product_sectional_of_cp1_plane():
    base = np.zeros((1, 10))
    base[0, :2] = [0.3, -0.4]
    A, B = np.zeros((2, 1, 10))
    A[0, 0], B[0, 1] = 1.0, 1.0
    assert product_sectional(base, A, B)[0] == pytest.approx(FS_CURVATURE)
    C = np.zeros((1, 10))
    C[0, 5] = 1.0
    assert product_sectional(base, A, C)[0] == 0.0


# ------------------------------------------------------- covariant Hessian


def test_linear_map_hessian_vanishes(rng):
    M = rng.normal(size=(3, 5))
    u = rng.normal(size=(10, 3))
    X, Y = rng.normal(size=(2, 10, 3))
    H = covariant_hessian(lambda v: v @ M, u, X, Y)
    assert np.max(np.abs(H)) < 1e-8


def test_quadratic_map_hessian():
    u = np.array([[0.3, -0.2]])
    f = lambda v: np.stack([v[..., 0] * v[..., 1], v[..., 0] ** 2], -1)
    H = covariant_hessian(f, u, [1.0, 0.0], [0.0, 1.0])
    np.testing.assert_allclose(H, [[1.0, 0.0]], atol=1e-7)


def test_cone_chart_second_derivative_constant(rng):
    # the chart is bilinear, so its Hessian does not depend on the point
    X, Y = rng.normal(size=(2, 6))
    H = covariant_hessian(cone_chart_real, rng.normal(size=(4, 6)), X, Y)
    np.testing.assert_allclose(H, np.broadcast_to(H[0], H.shape), atol=1e-7)


def test_holomorphic_hessian(rng):
    f = lambda w: w[..., 0] * w[..., 1] + w[..., 2] ** 2
    w = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H = holomorphic_hessian(f, w)
    np.testing.assert_allclose(H, np.broadcast_to([[0, 1, 0], [1, 0, 0], [0, 0, 2]], (3, 3, 3)), atol=1e-6)


# --------------------------------------------------------------- curves


def test_great_circle_is_geodesic_in_sphere():
    curve = lambda t: np.concatenate([np.cos(t), np.sin(t), 0 * t, 0 * t], -1)
    in_sphere, ambient = curve_ii_norms(curve, np.linspace(0, 6, 7))
    np.testing.assert_allclose(in_sphere, 0.0, atol=1e-6)
    np.testing.assert_allclose(ambient, 1.0, atol=1e-6)


def test_latitude_circle(rng):
    a = 0.6
    b = np.sqrt(1 - a * a)
    curve = lambda t: np.concatenate([a * np.cos(t), a * np.sin(t), b + 0 * t, 0 * t], -1)
    in_sphere, ambient = curve_ii_norms(curve, rng.uniform(0, 6, 5))
    np.testing.assert_allclose(ambient, 1 / a, atol=1e-5)
    np.testing.assert_allclose(in_sphere, np.sqrt(1 / a ** 2 - 1), atol=1e-5)
