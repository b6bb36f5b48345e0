import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conifold_lab import geom
from conifold_lab.errors import UsageError
from conifold_lab.geom import (ComplexVec4, PhasePoint, ProjPoint, TangentVec, apply_J, complex_J_apply,
                               coords_xieta, coords_xieta_inverse, coords_zw, fubini_study_eval,
                               jacobian_fd, liouville_eval, omega, omega_eval)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec8 = arrays(float, 8, elements=finite)


def e(i, n=8):
    v = np.zeros(n)
    v[i] = 1.0
    return v


BASE = PhasePoint(np.zeros(4), np.zeros(4))


class TestOmega:
    def test_dual_pair(self):
        assert omega_eval(TangentVec(BASE, e(0)), TangentVec(BASE, e(4))) == 1.0

    def test_index_mismatch(self):
        assert omega_eval(TangentVec(BASE, e(0)), TangentVec(BASE, e(5))) == 0.0

    def test_different_bases_rejected(self):
        other = PhasePoint(np.ones(4), np.zeros(4))
        with pytest.raises(UsageError):
            omega_eval(TangentVec(BASE, e(0)), TangentVec(other, e(4)))

    @given(vec8, vec8)
    def test_antisymmetric(self, a, b):
        assert omega(a, b) == pytest.approx(-omega(b, a), abs=1e-12)
        assert omega(a, a) == 0.0

    @given(vec8)
    def test_compatible_with_euclidean_metric(self, a):
        # omega(u, J u) = |u|^2 for the standard structure
        assert omega(a, apply_J(a)) == pytest.approx(a @ a, rel=1e-12, abs=1e-12)


class TestLiouville:
    def test_direct_formula(self):
        base = PhasePoint(np.zeros(4), [0, 0, 2, 0])
        assert liouville_eval(TangentVec(base, e(2))) == -2.0

    @given(vec8)
    def test_zero_section(self, d):
        base = PhasePoint([1, 0, 0, 0], np.zeros(4))
        assert liouville_eval(TangentVec(base, d)) == 0.0


class TestCoordinates:
    def test_basic_values(self):
        w = coords_zw(ComplexVec4([1, 0, 0, 0], "z"), "to_w").values
        np.testing.assert_allclose(w, [1, 0, 0, 1])
        w = coords_zw(ComplexVec4([1, 1j, 0, 0], "z"), "to_w").values
        np.testing.assert_allclose(w, [0, 0, 0, 2], atol=1e-15)
        assert w[0] * w[3] - w[1] * w[2] == 0

    def test_system_tag_checked(self):
        with pytest.raises(UsageError):
            coords_zw(ComplexVec4([1, 0, 0, 0], "w"), "to_w")

    def test_round_trip(self, rng):
        z = rng.normal(size=(1000, 4)) + 1j * rng.normal(size=(1000, 4))
        assert np.max(np.abs(geom.w_to_z(geom.z_to_w(z)) - z)) < 1e-14

    def test_xieta_values(self):
        xi, eta = coords_xieta(PhasePoint([1, 0, 0, 0], np.zeros(4)))
        np.testing.assert_array_equal(xi, [1, 0])
        np.testing.assert_array_equal(eta, [0, 0])
        xi, _ = coords_xieta(PhasePoint([np.cos(np.pi / 2), np.sin(np.pi / 2), 0, 0], np.zeros(4)))
        np.testing.assert_allclose(xi, [1j, 0], atol=1e-15)
        np.testing.assert_allclose(geom.xieta_to_w([1, 0], [0, 0]), [1, 0, 0, 1])

    def test_xieta_inverse(self, rng):
        pt = PhasePoint(rng.normal(size=4), rng.normal(size=4))
        back = coords_xieta_inverse(*coords_xieta(pt))
        np.testing.assert_array_equal(back.x, pt.x)
        np.testing.assert_array_equal(back.p, pt.p)

    def test_two_routes_to_w_agree(self, rng):
        x, p = rng.normal(size=(2, 1000, 4))
        via_z = geom.xp_to_w(x, p)
        via_xieta = geom.xieta_to_w(*geom.xp_to_xieta(x, p))
        assert np.max(np.abs(via_z - via_xieta)) < 1e-13

    def test_forms_in_w_coordinates(self, rng):
        # with w = z_to_w(z), omega = (i/4) sum dw ^ dw-bar and g_st = (1/4) sum dw (.) dw-bar
        a, b = rng.normal(size=(2, 200, 8))
        wa = geom.z_to_w(geom.pack_z(a[:, :4], a[:, 4:]))
        wb = geom.z_to_w(geom.pack_z(b[:, :4], b[:, 4:]))
        wedge = wa * np.conj(wb) - wb * np.conj(wa)
        om_w = np.real(0.25j * np.sum(wedge, -1))
        g_w = 0.25 * np.real(np.sum(wa * np.conj(wb) + wb * np.conj(wa), -1))
        assert np.max(np.abs(om_w - omega(a, b))) < 1e-12
        assert np.max(np.abs(g_w - np.sum(a * b, -1))) < 1e-12
        assert np.max(np.abs(geom.omega_w(wa, wb) - omega(a, b))) < 1e-12
        assert np.max(np.abs(geom.g_st_w(wa, wb) - np.sum(a * b, -1))) < 1e-12


class TestComplexStructure:
    def test_standard(self):
        out = complex_J_apply(TangentVec(BASE, e(0)))
        np.testing.assert_array_equal(out.direction, e(4))

    @given(vec8)
    def test_squares_to_minus_one(self, v):
        for s in ("standard_z", "split_xieta"):
            np.testing.assert_array_equal(apply_J(apply_J(v, s), s), -v)

    def test_split(self):
        np.testing.assert_array_equal(apply_J(e(0), "split_xieta"), e(1))

    def test_unknown(self):
        with pytest.raises(UsageError):
            apply_J(e(0), "other")


class TestFubiniStudy:
    @pytest.mark.parametrize("z,u,v,expected", [(0, 1, 1, 1.0), (1, 1, 1, 0.25), (0, 1, 1j, 0.0)])
    def test_values(self, z, u, v, expected):
        assert fubini_study_eval(z, u, v) == pytest.approx(expected, abs=1e-15)

    def test_form_is_metric_rotated(self, rng):
        z, u, v = rng.normal(size=(3, 50)) + 1j * rng.normal(size=(3, 50))
        np.testing.assert_allclose(geom.fubini_study_form(z, u, v), -geom.fubini_study_form(z, v, u))
        np.testing.assert_allclose(geom.fubini_study_form(z, u, 1j * u), geom.fubini_study(z, u, u))


class TestProjPoint:
    def test_canonical(self):
        p = ProjPoint(2j, 2)
        assert p.u == pytest.approx(1 / np.sqrt(2))
        assert p.isclose(ProjPoint(1, -1j))

    def test_zero_rejected(self):
        with pytest.raises(UsageError):
            ProjPoint(0, 0)


class TestJacobianFD:
    def test_identity(self, rng):
        x = rng.normal(size=(5, 3))
        J = jacobian_fd(lambda u: u, x)
        assert np.max(np.abs(J - np.eye(3))) < 1e-10

    def test_linear_has_zero_hessian(self, rng):
        A = rng.normal(size=(4, 3))
        _, H = jacobian_fd(lambda u: u @ A.T, rng.normal(size=(5, 3)), order=2)
        assert np.max(np.abs(H)) < 1e-8

    def test_quadratic(self):
        # f(x, y) = (x^2 y, sin x); exact derivatives
        f = lambda u: np.stack([u[..., 0] ** 2 * u[..., 1], np.sin(u[..., 0])], -1)
        x = np.array([0.7, -1.3])
        J, H = jacobian_fd(f, x, order=2)
        np.testing.assert_allclose(J, [[2 * 0.7 * -1.3, 0.49], [np.cos(0.7), 0]], atol=1e-9)
        np.testing.assert_allclose(H[0], [[2 * -1.3, 1.4], [1.4, 0]], atol=1e-6)
        np.testing.assert_allclose(H[1], [[-np.sin(0.7), 0], [0, 0]], atol=1e-6)

    def test_bad_order(self):
        with pytest.raises(UsageError):
            jacobian_fd(lambda u: u, np.zeros(2), order=3)
