import math
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.stats import kstest

from su2fisher import su2
from su2fisher.errors import ConversionError, DomainError
from su2fisher.su2 import EulerAngles

angles = st.tuples(
    st.floats(-2 * math.pi, 2 * math.pi), st.floats(1e-3, math.pi - 1e-3), st.floats(-2 * math.pi, 2 * math.pi)
).map(lambda t: EulerAngles(*t))


def random_angles(rng, k):
    return [EulerAngles(rng.uniform(-6, 6), rng.uniform(0, math.pi), rng.uniform(-6, 6)) for _ in range(k)]


def textbook_small_d(j, mp, m, beta):
    """Wigner's explicit sum for <j,mp| exp(-i beta J_y) |j,m>."""
    total = 0.0
    pref = math.sqrt(factorial(int(j + mp)) * factorial(int(j - mp)) * factorial(int(j + m)) * factorial(int(j - m)))
    for s in range(0, int(2 * j) + 1):
        den = [j + m - s, s, mp - m + s, j - mp - s]
        if min(den) < 0:
            continue
        term = (-1) ** (mp - m + s) / np.prod([factorial(int(x)) for x in den])
        total += term * math.cos(beta / 2) ** (2 * j + m - mp - 2 * s) * math.sin(beta / 2) ** (mp - m + 2 * s)
    return pref * total


class TestEulerMatrix:
    def test_identity(self):
        np.testing.assert_allclose(su2.euler_to_matrix(EulerAngles(0, 0, 0)), np.eye(2), atol=1e-15)

    def test_quarter_turn(self):
        np.testing.assert_allclose(su2.euler_to_matrix(EulerAngles(0, math.pi, 0)), [[0, 1], [-1, 0]], atol=1e-15)

    def test_matches_exponential_product(self):
        e = EulerAngles(0.4, 1.3, -2.2)
        ref = expm(0.5j * e.psi1 * su2.SIGMA_Z) @ expm(0.5j * e.psi2 * su2.SIGMA_Y) @ expm(0.5j * e.psi3 * su2.SIGMA_Z)
        np.testing.assert_allclose(su2.euler_to_matrix(e), ref, atol=1e-14)

    def test_half_pi_point_has_equal_moduli(self):
        m = su2.euler_to_matrix(EulerAngles(math.pi / 2, math.pi / 2, math.pi / 2))
        np.testing.assert_allclose(np.abs(m), np.full((2, 2), 1 / math.sqrt(2)), atol=1e-15)
        q = su2.matrix_to_quaternion(m).as_array()
        assert np.abs(q) @ np.abs(q) == pytest.approx(1.0)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(0)
        es = random_angles(rng, 20)
        batch = su2.euler_to_matrix_batch(np.array([e.as_array() for e in es]))
        for e, m in zip(es, batch):
            np.testing.assert_allclose(m, su2.euler_to_matrix(e), atol=1e-15)


class TestConversions:
    def test_quaternion_identity(self):
        np.testing.assert_allclose(su2.quaternion_to_matrix(su2.QuaternionParams(1, 0, 0, 0)), np.eye(2))

    def test_u_min_euler(self):
        for m in (su2.quaternion_to_matrix(su2.U_MIN), su2.mode_quaternion_to_spin(su2.U_MIN)):
            assert su2.matrix_to_euler(m).psi2 == pytest.approx(math.pi / 2)

    def test_quaternion_norm_invariant(self):
        with pytest.raises(ConversionError):
            su2.QuaternionParams(1, 1, 0, 0)

    def test_round_trip_random(self):
        for m in su2.haar_random_batch(1, 200):
            e = su2.matrix_to_euler(m)
            np.testing.assert_allclose(su2.euler_to_matrix(e), m, atol=1e-10)
            np.testing.assert_allclose(su2.quaternion_to_matrix(su2.matrix_to_quaternion(m)), m, atol=1e-12)
            assert 0 <= e.psi2 <= math.pi
            assert -2 * math.pi <= e.psi1 < 2 * math.pi and -2 * math.pi <= e.psi3 < 2 * math.pi

    def test_batch_euler_matches_scalar(self):
        mats = su2.haar_random_batch(2, 100)
        batch = su2.matrix_to_euler_batch(mats)
        for m, row in zip(mats, batch):
            np.testing.assert_allclose(row, su2.matrix_to_euler(m).as_array(), atol=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(angles)
    def test_canonical_is_identity_on_canonical_range(self, e):
        # psi1, psi3 in [-2pi, 2pi) double-covers SU(2); the canonical image also has |psi1 +- psi3| < 2pi
        if abs(math.sin(e.psi2)) <= 1e-6 or abs(e.psi1 + e.psi3) >= 2 * math.pi or abs(e.psi1 - e.psi3) >= 2 * math.pi:
            return
        back = su2.matrix_to_euler(su2.euler_to_matrix(e))
        np.testing.assert_allclose(back.as_array(), e.as_array(), atol=1e-9)

    @pytest.mark.parametrize("psi2", [0.0, math.pi])
    def test_gimbal_convention(self, psi2):
        e = su2.matrix_to_euler(su2.euler_to_matrix(EulerAngles(0.7, psi2, 0.4)))
        assert e.psi3 == 0.0
        np.testing.assert_allclose(su2.euler_to_matrix(e), su2.euler_to_matrix(EulerAngles(0.7, psi2, 0.4)), atol=1e-14)

    def test_rejects_non_unitary(self):
        with pytest.raises(ConversionError):
            su2.matrix_to_euler(np.array([[1, 1], [0, 1]], dtype=complex))

    def test_rejects_wrong_determinant(self):
        with pytest.raises(ConversionError):
            su2.matrix_to_euler(1j * np.eye(2))

    def test_to_su2_fixes_phase(self):
        m = np.exp(0.3j) * su2.haar_random(5)
        fixed = su2.to_su2(m)
        assert np.linalg.det(fixed) == pytest.approx(1.0)
        assert su2.projective_distance(fixed, m) < 1e-12


class TestWignerD:
    @pytest.mark.parametrize("beta", [0.0, 0.3, 1.7, math.pi])
    def test_spin_half(self, beta):
        assert su2.wigner_d(0.5, 0.5, 0.5, beta) == pytest.approx(math.cos(beta / 2))

    def test_spin_one_centre(self):
        assert su2.wigner_d(1, 0, 0, 0.9) == pytest.approx(math.cos(0.9))

    @pytest.mark.parametrize("j", [0, 0.5, 1, 1.5, 2, 3.5])
    def test_identity_at_zero(self, j):
        np.testing.assert_allclose(su2.wigner_d_matrix(j, 0.0), np.eye(int(2 * j) + 1), atol=1e-14)

    @pytest.mark.parametrize("j", [0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5])
    def test_orthogonal(self, j):
        d = su2.wigner_d_matrix(j, 1.234)
        np.testing.assert_allclose(d.T @ d, np.eye(d.shape[0]), atol=1e-10)

    @pytest.mark.parametrize("j", [0.5, 1, 1.5, 2, 3])
    def test_against_textbook_sum_with_reversed_angle(self, j):
        beta = 0.77
        for mp in np.arange(-j, j + 1):
            for m in np.arange(-j, j + 1):
                assert su2.wigner_d(j, mp, m, beta) == pytest.approx(textbook_small_d(j, mp, m, -beta), abs=1e-12)

    @pytest.mark.parametrize("args", [(1, 0.5, 0, 0.1), (0.5, 0, 0.5, 0.1), (1, 2, 0, 0.1), (-1, 0, 0, 0.1), (0.7, 0.7, 0.7, 0.1)])
    def test_lattice_errors(self, args):
        with pytest.raises(DomainError):
            su2.wigner_d(*args)


class TestSpinRepresentation:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_matches_collective_exponentials(self, n):
        e = EulerAngles(0.3, 1.1, -0.8)
        jz, jy = su2.spin_jz(n), su2.spin_jy(n)
        ref = expm(1j * e.psi1 * jz) @ expm(1j * e.psi2 * jy) @ expm(1j * e.psi3 * jz)
        np.testing.assert_allclose(su2.spin_representation(su2.euler_to_matrix(e), n), ref, atol=1e-12)

    def test_homomorphism(self):
        a, b = su2.haar_random(1), su2.haar_random(2)
        n = 4
        np.testing.assert_allclose(
            su2.spin_representation(a @ b, n), su2.spin_representation(a, n) @ su2.spin_representation(b, n), atol=1e-12
        )

    def test_single_photon_reverses_index_order(self):
        # index k counts photons in mode a, so k = 0 is the spin-down state
        m = su2.haar_random(3)
        np.testing.assert_allclose(su2.spin_representation(m, 1), m[::-1, ::-1], atol=1e-15)


class TestHaar:
    def test_reproducible(self):
        np.testing.assert_array_equal(su2.haar_random(42), su2.haar_random(42))
        np.testing.assert_array_equal(su2.haar_random(np.random.default_rng(7)), su2.haar_random(7))

    def test_is_su2(self):
        for m in su2.haar_random_batch(0, 50):
            su2.check_su2(m)

    def test_moment(self):
        mats = su2.haar_random_batch(11, 100_000)
        a2 = mats[:, 0, 0].real ** 2
        # a^2 for a uniform point on S^3 is Beta(1/2, 3/2): mean 1/4, var 3/80
        sigma = math.sqrt(3 / 80 / len(a2))
        assert abs(a2.mean() - 0.25) < 3 * sigma

    def test_psi2_marginal(self):
        psi2 = su2.matrix_to_euler_batch(su2.haar_random_batch(12, 100_000))[:, 1]
        res = kstest(psi2, lambda x: (1 - np.cos(x)) / 2)
        assert res.pvalue > 0.01


class TestBasisConjugate:
    def test_identity(self):
        for basis in ("DA", "RL"):
            np.testing.assert_allclose(su2.basis_conjugate(EulerAngles(0, 0, 0), basis).as_array(), 0, atol=1e-15)

    def test_quarter_example(self):
        e = su2.basis_conjugate(EulerAngles(0, math.pi / 2, 0), "DA")
        assert math.cos(e.psi2 / 2) ** 2 == pytest.approx(0.5)
        assert e.psi2 == pytest.approx(math.pi / 2)

    @pytest.mark.parametrize("basis,h", [("DA", su2.H_DA), ("RL", su2.H_RL)])
    def test_projective_identity(self, basis, h):
        rng = np.random.default_rng(4)
        for e in random_angles(rng, 1000):
            lhs = su2.euler_to_matrix(su2.basis_conjugate(e, basis))
            rhs = h.conj().T @ su2.euler_to_matrix(e) @ h
            assert su2.projective_distance(lhs, rhs) < 1e-9

    def test_cos2_identities(self):
        rng = np.random.default_rng(5)
        for e in random_angles(rng, 100):
            for basis in ("DA", "RL"):
                c = su2.basis_conjugate(e, basis)
                assert math.cos(c.psi2 / 2) ** 2 == pytest.approx(su2.conjugated_cos2(e, basis), abs=1e-9)


class TestJacobians:
    def test_v_at_half_pi(self):
        np.testing.assert_allclose(su2.jacobians_at(EulerAngles(0.2, math.pi / 2, 1.0)).V, np.eye(3) / 2, atol=1e-12)

    def test_det_v(self):
        v = su2.jacobians_at(EulerAngles(0.1, math.pi / 3, -0.4)).V
        assert np.linalg.det(v) == pytest.approx(3 / 32, abs=1e-9)

    def test_singular_flag(self):
        jac = su2.jacobians_at(EulerAngles(0.3, 1e-10, 0.2))
        assert jac.singular and np.all(np.isnan(jac.J))

    def test_j_solves_generator_equation(self):
        e = EulerAngles(0.5, 1.0, -1.5)
        jac = su2.jacobians_at(e)
        m, dms = su2._euler_derivatives(e)
        for a, sigma in enumerate(su2.PAULIS):
            t = 1j * m.conj().T @ sum(dms[k] * jac.J[k, a] for k in range(3))
            np.testing.assert_allclose(t, sigma / math.sqrt(2), atol=1e-12)

    def test_analytic_derivatives_match_fd(self):
        e = EulerAngles(0.5, 1.0, -1.5)
        _, dms = su2._euler_derivatives(e)
        h = 1e-6
        for k in range(3):
            dp = np.zeros(3)
            dp[k] = h
            fd = (su2.euler_to_matrix(e.as_array() + dp) - su2.euler_to_matrix(e.as_array() - dp)) / (2 * h)
            np.testing.assert_allclose(dms[k], fd, atol=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(angles)
    def test_v_closed_form(self, e):
        if abs(math.sin(e.psi2)) <= 1e-4:
            return
        jac = su2.jacobians_at(e)
        np.testing.assert_allclose(jac.V, su2.v_closed_form(e.psi2), atol=1e-8)
        assert np.linalg.det(jac.V) == pytest.approx(math.sin(e.psi2) ** 2 / 8, abs=1e-9)
        np.testing.assert_allclose(np.linalg.inv(jac.J).T @ np.linalg.inv(jac.J), jac.V, atol=1e-8)

    def test_second_rows_match_closed_form(self):
        rng = np.random.default_rng(6)
        checked = 0
        for e in random_angles(rng, 100):
            jac = su2.jacobians_at(e)
            for basis, w in (("DA", jac.Wp), ("RL", jac.Wpp)):
                if abs(math.sin(su2.basis_conjugate(e, basis).psi2)) < 1e-3:
                    continue
                np.testing.assert_allclose(w[1], su2.conjugated_psi2_gradient(e, basis), atol=1e-5)
                checked += 1
        assert checked > 150

    def test_w_matrices_full_rows(self):
        # every row of W' must reproduce a finite-difference derivative of the conjugated matrix
        e = EulerAngles(0.9, 1.2, 0.3)
        jac = su2.jacobians_at(e)
        base = su2.basis_conjugate(e, "DA").as_array()
        for k in range(3):
            dp = np.zeros(3)
            dp[k] = 1e-4
            moved = su2.basis_conjugate(EulerAngles.from_array(e.as_array() + dp), "DA").as_array()
            np.testing.assert_allclose((moved - base) / 1e-4, jac.Wp[:, k], atol=1e-3)


class TestUnitarySpec:
    def test_euler(self):
        assert su2.parse_unitary_spec("euler:0.1,0.2,0.3") == EulerAngles(0.1, 0.2, 0.3)

    def test_abcd_uses_mode_convention(self):
        e = su2.parse_unitary_spec("abcd:0.5,0.5,0.5,0.5")
        np.testing.assert_allclose(su2.euler_to_matrix(e), su2.quaternion_to_matrix(su2.U_MIN).T, atol=1e-12)

    def test_abcd_small_renormalization_warns(self):
        with pytest.warns(UserWarning):
            su2.parse_unitary_spec("abcd:0.5000001,0.5,0.5,0.5")

    @pytest.mark.parametrize("spec", ["abcd:1,1,0,0", "euler:1,2", "rot:1,2,3", "euler:a,b,c", "euler:nan,0,0"])
    def test_invalid(self, spec):
        with pytest.raises(ConversionError):
            su2.parse_unitary_spec(spec)
