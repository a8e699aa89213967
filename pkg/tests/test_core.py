import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from suslovkit.core import (
    SuslovParams,
    divergence_analytic,
    energy,
    load_params,
    matrices,
    multiplier_zeta,
    validate,
    vector_field,
)
from suslovkit.fields import fd_jacobian

from conftest import draw_params

omega_strategy = st.lists(
    st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False),
    min_size=3, max_size=3,
).map(np.array)


class TestValidate:
    def test_constraint_vector_normalized(self):
        p = validate(3.0, 2.0, 1.0, 0.5, 1.0, a1=2.0, a2=0.0, a3=2.0)
        assert p.a1 == 1.0 and p.a2 == 0.0

    def test_inertia_ordering_rejected(self):
        with pytest.raises(ValueError, match="ordering"):
            validate(1.0, 2.0, 3.0, 0.5, 1.0)

    def test_zero_rotor_transverse_moment_allowed(self):
        p = validate(3.0, 2.0, 1.0, 0.0, 1.0)
        assert p.lam == (3.0, 2.0, 1.0)

    def test_a3_zero_rejected(self):
        with pytest.raises(ValueError):
            validate(3.0, 2.0, 1.0, 0.5, 1.0, a1=1.0, a2=0.0, a3=0.0)

    def test_nonpositive_k3_rejected(self):
        with pytest.raises(ValueError):
            validate(3.0, 2.0, 1.0, 0.5, 0.0)

    def test_lambda_ordering(self, pstar):
        l1, l2, l3 = pstar.lam
        assert l1 == 3.5 and l2 == 2.5 and l3 == 1.0


class TestLoadParams:
    def test_from_file(self, tmp_path):
        f = tmp_path / "p.json"
        f.write_text(json.dumps({"I1": 3, "I2": 2, "I3": 1, "K1": 0.5,
                                 "K3": 1, "a1": 2, "a2": 0, "a3": 2}))
        p = load_params(str(f))
        assert p.a1 == 1.0

    def test_from_mapping(self):
        p = load_params({"I1": 3, "I2": 2, "I3": 1, "K1": 0.5, "K3": 1,
                         "a1": 0, "a2": 0})
        assert isinstance(p, SuslovParams)

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            load_params({"I1": 3, "I2": 2, "I3": 1, "K1": 0.5, "K3": 1,
                         "a1": 0, "a2": 0, "bogus": 1})

    def test_missing_key_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            load_params({"I1": 3})


class TestMatrices:
    def test_reference_a2_zero(self, pstar):
        m = matrices(pstar)
        np.testing.assert_array_equal(m.Ka, np.diag([4.5, 2.5, 1.0]))
        np.testing.assert_array_equal(
            m.Ba, [[3.5, 0, 0], [0, 2.5, 0], [-1.0, 0, 1.0]])
        assert m.detKa == pytest.approx(11.25)

    def test_euler_case_Ka_equals_Ba(self, euler):
        m = matrices(euler)
        np.testing.assert_array_equal(m.Ka, np.diag([3.5, 2.5, 1.0]))
        np.testing.assert_array_equal(m.Ba, m.Ka)

    def test_offdiagonal_coupling(self, pstar_full):
        m = matrices(pstar_full)
        assert m.Ka[0, 1] == 1.0 and m.Ka[1, 0] == 1.0  # a1*a2*K3

    def test_invariants_random(self, rng):
        for _ in range(50):
            p = draw_params(rng)
            m = matrices(p)
            np.testing.assert_array_equal(m.Ka, m.Ka.T)
            assert np.all(np.linalg.eigvalsh(m.Ka) > 0)
            np.testing.assert_allclose(
                sorted(np.linalg.eigvals(m.Ba).real), sorted(p.lam), rtol=1e-12)
            np.testing.assert_allclose(m.Ka @ m.Ka_inv, np.eye(3), atol=1e-12)
            assert m.detKa > 0
            np.testing.assert_allclose(m.detKa, np.linalg.det(m.Ka), rtol=1e-12)


class TestVectorField:
    def test_zero_at_origin(self, pstar):
        f = vector_field(pstar)
        np.testing.assert_array_equal(f.eval(np.zeros(3)), np.zeros(3))

    def test_euler_hand_value(self, euler):
        f = vector_field(euler)
        np.testing.assert_allclose(
            f.eval(np.array([1.0, 1.0, 1.0])), [3.0 / 7.0, -1.0, 1.0], rtol=1e-14)

    def test_equilibrium_direction_annihilated(self, pstar):
        f = vector_field(pstar)
        np.testing.assert_allclose(
            f.eval(np.array([-2.5, 0.0, 1.0])), np.zeros(3), atol=1e-14)

    @given(omega=omega_strategy,
           c=st.floats(min_value=0.01, max_value=5.0, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_quadratic_homogeneity(self, omega, c):
        f = vector_field(validate(3.0, 2.0, 1.0, 0.5, 1.0, a1=1.0, a2=0.5))
        np.testing.assert_allclose(
            f.eval(c * omega), c ** 2 * f.eval(omega), atol=1e-10 * c ** 2)

    @given(omega=omega_strategy)
    @settings(max_examples=50, deadline=None)
    def test_even_under_sign_flip(self, omega):
        f = vector_field(validate(3.0, 2.0, 1.0, 0.5, 1.0, a1=0.7, a2=-1.1))
        np.testing.assert_allclose(f.eval(-omega), f.eval(omega), atol=1e-12)

    def test_sigma2_equivariance_when_a2_zero(self, pstar, rng):
        f = vector_field(pstar)
        S = np.diag([1.0, -1.0, 1.0])
        for omega in rng.normal(size=(20, 3)):
            np.testing.assert_allclose(
                S @ f.eval(S @ omega), -f.eval(omega), atol=1e-12)

    def test_sigma1_equivariance_when_a1_zero(self, pstar_a1zero, rng):
        f = vector_field(pstar_a1zero)
        S = np.diag([-1.0, 1.0, 1.0])
        for omega in rng.normal(size=(20, 3)):
            np.testing.assert_allclose(
                S @ f.eval(S @ omega), -f.eval(omega), atol=1e-12)

    def test_euler_reduction(self, euler, rng):
        f = vector_field(euler)
        m = matrices(euler)
        for omega in rng.normal(size=(20, 3)):
            expected = m.Ka_inv @ np.cross(m.Ka @ omega, omega)
            np.testing.assert_allclose(f.eval(omega), expected, atol=1e-13)
            # momentum norm ||Ka W||^2 is conserved: d/dt = 2<Ka W, Ka X>
            mom_rate = 2.0 * (m.Ka @ omega) @ (m.Ka @ f.eval(omega))
            assert abs(mom_rate) <= 1e-12 * max(1.0, np.sum(omega ** 2)) ** 2

    def test_analytic_jacobian_matches_fd(self, pstar_full):
        f = vector_field(pstar_full)
        pts = np.random.default_rng(3).uniform(-2, 2, size=(100, 3))
        J_an = f.jac(pts)
        J_fd = fd_jacobian(f.eval, pts)
        scale = np.maximum(np.abs(J_an), 1.0)
        assert np.max(np.abs(J_an - J_fd) / scale) <= 1e-6

    def test_batch_evaluation_matches_loop(self, pstar_full, rng):
        f = vector_field(pstar_full)
        pts = rng.normal(size=(7, 3))
        batch = f.eval(pts)
        for k in range(7):
            np.testing.assert_array_equal(batch[k], f.eval(pts[k]))


class TestEnergy:
    def test_values(self, pstar):
        assert energy(pstar, np.zeros(3)) == 0.0
        assert energy(pstar, np.array([0.0, 0.0, 1.0])) == pytest.approx(0.5)
        assert energy(pstar, np.array([1.0, 0.0, 0.0])) == pytest.approx(2.25)

    def test_positive_away_from_origin(self, pstar_full, rng):
        for omega in rng.normal(size=(30, 3)):
            assert energy(pstar_full, omega) > 0

    def test_first_integral_gradient_identity(self, rng):
        # <Ka W, X(W)> = 0: energy is conserved along the field
        for _ in range(30):
            p = draw_params(rng)
            f = vector_field(p)
            m = matrices(p)
            omega = rng.normal(size=3)
            rate = (m.Ka @ omega) @ f.eval(omega)
            assert abs(rate) <= 1e-12 * max(1.0, np.linalg.norm(omega) ** 3)


class TestMultiplierZeta:
    def test_zero_when_a_axial(self, euler, rng):
        for omega in rng.normal(size=(10, 3)):
            assert multiplier_zeta(euler, omega) == 0.0

    def test_zero_at_origin(self, pstar_full):
        assert multiplier_zeta(pstar_full, np.zeros(3)) == 0.0

    def test_reduces_to_first_component(self, pstar):
        # a = (1, 0, 1): zeta = K3(X3 - X1 - X3) = -K3 X1
        omega = np.array([1.0, 1.0, 1.0])
        x1 = vector_field(pstar).eval(omega)[0]
        assert multiplier_zeta(pstar, omega) == pytest.approx(-1.0 * x1, rel=1e-14)


class TestDivergence:
    def test_euler_identically_zero(self, euler, rng):
        for omega in rng.normal(size=(20, 3)):
            assert divergence_analytic(euler, omega) == 0.0

    def test_reference_values(self, pstar):
        assert divergence_analytic(pstar, np.array([0.0, 1.0, 0.0])) == \
            pytest.approx(2.5 / 11.25, rel=1e-14)
        assert divergence_analytic(pstar, np.array([1.0, 0.0, 5.0])) == 0.0

    def test_matches_jacobian_trace(self, rng):
        for _ in range(200):
            p = draw_params(rng)
            f = vector_field(p)
            omega = rng.normal(size=3)
            tr = np.trace(f.jac(omega))
            dv = divergence_analytic(p, omega)
            assert abs(dv - tr) <= 1e-8 * max(1.0, abs(tr))

    def test_matches_fd_trace(self, rng):
        for _ in range(50):
            p = draw_params(rng)
            f = vector_field(p)
            omega = rng.normal(size=3)
            tr = np.trace(fd_jacobian(f.eval, omega))
            dv = divergence_analytic(p, omega)
            assert abs(dv - tr) <= 1e-6 * max(1.0, abs(tr))

    def test_vectorized_over_points(self, pstar_full, rng):
        pts = rng.normal(size=(9, 3))
        batch = divergence_analytic(pstar_full, pts)
        for k in range(9):
            assert batch[k] == divergence_analytic(pstar_full, pts[k])
