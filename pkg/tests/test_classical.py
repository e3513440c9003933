import math

import numpy as np
import pytest

from topcert.classical import (
    QuaternionState,
    bracket_columns,
    bracket_determinant,
    closed_form_S,
    control_field,
    determinant_pair,
    drift_field,
    lie_bracket_numeric,
    momentum_norm2,
    qconj,
    qmul,
    rank_at,
    rotation_from_quaternion,
    rotational_energy,
    simulate,
)
from topcert.rotor import RotationalConstants

RC = RotationalConstants(2.3, 1.4, 0.6)
RNG = np.random.default_rng(2024)


def random_state(rng=RNG):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return QuaternionState(q, rng.normal(size=3))


def printed_y1(x, delta):
    """Regression form of the first control field's displayed components."""
    q0, qa, qb, qc = x[:4]
    da, db, dc = delta
    return np.array([
        0, 0, 0, 0,
        (qa * qb - q0 * qc) * dc - (qa * qc + q0 * qb) * db,
        (qa * qc + q0 * qb) * da - 0.5 * (q0**2 + qa**2 - qb**2 - qc**2) * dc,
        0.5 * (q0**2 + qa**2 - qb**2 - qc**2) * db - (qa * qb - q0 * qc) * da,
    ])


def printed_y2(x, delta):
    q0, qa, qb, qc = x[:4]
    da, db, dc = delta
    return np.array([
        0, 0, 0, 0,
        0.5 * (q0**2 - qa**2 + qb**2 - qc**2) * dc - (qb * qc - q0 * qa) * db,
        (qb * qc - q0 * qa) * da - (qa * qb + q0 * qc) * dc,
        (qa * qb + q0 * qc) * db - 0.5 * (q0**2 - qa**2 + qb**2 - qc**2) * da,
    ])


class TestFields:
    def test_drift_at_identity_spinning_about_a(self):
        x = np.array([1.0, 0, 0, 0, 1.0, 0, 0])
        out = drift_field(x, RC)
        np.testing.assert_allclose(out[:4], [0.0, 2 * RC.A, 0.0, 0.0])
        np.testing.assert_allclose(out[4:], 0.0)

    def test_drift_vanishes_at_rest(self):
        x = np.array([1.0, 0, 0, 0, 0.0, 0, 0])
        np.testing.assert_array_equal(drift_field(x, RC), np.zeros(7))

    def test_principal_axis_equilibria(self):
        for axis in range(3):
            P = np.zeros(3)
            P[axis] = 1.7
            x = np.concatenate([[1.0, 0, 0, 0], P])
            np.testing.assert_allclose(drift_field(x, RC)[4:], 0.0, atol=1e-15)

    def test_control_example_at_identity(self):
        x = np.array([1.0, 0, 0, 0, 0.3, -0.2, 0.9])
        out = control_field(1, x, np.array([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(out, [0, 0, 0, 0, 0.0, -0.5, 0.0], atol=1e-15)

    def test_zero_dipole(self):
        x = random_state().as_vector()
        for i in (1, 2, 3):
            np.testing.assert_array_equal(control_field(i, x, np.zeros(3)), np.zeros(7))

    def test_matches_printed_displays(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            x = random_state(rng).as_vector()
            delta = rng.normal(size=3)
            np.testing.assert_allclose(control_field(1, x, delta),
                                       printed_y1(x, delta), atol=1e-13)
            np.testing.assert_allclose(control_field(2, x, delta),
                                       printed_y2(x, delta), atol=1e-13)

    def test_tangency(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            x = random_state(rng).as_vector()
            q = x[:4]
            assert abs(np.dot(q, drift_field(x, RC)[:4])) < 1e-12
            for i in (1, 2, 3):
                assert np.dot(q, control_field(i, x, rng.normal(size=3))[:4]) == 0.0

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            control_field(0, random_state().as_vector(), np.ones(3))


class TestBrackets:
    def test_self_bracket_vanishes(self):
        X = lambda t: drift_field(t, RC)
        for _ in range(5):
            x = random_state().as_vector()
            assert np.max(np.abs(lie_bracket_numeric(X, X, x))) < 1e-8

    def test_control_fields_commute(self):
        delta = np.array([0.7, -0.4, 0.2])
        fields = [lambda t, i=i: control_field(i, t, delta) for i in (1, 2, 3)]
        for _ in range(5):
            x = random_state().as_vector()
            for a in range(3):
                for b in range(3):
                    br = lie_bracket_numeric(fields[a], fields[b], x)
                    assert np.max(np.abs(br)) < 1e-7

    def test_antisymmetry(self):
        delta = np.array([0.5, 0.1, -0.9])
        X = lambda t: drift_field(t, RC)
        Y = lambda t: control_field(2, t, delta)
        x = random_state().as_vector()
        fwd = lie_bracket_numeric(X, Y, x)
        rev = lie_bracket_numeric(Y, X, x)
        np.testing.assert_allclose(fwd, -rev, atol=1e-8)

    def test_drift_control_bracket_attitude_part(self):
        # the attitude slot of [X, Y_i] is the transported torque gradient:
        # 2 vec(qbar * dq) = -rho( delta x (R^T e_i) )
        rng = np.random.default_rng(8)
        delta = rng.normal(size=3)
        X = lambda t: drift_field(t, RC)
        for i in (1, 2, 3):
            Y = lambda t, i=i: control_field(i, t, delta)
            st = random_state(rng)
            x = st.as_vector()
            br = lie_bracket_numeric(X, Y, x)
            v = 2.0 * qmul(qconj(st.q), br[:4])[1:]
            R = rotation_from_quaternion(st.q)
            e = np.zeros(3)
            e[i - 1] = 1.0
            body_axis = R.T @ e
            want = -np.array([2 * RC.A, 2 * RC.B, 2 * RC.C]) * np.cross(delta, body_axis)
            np.testing.assert_allclose(v, want, atol=1e-6)


class TestDeterminant:
    def test_closed_form_vanishes_with_q0(self):
        q = np.array([0.0, 0.6, 0.0, 0.8])
        assert closed_form_S(q, np.array([0.3, 0.5, -0.2]), RC) == 0.0

    def test_closed_form_vanishes_with_dipole(self):
        st = random_state()
        assert closed_form_S(st.q, np.zeros(3), RC) == 0.0

    def test_momentum_orthogonal_to_dipole(self):
        rng = np.random.default_rng(3)
        delta = rng.normal(size=3)
        P = np.cross(delta, rng.normal(size=3))  # orthogonal to delta
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        st = QuaternionState(q, P)
        num, cf = determinant_pair(st, delta, RC)
        assert cf == pytest.approx(0.0, abs=1e-12)
        assert abs(num) < 1e-4 * max(1.0, abs(closed_form_S(q, delta, RC)))

    def test_factorization_on_random_states(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(40):
            st = random_state(rng)
            delta = rng.normal(size=3)
            num, cf = determinant_pair(st, delta, RC)
            worst = max(worst, abs(num - cf) / max(abs(cf), 1e-12))
        assert worst < 1e-5

    def test_zero_momentum(self):
        q = np.array([1.0, 0, 0, 0])
        st = QuaternionState(q, np.zeros(3))
        num, cf = determinant_pair(st, np.array([1.0, 1.0, 1.0]), RC)
        assert cf == 0.0
        assert abs(num) < 1e-10


class TestRank:
    def test_generic_state_full_rank(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            st = random_state(rng)
            delta = rng.normal(size=3)
            num, cf = determinant_pair(st, delta, RC)
            if abs(cf) > 1e-6:
                assert rank_at(st, delta, RC) == 6

    def test_axis_dipoles_full_rank(self):
        rng = np.random.default_rng(12)
        for delta in (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0])):
            hits = 0
            for _ in range(20):
                st = random_state(rng)
                num, cf = determinant_pair(st, delta, RC)
                if abs(cf) > 1e-6:
                    assert rank_at(st, delta, RC) == 6
                    hits += 1
            assert hits > 5

    def test_fiber_fields_alone(self):
        st = QuaternionState(np.array([1.0, 0, 0, 0]), np.zeros(3))
        delta = np.array([0.3, 0.8, -0.5])
        fields = [lambda t, i=i: control_field(i, t, delta) for i in (1, 2, 3)]
        assert rank_at(st, delta, RC, fields=fields) <= 3

    def test_everything_zero(self):
        st = QuaternionState(np.array([1.0, 0, 0, 0]), np.zeros(3))
        fields = [lambda t, i=i: control_field(i, t, np.zeros(3)) for i in (1, 2, 3)]
        assert rank_at(st, np.zeros(3), RC, fields=fields) == 0

    def test_small_q0_chart_switch(self):
        q = np.array([0.01, 0.9999, 0.0, 0.0])
        q /= np.linalg.norm(q)
        st = QuaternionState(q, np.array([0.4, -0.7, 0.3]))
        delta = np.array([0.5, 0.4, 0.6])
        assert rank_at(st, delta, RC) in (5, 6)


class TestSimulate:
    def test_conservation_free_motion(self):
        rng = np.random.default_rng(1)
        st = random_state(rng)
        traj = simulate(st, None, RC, np.zeros(3), T=10.0, dt=1e-3)
        p2, en = traj["momentum_norm2"], traj["energy"]
        assert np.max(np.abs(p2 - p2[0])) / p2[0] < 1e-8
        assert np.max(np.abs(en - en[0])) / abs(en[0]) < 1e-8

    def test_principal_axis_rotation(self):
        st = QuaternionState(np.array([1.0, 0, 0, 0]), np.array([1.0, 0.0, 0.0]))
        traj = simulate(st, None, RC, np.zeros(3), T=2.0, dt=1e-3)
        P = traj["states"][:, 4:]
        np.testing.assert_allclose(P, [[1.0, 0.0, 0.0]] * P.shape[0], atol=1e-12)
        # attitude precesses about the first body axis
        assert np.max(np.abs(traj["states"][:, 2])) < 1e-12
        assert np.max(np.abs(traj["states"][:, 3])) < 1e-12
        assert np.max(np.abs(traj["states"][:, 1])) > 0.5

    def test_zero_dipole_control_matches_free(self):
        rng = np.random.default_rng(2)
        st = random_state(rng)
        free = simulate(st, None, RC, np.zeros(3), T=1.0, dt=1e-3)
        driven = simulate(st, lambda t: (0.8, -0.3, 0.5), RC, np.zeros(3), T=1.0, dt=1e-3)
        np.testing.assert_allclose(free["states"][-1], driven["states"][-1], atol=1e-12)

    def test_control_breaks_conservation(self):
        st = QuaternionState(np.array([1.0, 0, 0, 0]), np.array([0.5, 0.2, -0.4]))
        traj = simulate(st, lambda t: (1.0, 0.0, 0.0), RC,
                        np.array([0.0, 0.0, 1.0]), T=1.0, dt=1e-3)
        en = traj["energy"]
        assert np.max(np.abs(en - en[0])) > 1e-4

    def test_unit_quaternion_maintained(self):
        st = random_state()
        traj = simulate(st, lambda t: (0.3, 0.1, -0.2), RC,
                        np.array([0.3, 0.4, 0.5]), T=0.5, dt=1e-3)
        norms = np.linalg.norm(traj["states"][:, :4], axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            simulate(random_state(), None, RC, np.zeros(3), T=1.0, dt=0.0)


class TestStateValidation:
    def test_non_unit_quaternion_rejected(self):
        with pytest.raises(ValueError):
            QuaternionState(np.array([1.0, 1.0, 0, 0]), np.zeros(3))

    def test_helpers(self):
        x = np.array([1.0, 0, 0, 0, 1.0, 2.0, 3.0])
        assert momentum_norm2(x) == 14.0
        assert rotational_energy(x, RC) == pytest.approx(
            RC.A + 4 * RC.B + 9 * RC.C)
