"""Classical controlled rigid-body dynamics on the unit-quaternion double cover.

State (q, P): q a unit quaternion fixing the attitude, P the body-frame
angular momentum.  The drift and the three control fields are

    X(q, P)  = ( q * rhoP,  P x rhoP ),        rhoP = (2A Pa, 2B Pb, 2C Pc),
    Y_h(q,P) = ( 0,  (1/2) (qbar h q) x delta ),   h in {i, j, k},

with quaternion products on the attitude slot and cross products on the
momentum slot.  The span of X, Y1, Y2 and the iterated brackets [X,Y1],
[X,Y2], [[X,Y1],Y1] has full rank 6 wherever the closed-form determinant

    D(q, P) = S(q) <P, delta>,
    S(q) = A B C q0 S0(q) [ (A-C) S3(q) S4(q) - (A-B) S5(q) S6(q) ] / 2

is nonzero, which certifies bracket generation away from a thin set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rotor import RotationalConstants


@dataclass
class QuaternionState:
    """Point (q, P) of the lifted phase space S^3 x R^3."""

    q: np.ndarray
    P: np.ndarray

    def __post_init__(self) -> None:
        self.q = np.asarray(self.q, dtype=float)
        self.P = np.asarray(self.P, dtype=float)
        if self.q.shape != (4,) or self.P.shape != (3,):
            raise ValueError("state needs a 4-vector q and a 3-vector P")
        n = float(np.linalg.norm(self.q))
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"quaternion must be unit length (|q| = {n})")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.P])


def qmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Hamilton product of two quaternions (w, x, y, z)."""
    a0, a1, a2, a3 = x
    b0, b1, b2, b3 = y
    return np.array([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ])


def qconj(x: np.ndarray) -> np.ndarray:
    return np.array([x[0], -x[1], -x[2], -x[3]])


def rotation_from_quaternion(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of the double cover, v_space = q v_body qbar."""
    q0, qa, qb, qc = q
    return np.array([
        [q0 * q0 + qa * qa - qb * qb - qc * qc, 2 * (qa * qb - q0 * qc), 2 * (qa * qc + q0 * qb)],
        [2 * (qa * qb + q0 * qc), q0 * q0 - qa * qa + qb * qb - qc * qc, 2 * (qb * qc - q0 * qa)],
        [2 * (qa * qc - q0 * qb), 2 * (qb * qc + q0 * qa), q0 * q0 - qa * qa - qb * qb + qc * qc],
    ])


def _rho(P, rc: RotationalConstants) -> np.ndarray:
    return np.array([2.0 * rc.A * P[0], 2.0 * rc.B * P[1], 2.0 * rc.C * P[2]])


def drift_field(x: np.ndarray, rc: RotationalConstants) -> np.ndarray:
    """Free motion: attitude slot q * rhoP, momentum slot P x rhoP."""
    q, P = x[:4], x[4:]
    rho = _rho(P, rc)
    dq = qmul(q, np.array([0.0, rho[0], rho[1], rho[2]]))
    dP = np.cross(P, rho)
    return np.concatenate([dq, dP])


_UNIT = {1: np.array([0.0, 1.0, 0.0, 0.0]),
         2: np.array([0.0, 0.0, 1.0, 0.0]),
         3: np.array([0.0, 0.0, 0.0, 1.0])}


def control_field(i: int, x: np.ndarray, delta) -> np.ndarray:
    """Torque field of the dipole coupling to the field axis e_i.

    The attitude slot is zero; the momentum slot is half the cross product
    of the axis pulled back to the body frame with the dipole.
    """
    if i not in (1, 2, 3):
        raise ValueError(f"i must be 1, 2 or 3, got {i}")
    q = x[:4]
    u = qmul(qmul(qconj(q), _UNIT[i]), q)[1:]
    dP = 0.5 * np.cross(u, np.asarray(delta, dtype=float))
    return np.concatenate([np.zeros(4), dP])


def lie_bracket_numeric(f, g, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """[f, g](x) = Dg(x) f(x) - Df(x) g(x) by central differences (O(h^2))."""
    x = np.asarray(x, dtype=float)
    n = x.size
    fx, gx = f(x), g(x)
    out = np.zeros(n)
    for r in range(n):
        e = np.zeros(n)
        e[r] = h
        out += (g(x + e) - g(x - e)) * (fx[r] / (2.0 * h))
        out -= (f(x + e) - f(x - e)) * (gx[r] / (2.0 * h))
    return out


def _s_parts(q, delta):
    q0, qa, qb, qc = q
    da, db, dc = delta
    s0 = (q0 * (-2 * qb * da + 2 * qa * db) + 2 * qc * (qa * da + qb * db)
          + q0 ** 2 * dc - (qa ** 2 + qb ** 2 - qc ** 2) * dc) ** 2
    s3 = (-2 * qa * qb * da + 2 * q0 * qc * da
          + (q0 ** 2 + qa ** 2 - qb ** 2 - qc ** 2) * db)
    s4 = (-2 * (q0 * qb + qa * qc) * (da ** 2 + db ** 2)
          + (q0 ** 2 * da + qa ** 2 * da - (qb ** 2 + qc ** 2) * da
             + 2 * qa * qb * db - 2 * q0 * qc * db) * dc)
    s5 = (-2 * (q0 * qb + qa * qc) * da
          + (q0 ** 2 + qa ** 2 - qb ** 2 - qc ** 2) * dc)
    s6 = (q0 ** 2 * da * db + qa ** 2 * da * db - (qb ** 2 + qc ** 2) * da * db
          + 2 * qa * qc * db * dc - 2 * qa * qb * (da ** 2 + dc ** 2)
          + 2 * q0 * (qb * db * dc + qc * (da ** 2 + dc ** 2)))
    return s0, s3, s4, s5, s6


def closed_form_S(q, delta, rc: RotationalConstants) -> float:
    """Polynomial factor S(q) of the bracket determinant.

    Vanishes with q0 and with the dipole; the quadratic-in-q sub-polynomials
    are combined with the weights (A-C) and -(A-B) fixed by the exact
    factorization of the 6x6 determinant (checked symbolically and, in the
    tests, against the numerical determinant).
    """
    q = np.asarray(q, dtype=float)
    delta = np.asarray(delta, dtype=float)
    s0, s3, s4, s5, s6 = _s_parts(q, delta)
    A, B, C = rc.A, rc.B, rc.C
    return A * B * C * q[0] * s0 * ((A - C) * s3 * s4 - (A - B) * s5 * s6) / 2.0


def bracket_columns(x: np.ndarray, delta, rc: RotationalConstants,
                    h: float = 1e-5, h_nested: float = 1e-4) -> np.ndarray:
    """The 7x6 matrix (X, Y1, Y2, [X,Y1], [X,Y2], [[X,Y1],Y1]) at x."""
    X = lambda t: drift_field(t, rc)
    Y1 = lambda t: control_field(1, t, delta)
    Y2 = lambda t: control_field(2, t, delta)
    XY1 = lambda t: lie_bracket_numeric(X, Y1, t, h)
    cols = [X(x), Y1(x), Y2(x),
            lie_bracket_numeric(X, Y1, x, h),
            lie_bracket_numeric(X, Y2, x, h),
            lie_bracket_numeric(XY1, Y1, x, h_nested)]
    return np.stack(cols, axis=1)


def bracket_determinant(state: QuaternionState, delta, rc: RotationalConstants,
                        h: float = 1e-5, h_nested: float = 1e-4) -> float:
    """Numeric determinant of the 6x6 matrix left after dropping the first
    row of the bracket-column matrix; equals closed_form_S(q) <P, delta>."""
    M = bracket_columns(state.as_vector(), delta, rc, h, h_nested)
    return float(np.linalg.det(M[1:, :]))


def determinant_pair(state: QuaternionState, delta, rc: RotationalConstants) -> tuple[float, float]:
    """(numeric determinant, closed-form product) at one state."""
    num = bracket_determinant(state, delta, rc)
    cf = closed_form_S(state.q, delta, rc) * float(np.dot(state.P, np.asarray(delta)))
    return num, cf


def rank_at(state: QuaternionState, delta, rc: RotationalConstants,
            fields=None, tol_svd: float = 1e-8) -> int:
    """Numerical rank of the evaluated field span in the 6-dim tangent space.

    The radial quaternion direction is projected out with I - q q^T; one
    attitude row (the first, or the largest-|q| row when |q0| < 0.1) is then
    dropped, matching a chart choice, and the rank is read off the singular
    values relative to the largest.
    """
    x = state.as_vector()
    if fields is None:
        M = bracket_columns(x, delta, rc)
    else:
        M = np.stack([f(x) for f in fields], axis=1)
    q = state.q
    M = M.astype(float).copy()
    M[:4, :] = M[:4, :] - np.outer(q, q @ M[:4, :])
    drop = 0 if abs(q[0]) >= 0.1 else int(np.argmax(np.abs(q)))
    rows = [r for r in range(7) if r != drop]
    sv = np.linalg.svd(M[rows, :], compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol_svd * sv[0]))


def momentum_norm2(x: np.ndarray) -> float:
    return float(np.dot(x[4:], x[4:]))


def rotational_energy(x: np.ndarray, rc: RotationalConstants) -> float:
    P = x[4:]
    return float(rc.A * P[0] ** 2 + rc.B * P[1] ** 2 + rc.C * P[2] ** 2)


def _rhs_free(y, A2, B2, C2):
    # scalar drift; A2 = 2A etc.  ~30 flops, kept numpy-free for step rate
    q0, qa, qb, qc, Pa, Pb, Pc = y
    ra, rb, rt = A2 * Pa, B2 * Pb, C2 * Pc
    return (
        -qa * ra - qb * rb - qc * rt,
        q0 * ra + qb * rt - qc * rb,
        q0 * rb + qc * ra - qa * rt,
        q0 * rt + qa * rb - qb * ra,
        Pb * rt - Pc * rb,
        Pc * ra - Pa * rt,
        Pa * rb - Pb * ra,
    )


def simulate(state0: QuaternionState, control, rc: RotationalConstants,
             delta, T: float, dt: float) -> dict:
    """Integrate the controlled system with classical RK4.

    ``control`` maps time to the three field amplitudes (or is None for
    free motion).  The quaternion is renormalized after every step.  With
    zero control, |P|^2 and the rotational energy are conserved up to the
    integrator error.
    """
    if dt <= 0.0 or T < 0.0:
        raise ValueError("need dt > 0 and T >= 0")
    delta = np.asarray(delta, dtype=float)
    nsteps = int(round(T / dt))
    states = np.empty((nsteps + 1, 7))
    states[0] = state0.as_vector()

    if control is None:
        A2, B2, C2 = 2.0 * rc.A, 2.0 * rc.B, 2.0 * rc.C
        y = tuple(float(v) for v in states[0])
        half, sixth = dt / 2.0, dt / 6.0
        for step in range(1, nsteps + 1):
            k1 = _rhs_free(y, A2, B2, C2)
            k2 = _rhs_free(tuple(a + half * b for a, b in zip(y, k1)), A2, B2, C2)
            k3 = _rhs_free(tuple(a + half * b for a, b in zip(y, k2)), A2, B2, C2)
            k4 = _rhs_free(tuple(a + dt * b for a, b in zip(y, k3)), A2, B2, C2)
            y = tuple(a + sixth * (b + 2.0 * c + 2.0 * d + e)
                      for a, b, c, d, e in zip(y, k1, k2, k3, k4))
            nq = math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3])
            if not math.isfinite(nq) or nq == 0.0:
                raise FloatingPointError(f"state became non-finite at step {step}")
            y = (y[0] / nq, y[1] / nq, y[2] / nq, y[3] / nq, y[4], y[5], y[6])
            states[step] = y
    else:
        def rhs(t: float, yv: np.ndarray) -> np.ndarray:
            out = drift_field(yv, rc)
            u = np.asarray(control(t), dtype=float)
            for i in (1, 2, 3):
                if u[i - 1] != 0.0:
                    out = out + u[i - 1] * control_field(i, yv, delta)
            return out

        x = states[0].copy()
        t = 0.0
        for step in range(1, nsteps + 1):
            k1 = rhs(t, x)
            k2 = rhs(t + dt / 2, x + dt / 2 * k1)
            k3 = rhs(t + dt / 2, x + dt / 2 * k2)
            k4 = rhs(t + dt, x + dt * k3)
            x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            nq = float(np.linalg.norm(x[:4]))
            if not np.isfinite(nq) or nq == 0.0:
                raise FloatingPointError(f"state became non-finite at step {step}")
            x[:4] /= nq
            t += dt
            states[step] = x

    times = dt * np.arange(nsteps + 1)
    P = states[:, 4:]
    return {
        "times": times,
        "states": states,
        "momentum_norm2": np.einsum("ij,ij->i", P, P),
        "energy": rc.A * P[:, 0] ** 2 + rc.B * P[:, 1] ** 2 + rc.C * P[:, 2] ** 2,
    }
