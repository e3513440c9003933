"""Stark control operators in the Wigner, Wang, and rotor-eigenbasis representations.

The three control operators are the multiplication operators
``H_l = -<R delta, e_l>``; their matrix elements in the rotation-group
harmonic basis follow angular-momentum selection rules: they vanish unless
|j'-j| <= 1, |k'-k| <= 1 and |m'-m| <= 1.  Within that band the operators
``i H_l`` have closed-form elements built from eight coefficient families,
implemented below and validated against the quadrature oracle of
:mod:`topcert.so3` (the two routes share no code).

All elements are of the skew form ``T(bra, ket) = <psi_bra, i H_l psi_ket>``
with inner product linear in the first slot, so that
``T(bra, ket) = -conj(T(ket, bra))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import WangIndex, WignerIndex, level_dim, wang_expansion, wang_kp_pairs
from .so3 import OBLATE, PROLATE, body_dipole


@dataclass(frozen=True)
class DipoleMoment:
    """Electric dipole components along the principal inertia axes a, b, c."""

    delta_a: float
    delta_b: float
    delta_c: float

    def as_array(self) -> np.ndarray:
        return np.array([self.delta_a, self.delta_b, self.delta_c])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def _sq(x: float) -> float:
    return math.sqrt(x) if x > 0.0 else 0.0


# Coefficient families for the nonvanishing elements.  The arguments are the
# bra quantum numbers; sign conventions of the rows are folded into
# _element123 below.

def coef_c(j: int, k: int, m: int) -> float:
    return (_sq((j + k + 1) * (j + k + 2)) * _sq((j + m + 1) * (j + m + 2))
            / (4.0 * (j + 1) * _sq((2 * j + 1) * (2 * j + 3))))


def coef_d(j: int, k: int, m: int) -> float:
    return (_sq((j + k + 1) * (j + k + 2)) * _sq((j + 1) ** 2 - m * m)
            / (2.0 * (j + 1) * _sq((2 * j + 1) * (2 * j + 3))))


def coef_h(j: int, k: int, m: int) -> float:
    x = j * (j + 1)
    return _sq(x - k * (k + 1)) * _sq(x - m * (m + 1)) / (4.0 * x)


def coef_q(j: int, k: int, m: int) -> float:
    x = j * (j + 1)
    return _sq(x - k * (k + 1)) * m / (2.0 * x)


def coef_a(j: int, k: int, m: int) -> float:
    return (_sq((j + 1) ** 2 - k * k) * _sq((j + m + 1) * (j + m + 2))
            / (2.0 * (j + 1) * _sq((2 * j + 1) * (2 * j + 3))))


def coef_b(j: int, k: int, m: int) -> float:
    return (_sq((j + 1) ** 2 - k * k) * _sq((j + 1) ** 2 - m * m)
            / ((j + 1) * _sq((2 * j + 1) * (2 * j + 3))))


def coef_f(j: int, k: int, m: int) -> float:
    x = j * (j + 1)
    return k * _sq(x - m * (m + 1)) / (2.0 * x)


def coef_g(j: int, k: int, m: int) -> float:
    return k * m / (j * (j + 1))


def _element123(l: int, j: int, k: int, m: int,
                j2: int, k2: int, m2: int,
                d1: float, d2: float, d3: float) -> complex:
    """<(j,k,m), i H_l (j2,k2,m2)> with the dipole in body indices (1,2,3)."""
    dj, dk, dm = j2 - j, k2 - k, m2 - m
    if abs(dj) > 1 or abs(dk) > 1 or abs(dm) > 1:
        return 0.0j
    if dj == -1:
        return -np.conj(_element123(l, j2, k2, m2, j, k, m, d1, d2, d3))
    circ = complex(d2, dk * d1)  # d2 + i*dk*d1
    if dj == 1:
        if l in (1, 2) and abs(dk) == 1 and abs(dm) == 1:
            cc = coef_c(j, dk * k, dm * m)
            return dm * cc * circ if l == 1 else 1j * cc * circ
        if l == 3 and abs(dk) == 1 and dm == 0:
            return coef_d(j, dk * k, m) * circ
        if l in (1, 2) and dk == 0 and abs(dm) == 1:
            aa = coef_a(j, k, dm * m)
            return 1j * dm * aa * d3 if l == 1 else -aa * d3
        if l == 3 and dk == 0 and dm == 0:
            return 1j * coef_b(j, k, m) * d3
        return 0.0j
    # dj == 0
    if j == 0:
        return 0.0j
    if l in (1, 2) and abs(dk) == 1 and abs(dm) == 1:
        hh = coef_h(j, dk * k, dm * m)
        return dk * hh * circ if l == 1 else 1j * dk * dm * hh * circ
    if l == 3 and abs(dk) == 1 and dm == 0:
        return -dk * coef_q(j, dk * k, m) * circ
    if l in (1, 2) and dk == 0 and abs(dm) == 1:
        ff = coef_f(j, k, dm * m)
        return -1j * ff * d3 if l == 1 else dm * ff * d3
    if l == 3 and dk == 0 and dm == 0:
        return 1j * coef_g(j, k, m) * d3
    return 0.0j


def wigner_element(l: int, bra: WignerIndex, ket: WignerIndex,
                   delta: DipoleMoment, convention: str = OBLATE) -> complex:
    """Tabulated element <psi_bra, i H_l psi_ket>."""
    if l not in (1, 2, 3):
        raise ValueError(f"l must be 1, 2 or 3, got {l}")
    d1, d2, d3 = body_dipole(delta.as_array(), convention)
    return _element123(l, bra.j, bra.k, bra.m, ket.j, ket.k, ket.m, d1, d2, d3)


def wang_element(l: int, bra: WangIndex, ket: WangIndex,
                 delta: DipoleMoment, convention: str = OBLATE) -> complex:
    """Element <S_bra, i H_l S_ket> between Wang functions."""
    d1, d2, d3 = body_dipole(delta.as_array(), convention)
    out = 0.0j
    for wb, cb in wang_expansion(bra):
        for wk, ck in wang_expansion(ket):
            out += cb * np.conj(ck) * _element123(
                l, wb.j, wb.k, wb.m, wk.j, wk.k, wk.m, d1, d2, d3)
    return out


def wang_transform(j: int) -> np.ndarray:
    """Real matrix W with S-basis = W @ psi-basis for one (j, m) shell.

    Rows follow the (k, p) ordering of :func:`wang_kp_pairs`; columns the
    signed k ordering -j..j.
    """
    n = 2 * j + 1
    W = np.zeros((n, n))
    r = 1.0 / math.sqrt(2.0)
    for row, (k, p) in enumerate(wang_kp_pairs(j)):
        if k == 0:
            W[row, j] = 1.0
        else:
            W[row, j + k] = r
            W[row, j - k] = -r if (p + k) % 2 else r
    return W


def _wigner_level_pair(l: int, jb: int, jk: int, d123) -> np.ndarray:
    """Matrix of i H_l between levels jb and jk in the signed-k Wigner
    ordering (k-major, then m)."""
    d1, d2, d3 = d123
    nb, nk = level_dim(jb), level_dim(jk)
    M = np.zeros((nb, nk), dtype=complex)
    if abs(jb - jk) > 1:
        return M
    wb = 2 * jb + 1
    wk = 2 * jk + 1
    for k in range(-jb, jb + 1):
        for m in range(-jb, jb + 1):
            r = (k + jb) * wb + (m + jb)
            for k2 in range(max(k - 1, -jk), min(k + 1, jk) + 1):
                for m2 in range(max(m - 1, -jk), min(m + 1, jk) + 1):
                    v = _element123(l, jb, k, m, jk, k2, m2, d1, d2, d3)
                    if v != 0.0:
                        M[r, (k2 + jk) * wk + (m2 + jk)] = v
    return M


def wang_level_pair(l: int, jb: int, jk: int, delta: DipoleMoment,
                    convention: str = OBLATE) -> np.ndarray:
    """Matrix of i H_l between levels jb and jk in the Wang ordering
    ((k, p)-major, then m)."""
    d123 = body_dipole(delta.as_array(), convention)
    M = _wigner_level_pair(l, jb, jk, d123)
    Wb = np.kron(wang_transform(jb), np.eye(2 * jb + 1))
    Wk = np.kron(wang_transform(jk), np.eye(2 * jk + 1))
    return Wb @ M @ Wk.T


@dataclass(frozen=True)
class ControlOperatorBlock:
    """The three control operators restricted to one Galerkin block.

    ``matrices[l-1]`` is the n_j x n_j matrix of ``i H_l`` on the span of
    levels j and j+1, in the requested representation; level j indices come
    first.
    """

    j: int
    representation: str
    matrices: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def dimension(self) -> int:
        return self.matrices[0].shape[0]


def build_control_blocks(j: int, delta: DipoleMoment, convention: str = OBLATE,
                         target_rep: str = "wang", spectra=None) -> ControlOperatorBlock:
    """Assemble i H_1, i H_2, i H_3 on the two-level block (j, j+1).

    ``target_rep`` selects the basis: "wigner" (signed-k harmonics), "wang"
    (symmetrized combinations) or "eigen" (asymmetric-rotor eigenfunctions;
    requires the pair of diagonalized level spectra for j and j+1).
    """
    if target_rep not in ("wigner", "wang", "eigen"):
        raise ValueError(f"unknown representation {target_rep!r}")
    if target_rep == "eigen" and spectra is None:
        raise ValueError("eigen representation requires the (j, j+1) spectra")
    levels = (j, j + 1)
    d123 = body_dipole(delta.as_array(), convention)
    mats = []
    for l in (1, 2, 3):
        blocks = {}
        for lb in levels:
            for lk in levels:
                M = _wigner_level_pair(l, lb, lk, d123)
                if target_rep in ("wang", "eigen"):
                    Wb = np.kron(wang_transform(lb), np.eye(2 * lb + 1))
                    Wk = np.kron(wang_transform(lk), np.eye(2 * lk + 1))
                    M = Wb @ M @ Wk.T
                if target_rep == "eigen":
                    Zb = np.kron(spectra[lb - j].vectors, np.eye(2 * lb + 1))
                    Zk = np.kron(spectra[lk - j].vectors, np.eye(2 * lk + 1))
                    M = Zb.T @ M @ Zk
                blocks[(lb, lk)] = M
        top = np.hstack([blocks[(j, j)], blocks[(j, j + 1)]])
        bot = np.hstack([blocks[(j + 1, j)], blocks[(j + 1, j + 1)]])
        mats.append(np.vstack([top, bot]))
    return ControlOperatorBlock(j=j, representation=target_rep, matrices=tuple(mats))
