"""Invariant-subspace certificates for axis-aligned dipoles.

Three families of closed subspaces, each splitting the state space into an
even and an odd half, are classified by a parity of the Wang labels:

* family K: parity of k,
* family G: parity of j + p,
* family L: parity of j + k + p.

A dipole along a single principal axis makes one family invariant under
both the free Hamiltonian and all three control operators (c <-> K,
b <-> L, a <-> G), which rules out controllability; for a generic dipole
every family is broken by an explicit matrix element.  This module computes
those cross-parity norms as finite certificates.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import WangIndex, wang_kp_pairs
from .dipole import DipoleMoment, wang_level_pair
from .rotor import RotationalConstants, build_hamiltonian_block
from .so3 import OBLATE


class Family(Enum):
    K = "K"
    G = "G"
    L = "L"


class DipoleClassKind(Enum):
    AXIS_A = "axis_a"
    AXIS_B = "axis_b"
    AXIS_C = "axis_c"
    GENERIC_IN_AB_PLANE = "generic_in_ab_plane"
    GENERIC = "generic"


OBSTRUCTION = {
    DipoleClassKind.AXIS_A: Family.G,
    DipoleClassKind.AXIS_B: Family.L,
    DipoleClassKind.AXIS_C: Family.K,
}


@dataclass(frozen=True)
class DipoleClass:
    kind: DipoleClassKind
    obstruction: Family | None


def classify_wang(index: WangIndex, family: Family) -> str:
    """Parity class ("even"/"odd") of a Wang label in the given family."""
    if family is Family.K:
        value = index.k
    elif family is Family.G:
        value = index.j + index.p
    else:
        value = index.j + index.k + index.p
    return "even" if value % 2 == 0 else "odd"


def classify_dipole(delta: DipoleMoment, tol: float = 1e-12) -> DipoleClass:
    """Sort a dipole into axis / in-plane / generic classes.

    ``tol`` is relative to the dipole norm; components below it count as
    exactly zero, reflecting that axis alignment is the physically meaningful
    exact case.
    """
    comps = delta.as_array()
    norm = float(np.linalg.norm(comps))
    if norm == 0.0:
        raise ValueError("zero dipole cannot be classified")
    big = np.abs(comps) > tol * norm
    if big.sum() == 1:
        kind = (DipoleClassKind.AXIS_A, DipoleClassKind.AXIS_B,
                DipoleClassKind.AXIS_C)[int(np.argmax(big))]
        return DipoleClass(kind=kind, obstruction=OBSTRUCTION[kind])
    if not big[2] and big[0] and big[1]:
        return DipoleClass(kind=DipoleClassKind.GENERIC_IN_AB_PLANE, obstruction=None)
    return DipoleClass(kind=DipoleClassKind.GENERIC, obstruction=None)


def _parity_masks(j: int, family: Family) -> tuple[np.ndarray, np.ndarray]:
    """Even/odd masks over the full level-j Wang ordering ((k,p)-major, m)."""
    flags = []
    for (k, p) in wang_kp_pairs(j):
        probe = WangIndex(j, k, 0, p)
        flags.extend([classify_wang(probe, family) == "even"] * (2 * j + 1))
    even = np.array(flags, dtype=bool)
    return even, ~even


@dataclass(frozen=True)
class CrossNorm:
    """Largest cross-parity magnitude of one operator on one level pair."""

    operator: str
    levels: tuple[int, int]
    norm: float
    witness: tuple[int, int] | None  # flat (row, col) of the largest entry


@dataclass(frozen=True)
class InvarianceReport:
    """Cross-parity audit of H and H_1..H_3 on all levels up to j_max."""

    family: Family
    j_max: int
    entries: tuple[CrossNorm, ...]

    @property
    def max_norm(self) -> float:
        return max((e.norm for e in self.entries), default=0.0)

    def worst(self) -> CrossNorm | None:
        return max(self.entries, key=lambda e: e.norm, default=None)


def invariance_certificate(delta: DipoleMoment, family: Family, j_max: int,
                           rc: RotationalConstants,
                           convention: str = OBLATE) -> InvarianceReport:
    """Cross-parity norms of the free and control operators up to j_max.

    For every level pair (j, j') with |j - j'| <= 1 and j, j' <= j_max, the
    control matrices i H_l are formed in the Wang representation and the
    largest magnitude connecting the even to the odd class of ``family`` is
    recorded.  The free Hamiltonian is included per level; its cross norms
    are structural zeros because it conserves k parity and p exactly.
    """
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    entries: list[CrossNorm] = []
    for j in range(j_max + 1):
        even_j, odd_j = _parity_masks(j, family)
        # free Hamiltonian on level j, expanded over the m-copies
        Hs = np.kron(build_hamiltonian_block(j, rc, convention), np.eye(2 * j + 1))
        cross = np.abs(Hs[np.ix_(even_j, odd_j)])
        entries.append(CrossNorm("H", (j, j), float(cross.max(initial=0.0)), None))
        for j2 in (j, j + 1):
            if j2 > j_max:
                continue
            even_k, odd_k = _parity_masks(j2, family)
            for l in (1, 2, 3):
                M = wang_level_pair(l, j, j2, delta, convention)
                blocks = [M[np.ix_(even_j, odd_k)], M[np.ix_(odd_j, even_k)]]
                best, witness = 0.0, None
                for Bm in blocks:
                    if Bm.size and np.abs(Bm).max() > best:
                        best = float(np.abs(Bm).max())
                        witness = tuple(int(x) for x in
                                        np.unravel_index(np.argmax(np.abs(Bm)), Bm.shape))
                entries.append(CrossNorm(f"H{l}", (j, j2), best, witness))
    return InvarianceReport(family=family, j_max=j_max, entries=tuple(entries))


def propagator_leakage(delta: DipoleMoment, family: Family, j: int,
                       rc: RotationalConstants, controls=(0.3, -0.2, 0.4),
                       t: float = 1.0, seed: int = 0,
                       convention: str = OBLATE) -> float:
    """Odd-component mass leaked by evolving a random even-supported state.

    The generator H + sum_l u_l H_l is exponentiated exactly on the span of
    levels j and j+1 (Galerkin truncation); for a matched (axis, family)
    pair the leakage is bounded by the truncation alone.
    """
    from .dipole import build_control_blocks

    blocks = build_control_blocks(j, delta, convention, target_rep="wang")
    nlo = (2 * j + 1) ** 2
    nhi = (2 * (j + 1) + 1) ** 2
    Hfree = np.zeros((nlo + nhi, nlo + nhi), dtype=complex)
    Hfree[:nlo, :nlo] = np.kron(build_hamiltonian_block(j, rc, convention),
                                np.eye(2 * j + 1))
    Hfree[nlo:, nlo:] = np.kron(build_hamiltonian_block(j + 1, rc, convention),
                                np.eye(2 * j + 3))
    Htot = Hfree.astype(complex)
    for u, M in zip(controls, blocks.matrices):
        Htot = Htot + u * (M / 1j)  # matrices store i*H_l
    w, v = np.linalg.eigh(Htot)
    U = (v * np.exp(-1j * t * w)) @ v.conj().T

    even_lo, _ = _parity_masks(j, family)
    even_hi, _ = _parity_masks(j + 1, family)
    even = np.concatenate([even_lo, even_hi])
    rng = np.random.default_rng(seed)
    psi = np.where(even, rng.normal(size=even.size) + 1j * rng.normal(size=even.size), 0.0)
    psi = psi / np.linalg.norm(psi)
    out = U @ psi
    return float(np.sum(np.abs(out[~even]) ** 2))
