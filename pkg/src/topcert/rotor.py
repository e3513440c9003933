"""Rotational Hamiltonians of symmetric and asymmetric tops in the Wang basis.

An asymmetric rotor with constants A >= B >= C > 0 splits, relative to the
oblate-averaged symmetric top, as

    H(A,B,C) = H(Abar, Abar, C) + mu_o * V_o,      Abar = (A+B)/2,
    mu_o = (A-B)/(2C-B-A) in [-1, 0],   V_o = [C - Abar] * (Pa^2 - Pb^2),

and analogously around the prolate average with
mu_p = (C-B)/(2A-B-C) and V_p = [A - (B+C)/2] * (Pc^2 - Pb^2).  Both
decompositions describe the same operator, so their eigenvalue sets agree;
the two parametrizations differ only in which symmetric limit the
perturbation is measured from.

In the Wang basis the perturbation is block-diagonal in (k parity, p): it
couples Delta-k = 2 pairs of equal p, and its only k-diagonal action is the
p-dependent splitting of the k = 1 pair, with

    <S[j,1,m,p], V S[j,1,m,p]> = scale * (-1)**p * j(j+1)/2.

Eigenvalues never depend on m, so every level is diagonalized once on its
(2j+1)-dimensional (k, p) shell.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .basis import wang_kp_pairs
from .so3 import OBLATE, PROLATE


class SphericalTopError(ValueError):
    """A = B = C has no asymmetry decomposition."""


class BranchCrossingWarning(UserWarning):
    """Eigenvector-overlap continuation met a near-ambiguous match."""


@dataclass(frozen=True)
class RotationalConstants:
    """Rotational constants A >= B >= C > 0 (reciprocal inertia moments, hbar = 1)."""

    A: float
    B: float
    C: float

    def __post_init__(self) -> None:
        if not (self.A >= self.B >= self.C > 0.0):
            raise ValueError(f"need A >= B >= C > 0, got ({self.A}, {self.B}, {self.C})")

    @property
    def is_spherical(self) -> bool:
        return self.A == self.B == self.C

    @property
    def is_oblate_symmetric(self) -> bool:
        return self.A == self.B and self.B > self.C

    @property
    def is_prolate_symmetric(self) -> bool:
        return self.B == self.C and self.A > self.B

    @property
    def is_asymmetric(self) -> bool:
        return self.A > self.B > self.C


@dataclass(frozen=True)
class AsymmetryParams:
    """Wang asymmetry parameters of the two symmetric-limit decompositions."""

    mu_oblate: float
    mu_prolate: float


def asymmetry_params(rc: RotationalConstants) -> AsymmetryParams:
    """mu_o = (A-B)/(2C-B-A) and mu_p = (C-B)/(2A-B-C), both in [-1, 0]."""
    if rc.is_spherical:
        raise SphericalTopError("spherical top unsupported: A = B = C")
    mu_o = (rc.A - rc.B) / (2.0 * rc.C - rc.B - rc.A)
    mu_p = (rc.C - rc.B) / (2.0 * rc.A - rc.B - rc.C)
    return AsymmetryParams(mu_oblate=mu_o, mu_prolate=mu_p)


def symmetric_top_energy(j: int, k: int, a_sym: float, c_sym: float,
                         kind: str = OBLATE) -> float:
    """Closed-form symmetric-top level.

    Oblate H(A,A,C):  E = A j(j+1) - (A-C) k^2.
    Prolate H(A,C,C): E = C j(j+1) + (A-C) k^2.
    """
    if abs(k) > j:
        raise ValueError(f"|k| <= j violated: k={k}, j={j}")
    x = j * (j + 1)
    if kind == OBLATE:
        return a_sym * x - (a_sym - c_sym) * k * k
    if kind == PROLATE:
        return c_sym * x + (a_sym - c_sym) * k * k
    raise ValueError(f"unknown kind {kind!r}")


def decomposition(rc: RotationalConstants, kind: str) -> tuple[float, float, float, float]:
    """Symmetric-limit data (a_sym, c_sym, scale, mu) of the chosen kind.

    The block Hamiltonian is diag(E_sym) + mu * scale * V with V the
    dimensionless Delta-k = 2 coupling pattern.
    """
    if kind == OBLATE:
        abar = 0.5 * (rc.A + rc.B)
        mu = asymmetry_params(rc).mu_oblate
        return abar, rc.C, rc.C - abar, mu
    if kind == PROLATE:
        cbar = 0.5 * (rc.B + rc.C)
        mu = asymmetry_params(rc).mu_prolate
        return rc.A, cbar, rc.A - cbar, mu
    raise ValueError(f"unknown kind {kind!r}")


def _ladder_pair(j: int, k: int, k2: int) -> float:
    """|<k2| P1^2 - P2^2 |k>| for k2 = k +- 2 (dimensionless)."""
    x = j * (j + 1)
    s = (k2 - k) // 2
    return 0.5 * math.sqrt((x - k * (k + s)) * (x - (k + s) * (k + 2 * s)))


def wang_perturbation(j: int) -> np.ndarray:
    """Dimensionless perturbation V on the (k, p) shell of level j.

    Couples equal-p states with Delta-k = 2 (entries -g with g the ladder
    product, carrying a sqrt(2) at the k = 0 <-> 2 edge) and splits the
    k = 1 pair diagonally by +-j(j+1)/2.
    """
    pairs = wang_kp_pairs(j)
    n = len(pairs)
    V = np.zeros((n, n))
    for r, (k, p) in enumerate(pairs):
        for s, (k2, p2) in enumerate(pairs):
            if p != p2:
                continue
            if k2 == k + 2:
                g = _ladder_pair(j, k, k2)
                if k == 0:
                    g *= math.sqrt(2.0)
                V[r, s] = V[s, r] = -g
    for r, (k, p) in enumerate(pairs):
        if k == 1:
            V[r, r] = (1.0 if p == 0 else -1.0) * j * (j + 1) / 2.0
    return V


def hamiltonian_at_mu(j: int, a_sym: float, c_sym: float, scale: float,
                      mu: float, kind: str) -> np.ndarray:
    """Wang-shell Hamiltonian diag(E_sym) + mu * scale * V at asymmetry mu."""
    pairs = wang_kp_pairs(j)
    diag = np.array([symmetric_top_energy(j, k, a_sym, c_sym, kind) for k, _ in pairs])
    return np.diag(diag) + mu * scale * wang_perturbation(j)


def build_hamiltonian_block(j: int, rc: RotationalConstants,
                            kind: str = OBLATE) -> np.ndarray:
    """Wang-shell Hamiltonian of level j at the molecule's own asymmetry."""
    a_sym, c_sym, scale, mu = decomposition(rc, kind)
    return hamiltonian_at_mu(j, a_sym, c_sym, scale, mu, kind)


@dataclass(frozen=True)
class SpectrumBlock:
    """Diagonalized level j: energies ascending, eigenvectors over (k, p).

    ``vectors[:, t]`` expands eigenstate t over the Wang (k, p) shell;
    ``labels[t]`` is the (k, p) tag of the symmetric-top branch the
    eigenvalue connects to as the asymmetry is switched off.  Every energy
    is (2j+1)-fold m-degenerate; the shell data is m-independent by
    construction.
    """

    j: int
    energies: np.ndarray
    vectors: np.ndarray
    labels: tuple[tuple[int, int], ...]

    @property
    def kp_pairs(self) -> list[tuple[int, int]]:
        return wang_kp_pairs(self.j)


def _parity_classes(j: int) -> dict[tuple[int, int], list[int]]:
    """Shell indices grouped by the exactly conserved (k mod 2, p)."""
    groups: dict[tuple[int, int], list[int]] = {}
    for idx, (k, p) in enumerate(wang_kp_pairs(j)):
        groups.setdefault((k % 2, p), []).append(idx)
    return groups


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude coefficient of each column positive."""
    out = vecs.copy()
    for t in range(out.shape[1]):
        lead = np.argmax(np.abs(out[:, t]))
        if out[lead, t] < 0.0:
            out[:, t] = -out[:, t]
    return out


class BranchCurves:
    """Eigenvalue and eigenvector branches over an asymmetry grid.

    ``energies[b, i]`` is branch b at ``mu_grid[i]``; branch b carries the
    (k, p) label it reduces to at mu = 0.  Branches are continued between
    grid points by maximal eigenvector overlap inside each exact parity
    class; near-ambiguous overlaps raise :class:`BranchCrossingWarning`.
    """

    def __init__(self, j: int, mu_grid: np.ndarray,
                 labels: list[tuple[int, int]],
                 energies: np.ndarray, vectors: np.ndarray) -> None:
        self.j = j
        self.mu_grid = mu_grid
        self.labels = labels
        self.energies = energies
        self.vectors = vectors

    def at(self, i: int) -> SpectrumBlock:
        """Spectrum at grid point i (energies re-sorted ascending)."""
        order = np.argsort(self.energies[:, i], kind="stable")
        return SpectrumBlock(
            j=self.j,
            energies=self.energies[order, i].copy(),
            vectors=_fix_phases(self.vectors[:, order, i]),
            labels=tuple(self.labels[b] for b in order),
        )

    def branch(self, k: int, p: int) -> np.ndarray:
        """Eigenvalue curve of the branch labelled (k, p)."""
        return self.energies[self.labels.index((k, p))]


def track_branches(j: int, rc: RotationalConstants, kind: str,
                   mu_grid, overlap_tie_tol: float = 1e-8) -> BranchCurves:
    """Follow every (k, p) branch of level j along the asymmetry grid.

    The grid must contain 0 (where labels are exact) and be sorted; the
    continuation walks outward from 0 in both directions, matching
    eigenvectors of adjacent grid points by maximal overlap within each
    (k parity, p) class.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    if mu_grid.size == 0 or np.any(np.diff(mu_grid) < 0):
        raise ValueError("mu_grid must be sorted and nonempty")
    zero_pos = int(np.argmin(np.abs(mu_grid)))
    if abs(mu_grid[zero_pos]) > 1e-15:
        raise ValueError("mu_grid must contain 0")
    a_sym, c_sym, scale, _ = decomposition(rc, kind)
    pairs = wang_kp_pairs(j)
    n = len(pairs)
    energies = np.empty((n, mu_grid.size))
    vectors = np.empty((n, n, mu_grid.size))

    # labels at mu = 0: the Wang shell is already diagonal
    energies[:, zero_pos] = [symmetric_top_energy(j, k, a_sym, c_sym, kind)
                             for k, _ in pairs]
    vectors[:, :, zero_pos] = np.eye(n)

    groups = _parity_classes(j)

    def step(i_prev: int, i_next: int) -> None:
        H = hamiltonian_at_mu(j, a_sym, c_sym, scale, mu_grid[i_next], kind)
        for idxs in groups.values():
            sub = H[np.ix_(idxs, idxs)]
            w, v = np.linalg.eigh(sub)
            prev = vectors[:, :, i_prev][np.ix_(idxs, idxs)]
            overlap = np.abs(prev.T @ v)
            taken: set[int] = set()
            for b in range(len(idxs)):
                order = np.argsort(overlap[b])[::-1]
                best = next(c for c in order if c not in taken)
                runner = next((c for c in order if c != best and c not in taken), None)
                if runner is not None and abs(overlap[b, best] - overlap[b, runner]) < overlap_tie_tol:
                    warnings.warn(
                        f"branch crossing near mu={mu_grid[i_next]:.6g} (j={j}): "
                        f"overlaps {overlap[b, best]:.3e} / {overlap[b, runner]:.3e}",
                        BranchCrossingWarning, stacklevel=3)
                taken.add(best)
                row = idxs[b]
                energies[row, i_next] = w[best]
                col = v[:, best]
                if np.dot(prev[:, b], col) < 0.0:
                    col = -col
                vectors[:, row, i_next] = 0.0
                vectors[idxs, row, i_next] = col

    for i in range(zero_pos + 1, mu_grid.size):
        step(i - 1, i)
    for i in range(zero_pos - 1, -1, -1):
        step(i + 1, i)
    return BranchCurves(j, mu_grid, list(pairs), energies, vectors)


def default_mu_path(mu: float, points: int = 17) -> np.ndarray:
    """Sorted grid from 0 to mu (inclusive) used for branch labelling."""
    path = np.linspace(0.0, mu, points)
    return np.sort(path)


def diagonalize_block(j: int, rc: RotationalConstants, kind: str = OBLATE,
                      label_points: int = 17) -> SpectrumBlock:
    """Diagonalize level j of the molecule, with branch-tracked (k, p) labels.

    Eigenvalues are sorted ascending; each eigenvector is supported on a
    single (k parity, p) class, so the labels are exact bookkeeping, not a
    numerical approximation.
    """
    _, _, _, mu = decomposition(rc, kind)
    curves = track_branches(j, rc, kind, default_mu_path(mu, label_points))
    return curves.at(int(np.argmin(np.abs(curves.mu_grid - mu))))


def degenerate(e1: float, e2: float, tol: float = 1e-9) -> bool:
    """Scale-aware eigenvalue coincidence test."""
    return abs(e1 - e2) < tol * max(1.0, abs(e1), abs(e2))
