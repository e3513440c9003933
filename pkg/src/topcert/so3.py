"""Explicit rotation-group harmonics and Haar-measure quadrature.

This module is the independent verification backend: it evaluates the basis
functions and the Stark multiplication operators on an explicit angle grid
and integrates them numerically, so that every tabulated dipole matrix
element can be cross-checked against a quadrature that shares no code with
the table formulas.

Conventions
-----------
Euler angles (alpha, beta, gamma) parametrize a rotation as
``R = Rz(alpha) Ry(beta) Rz(gamma)``; the Haar measure is
``(1/8) dalpha dgamma sin(beta) dbeta``.  The basis functions are

    psi[j,k,m](alpha,beta,gamma) = N_j * exp(-i(k*gamma + m*alpha)) * d[j,k,m](beta)

with d the real Legendre-type function below and N_j fixed programmatically
by requiring unit L2 norm under the implemented measure.  The scalar product
is linear in its first argument: <u, v> = integral u * conj(v).

The sign of the angular phase is the one under which the tabulated matrix
elements of ``dipole`` hold verbatim; all controllability conclusions are
invariant under this choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import WignerIndex

OBLATE = "oblate"
PROLATE = "prolate"


class ResolutionError(ValueError):
    """Raised when a quadrature grid is too coarse for the requested j."""


def little_d(j: int, k: int, m: int, beta):
    """Real rotation function d[j,k,m](beta).

    Factorial-sum form; the convention is fixed by d[1,0,0] = cos(beta)
    and d[j,k,m](0) = delta(k,m).  Accepts scalar or ndarray beta.
    """
    if abs(k) > j or abs(m) > j:
        raise ValueError(f"|k|,|m| <= j violated: ({j},{k},{m})")
    beta = np.asarray(beta, dtype=float)
    pref = math.sqrt(
        math.factorial(j + k) * math.factorial(j - k)
        * math.factorial(j + m) * math.factorial(j - m)
    )
    cb, sb = np.cos(beta / 2.0), np.sin(beta / 2.0)
    smin, smax = max(0, m - k), min(j + m, j - k)
    acc = np.zeros_like(beta)
    for s in range(smin, smax + 1):
        den = (
            math.factorial(j + m - s) * math.factorial(s)
            * math.factorial(k - m + s) * math.factorial(j - k - s)
        )
        sign = -1.0 if (k - m + s) % 2 else 1.0
        acc = acc + (sign / den) * cb ** (2 * j + m - k - 2 * s) * sb ** (k - m + 2 * s)
    return pref * acc


@dataclass(frozen=True)
class EulerAngles:
    """One rotation in (alpha, beta, gamma) coordinates."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= math.pi:
            raise ValueError(f"beta must lie in [0, pi], got {self.beta}")


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor grid over the Euler angles with Haar weights.

    Gauss-Legendre nodes in cos(beta) (exact for the polynomial beta
    dependence) and uniform trapezoid nodes in alpha and gamma (exact for
    trigonometric polynomials below the aliasing order).  ``jmax`` records
    the largest level the grid integrates exactly.
    """

    jmax: int
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    weights: np.ndarray

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))


def quadrature_grid(jmax: int, oversample: int = 0) -> QuadratureGrid:
    """Build a Haar-measure grid exact for products of levels <= jmax."""
    if jmax < 0:
        raise ValueError("jmax must be nonnegative")
    n_ang = 4 * (jmax + oversample) + 6
    n_beta = 2 * (jmax + oversample) + 4
    x, wx = np.polynomial.legendre.leggauss(n_beta)
    beta = np.arccos(x)
    ang = 2.0 * math.pi * np.arange(n_ang) / n_ang
    A, B, G = np.meshgrid(ang, beta, ang, indexing="ij")
    W = np.broadcast_to(wx[None, :, None], A.shape) * (2.0 * math.pi / n_ang) ** 2 / 8.0
    return QuadratureGrid(jmax=jmax, alpha=A, beta=B, gamma=G, weights=np.array(W))


@lru_cache(maxsize=256)
def _norm_factor(j: int) -> float:
    # beta-quadrature of d^2 times the (2 pi)^2 / 8 angular mass
    x, wx = np.polynomial.legendre.leggauss(2 * j + 4)
    d = little_d(j, j, j, np.arccos(x))
    n2 = float(np.sum(wx * d * d)) * (2.0 * math.pi) ** 2 / 8.0
    # the norm is k,m independent; using (k,m)=(j,j) is as good as any
    return 1.0 / math.sqrt(n2)


def wigner_D(index: WignerIndex, angles) -> complex | np.ndarray:
    """Normalized basis function psi[j,k,m] at one rotation or on a grid.

    ``angles`` is either an ``EulerAngles`` or a tuple of (alpha, beta,
    gamma) arrays of equal shape.
    """
    if isinstance(angles, EulerAngles):
        a, b, g = angles.alpha, angles.beta, angles.gamma
    else:
        a, b, g = angles
    val = np.exp(-1j * (index.k * np.asarray(g) + index.m * np.asarray(a)))
    out = _norm_factor(index.j) * val * little_d(index.j, index.k, index.m, b)
    return complex(out) if np.ndim(out) == 0 else out


def rotation_matrix(a, b, g) -> np.ndarray:
    """Rotation matrix R = Rz(a) Ry(b) Rz(g); entries broadcast over grids."""
    ca, sa = np.cos(a), np.sin(a)
    cb, sb = np.cos(b), np.sin(b)
    cg, sg = np.cos(g), np.sin(g)
    return np.array([
        [ca * cb * cg - sa * sg, -ca * cb * sg - sa * cg, ca * sb],
        [sa * cb * cg + ca * sg, -sa * cb * sg + ca * cg, sa * sb],
        [-sb * cg, sb * sg, cb],
    ])


def body_dipole(delta_abc, convention: str) -> np.ndarray:
    """Map dipole components along the inertia axes (a, b, c) to the
    body indices (1, 2, 3) of the active axis convention.

    Oblate: symmetry axis c is index 3, so (d1, d2, d3) = (db, da, dc).
    Prolate: symmetry axis a is index 3, so (d1, d2, d3) = (db, dc, da).
    """
    da, db, dc = (float(x) for x in delta_abc)
    if convention == OBLATE:
        return np.array([db, da, dc])
    if convention == PROLATE:
        return np.array([db, dc, da])
    raise ValueError(f"unknown convention {convention!r}")


def stark_multiplier(l: int, angles, delta_abc, convention: str = OBLATE):
    """Interaction multiplier -<R delta, e_l> at the given rotation(s).

    ``delta_abc`` holds the dipole along the principal axes; it is mapped
    to body indices by the convention before applying the rotation.
    """
    if l not in (1, 2, 3):
        raise ValueError(f"l must be 1, 2 or 3, got {l}")
    if isinstance(angles, EulerAngles):
        a, b, g = angles.alpha, angles.beta, angles.gamma
    else:
        a, b, g = angles
    d123 = body_dipole(delta_abc, convention)
    R = rotation_matrix(a, b, g)
    out = -(R[l - 1][0] * d123[0] + R[l - 1][1] * d123[1] + R[l - 1][2] * d123[2])
    return float(out) if np.ndim(out) == 0 else out


def oracle_element(
    l: int,
    bra: WignerIndex,
    ket: WignerIndex,
    delta_abc,
    convention: str = OBLATE,
    grid: QuadratureGrid | None = None,
) -> complex:
    """Quadrature value of <psi_bra, H_l psi_ket>.

    The tabulated elements of :mod:`topcert.dipole` are of the skew form
    <bra, i H_l ket> = -i times this value.
    """
    if grid is None:
        grid = quadrature_grid(max(bra.j, ket.j))
    if grid.jmax < max(bra.j, ket.j):
        raise ResolutionError(
            f"grid exact to jmax={grid.jmax} but levels ({bra.j},{ket.j}) requested"
        )
    ang = (grid.alpha, grid.beta, grid.gamma)
    H = stark_multiplier(l, ang, delta_abc, convention)
    integrand = wigner_D(bra, ang) * H * np.conj(wigner_D(ket, ang))
    return complex(np.sum(integrand * grid.weights))


def basis_values(jmax: int, grid: QuadratureGrid) -> tuple[list[WignerIndex], np.ndarray]:
    """All normalized basis functions with j <= jmax evaluated on the grid.

    Returns the index list and an array of shape (nstates, npoints).
    """
    idx = [WignerIndex(j, k, m) for j in range(jmax + 1)
           for k in range(-j, j + 1) for m in range(-j, j + 1)]
    ang = (grid.alpha, grid.beta, grid.gamma)
    vals = np.stack([np.ravel(wigner_D(s, ang)) for s in idx])
    return idx, vals


def oracle_operator_matrix(
    l: int,
    jmax: int,
    delta_abc,
    convention: str = OBLATE,
    grid: QuadratureGrid | None = None,
) -> tuple[list[WignerIndex], np.ndarray]:
    """Matrix <psi_r, H_l psi_s> over all states with j <= jmax, by quadrature."""
    if grid is None:
        grid = quadrature_grid(jmax)
    if grid.jmax < jmax:
        raise ResolutionError(f"grid exact to jmax={grid.jmax} < requested {jmax}")
    idx, vals = basis_values(jmax, grid)
    ang = (grid.alpha, grid.beta, grid.gamma)
    H = np.ravel(stark_multiplier(l, ang, delta_abc, convention))
    w = np.ravel(grid.weights)
    return idx, (vals * (H * w)) @ vals.conj().T


def gram_matrix(jmax: int, grid: QuadratureGrid | None = None) -> np.ndarray:
    """Quadrature Gram matrix of all normalized basis functions, j <= jmax."""
    if grid is None:
        grid = quadrature_grid(jmax)
    _, vals = basis_values(jmax, grid)
    w = np.ravel(grid.weights)
    return (vals * w) @ vals.conj().T
