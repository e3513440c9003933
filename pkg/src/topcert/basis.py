"""Quantum-number bookkeeping for rigid-rotor bases.

Three index families are used throughout:

* ``WignerIndex`` (j, k, m): labels of the harmonics of the rotation group,
  with k the body-frame and m the space-frame projection quantum number.
* ``WangIndex`` (j, k, m, p): labels of the symmetrized combinations
  ``S[j,k,m,p] = (psi[j,k,m] + (-1)**(p+k) psi[j,-k,m]) / sqrt(2)`` for
  k >= 1 and ``S[j,0,m,0] = psi[j,0,m]``, which diagonalize the asymmetry
  perturbation within each degenerate |k| pair.
* ``BlockSpec``: layout of the overlapping Galerkin space spanned by the
  rotor eigenfunctions of two adjacent levels j and j+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True, order=True)
class WignerIndex:
    """Label (j, k, m) of one rotation-group harmonic."""

    j: int
    k: int
    m: int

    def __post_init__(self) -> None:
        if self.j < 0:
            raise ValueError(f"j must be nonnegative, got {self.j}")
        if abs(self.k) > self.j:
            raise ValueError(f"|k| <= j violated: k={self.k}, j={self.j}")
        if abs(self.m) > self.j:
            raise ValueError(f"|m| <= j violated: m={self.m}, j={self.j}")


@dataclass(frozen=True, order=True)
class WangIndex:
    """Label (j, k, m, p) of one symmetrized (Wang) basis function.

    k runs over 0..j and p over {0, 1}, with p = 0 forced at k = 0, so a
    level j carries 2j+1 Wang labels per m, matching the Wigner count.
    """

    j: int
    k: int
    m: int
    p: int

    def __post_init__(self) -> None:
        if self.j < 0:
            raise ValueError(f"j must be nonnegative, got {self.j}")
        if not 0 <= self.k <= self.j:
            raise ValueError(f"k must lie in [0, j]: k={self.k}, j={self.j}")
        if abs(self.m) > self.j:
            raise ValueError(f"|m| <= j violated: m={self.m}, j={self.j}")
        if self.p not in (0, 1):
            raise ValueError(f"p must be 0 or 1, got {self.p}")
        if self.k == 0 and self.p != 0:
            raise ValueError("k = 0 admits only p = 0")


def wang_kp_pairs(j: int) -> list[tuple[int, int]]:
    """Ordered (k, p) labels of level j: (0,0), (1,0), (1,1), ..., (j,0), (j,1)."""
    pairs = [(0, 0)]
    for k in range(1, j + 1):
        pairs.append((k, 0))
        pairs.append((k, 1))
    return pairs


def wang_expansion(w: WangIndex) -> list[tuple[WignerIndex, complex]]:
    """Expand a Wang function over Wigner labels.

    Returns ``[(psi[j,k,m], 1/sqrt(2)), (psi[j,-k,m], (-1)**(p+k)/sqrt(2))]``
    for k >= 1 and ``[(psi[j,0,m], 1)]`` for k = 0.  The squared coefficients
    always sum to one.
    """
    if w.k == 0:
        return [(WignerIndex(w.j, 0, w.m), 1.0 + 0.0j)]
    r = 1.0 / math.sqrt(2.0)
    sign = -r if (w.p + w.k) % 2 else r
    return [
        (WignerIndex(w.j, w.k, w.m), complex(r)),
        (WignerIndex(w.j, -w.k, w.m), complex(sign)),
    ]


def level_dim(j: int) -> int:
    """Number of states in one angular-momentum level: (2j+1)^2."""
    return (2 * j + 1) ** 2


def lex_rank(level: int, tau: int, m: int) -> int:
    """Rank of (level, tau, m) in the global lexicographic enumeration.

    All triples with l' < level precede, then (tau, m) in row-major order
    inside the level.  Strictly increasing in lexicographic order and
    bijective onto an initial segment of the naturals.
    """
    if level < 0:
        raise ValueError(f"level must be nonnegative, got {level}")
    if abs(tau) > level or abs(m) > level:
        raise ValueError(f"|tau|,|m| <= level violated: ({level},{tau},{m})")
    below = sum(level_dim(l) for l in range(level))
    return below + (tau + level) * (2 * level + 1) + (m + level)


@dataclass(frozen=True)
class BlockSpec:
    """Index layout of the two-level Galerkin space for block j.

    Members are the (l, tau, m) labels with l in {j, j+1}, ordered
    lexicographically; the dimension is (2j+1)^2 + (2j+3)^2.
    """

    j: int
    members: tuple[tuple[int, int, int], ...] = field(repr=False)
    dimension: int

    def index_set(self) -> frozenset[int]:
        """Global lexicographic ranks of all members."""
        return frozenset(lex_rank(*t) for t in self.members)


def block_spec(j: int) -> BlockSpec:
    """Layout of the Galerkin block spanned by levels j and j+1."""
    if j < 0:
        raise ValueError(f"j must be nonnegative, got {j}")
    members = [
        (l, tau, m)
        for l in (j, j + 1)
        for tau in range(-l, l + 1)
        for m in range(-l, l + 1)
    ]
    dim = level_dim(j) + level_dim(j + 1)
    return BlockSpec(j=j, members=tuple(members), dimension=dim)
