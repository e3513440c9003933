import math

import numpy as np
import pytest

from topcert.basis import wang_kp_pairs
from topcert.rotor import (
    AsymmetryParams,
    RotationalConstants,
    SphericalTopError,
    asymmetry_params,
    build_hamiltonian_block,
    decomposition,
    degenerate,
    diagonalize_block,
    symmetric_top_energy,
    track_branches,
    wang_perturbation,
)


def brute_force_j1(A, B, C):
    """Independent 3x3 oracle in the signed-k basis for level 1.

    Diagonal from the averaged symmetric top, one off-diagonal pair from
    the k = +-1 mixing; eigenvalues do not depend on the mixing sign.
    """
    abar = 0.5 * (A + B)
    e1 = 2.0 * abar + (C - abar)
    e0 = 2.0 * abar
    w = 0.5 * (A - B)
    H = np.array([[e1, 0.0, w], [0.0, e0, 0.0], [w, 0.0, e1]])
    return np.sort(np.linalg.eigvalsh(H))


class TestConstants:
    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            RotationalConstants(1.0, 2.0, 0.5)
        with pytest.raises(ValueError):
            RotationalConstants(1.0, 0.5, 0.0)

    def test_kind_flags(self):
        assert RotationalConstants(3, 2, 1).is_asymmetric
        assert RotationalConstants(2, 2, 1).is_oblate_symmetric
        assert RotationalConstants(2, 1, 1).is_prolate_symmetric
        assert RotationalConstants(1, 1, 1).is_spherical


class TestAsymmetryParams:
    def test_oblate_limit(self):
        ap = asymmetry_params(RotationalConstants(2, 2, 1))
        assert ap.mu_oblate == 0.0

    def test_prolate_limit_reaches_minus_one(self):
        ap = asymmetry_params(RotationalConstants(2, 1, 1))
        assert ap.mu_oblate == pytest.approx(-1.0)
        assert ap.mu_prolate == 0.0

    def test_generic_value(self):
        ap = asymmetry_params(RotationalConstants(3, 2, 1))
        assert ap.mu_oblate == pytest.approx(-1.0 / 3.0)

    def test_in_range(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            A, B, C = np.sort(rng.uniform(0.1, 5.0, 3))[::-1]
            ap = asymmetry_params(RotationalConstants(A, B, C))
            assert isinstance(ap, AsymmetryParams)
            assert -1.0 - 1e-12 <= ap.mu_oblate <= 0.0
            assert -1.0 - 1e-12 <= ap.mu_prolate <= 0.0

    def test_spherical_rejected(self):
        with pytest.raises(SphericalTopError):
            asymmetry_params(RotationalConstants(1, 1, 1))


class TestSymmetricTopEnergy:
    def test_ground_level(self):
        assert symmetric_top_energy(0, 0, 1.7, 0.4) == 0.0

    def test_oblate_value(self):
        assert symmetric_top_energy(1, 1, 1.0, 0.5, "oblate") == pytest.approx(1.5)

    def test_prolate_value(self):
        assert symmetric_top_energy(1, 1, 1.0, 0.5, "prolate") == pytest.approx(1.5)

    def test_prolate_oblate_differ_at_higher_k(self):
        e_o = symmetric_top_energy(2, 2, 1.0, 0.5, "oblate")
        e_p = symmetric_top_energy(2, 2, 1.0, 0.5, "prolate")
        assert e_o == pytest.approx(4.0)
        assert e_p == pytest.approx(5.0)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            symmetric_top_energy(1, 2, 1.0, 0.5)


class TestHamiltonianBlock:
    def test_symmetric_molecule_is_diagonal(self):
        rc = RotationalConstants(2.0, 2.0, 1.0)
        for j in range(4):
            H = build_hamiltonian_block(j, rc)
            assert np.max(np.abs(H - np.diag(np.diag(H)))) == 0.0
            want = [symmetric_top_energy(j, k, 2.0, 1.0) for k, _ in wang_kp_pairs(j)]
            np.testing.assert_allclose(np.diag(H), want)

    def test_k1_pair_splitting(self):
        # the k = 1 diagonal correction is +-scale for level 1
        rc = RotationalConstants(3.0, 2.0, 1.0)
        H = build_hamiltonian_block(1, rc)
        abar, c, scale, mu = decomposition(rc, "oblate")
        e1 = symmetric_top_energy(1, 1, abar, c)
        pairs = wang_kp_pairs(1)
        i10, i11 = pairs.index((1, 0)), pairs.index((1, 1))
        assert H[i10, i10] - e1 == pytest.approx(mu * scale)
        assert H[i11, i11] - e1 == pytest.approx(-mu * scale)

    def test_real_symmetric(self):
        rc = RotationalConstants(2.7, 1.9, 0.6)
        for j in range(5):
            H = build_hamiltonian_block(j, rc)
            np.testing.assert_array_equal(H, H.T)

    def test_trace_identity(self):
        # the perturbation is traceless, so the block trace is the
        # symmetric-top sum; also check against mu * tr(V) explicitly
        rc = RotationalConstants(2.7, 1.9, 0.6)
        abar, c, scale, mu = decomposition(rc, "oblate")
        for j in range(5):
            H = build_hamiltonian_block(j, rc)
            V = wang_perturbation(j)
            sym_sum = sum(symmetric_top_energy(j, k, abar, c) for k, _ in wang_kp_pairs(j))
            assert np.trace(V) == pytest.approx(0.0, abs=1e-12)
            assert np.trace(H) == pytest.approx(sym_sum + mu * scale * np.trace(V))

    def test_couplings_conserve_k_parity_and_p(self):
        pairs = wang_kp_pairs(4)
        V = wang_perturbation(4)
        for r, (k, p) in enumerate(pairs):
            for s, (k2, p2) in enumerate(pairs):
                if abs(V[r, s]) > 0:
                    assert (k - k2) % 2 == 0
                    assert p == p2
                    assert r == s or abs(k - k2) == 2


class TestDiagonalization:
    def test_ground_block(self):
        spec = diagonalize_block(0, RotationalConstants(3, 2, 1))
        assert spec.energies.shape == (1,)
        assert spec.energies[0] == pytest.approx(0.0)
        assert spec.labels == ((0, 0),)

    def test_level_one_closed_form(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            A, B, C = np.sort(rng.uniform(0.2, 4.0, 3))[::-1]
            rc = RotationalConstants(A, B, C)
            spec = diagonalize_block(1, rc)
            want = np.sort([B + C, A + C, A + B])
            np.testing.assert_allclose(spec.energies, want, rtol=1e-12)
            np.testing.assert_allclose(spec.energies, brute_force_j1(A, B, C), rtol=1e-12)

    def test_level_one_labels(self):
        spec = diagonalize_block(1, RotationalConstants(3, 2, 1))
        by_label = dict(zip(spec.labels, spec.energies))
        assert by_label[(0, 0)] == pytest.approx(5.0)   # A + B
        assert by_label[(1, 0)] == pytest.approx(4.0)   # A + C
        assert by_label[(1, 1)] == pytest.approx(3.0)   # B + C

    def test_oblate_symmetric_level_two(self):
        spec = diagonalize_block(2, RotationalConstants(1.0, 1.0, 0.5))
        want = sorted([6.0, 5.5, 5.5, 4.0, 4.0])
        np.testing.assert_allclose(spec.energies, want)

    def test_eigenvector_parity_support(self):
        rc = RotationalConstants(2.0, 1.1, 0.6 * math.sqrt(2))
        for j in range(6):
            spec = diagonalize_block(j, rc)
            pairs = wang_kp_pairs(j)
            for t in range(len(pairs)):
                support = [pairs[i] for i in np.nonzero(np.abs(spec.vectors[:, t]) > 1e-10)[0]]
                assert len({k % 2 for k, _ in support}) == 1
                assert len({p for _, p in support}) == 1

    def test_orthonormal_eigenvectors(self):
        spec = diagonalize_block(4, RotationalConstants(3.1, 2.2, 0.7))
        G = spec.vectors.T @ spec.vectors
        np.testing.assert_allclose(G, np.eye(9), atol=1e-12)

    def test_oblate_prolate_consistency(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            A, B, C = np.sort(rng.uniform(0.2, 4.0, 3))[::-1]
            rc = RotationalConstants(A, B, C)
            for j in range(5):
                eo = diagonalize_block(j, rc, "oblate").energies
                ep = diagonalize_block(j, rc, "prolate").energies
                np.testing.assert_allclose(np.sort(eo), np.sort(ep), rtol=1e-10)

    def test_p_degeneracy_broken(self):
        rc = RotationalConstants(3.0, 2.0, 1.0)
        for j in (1, 2, 3):
            spec = diagonalize_block(j, rc)
            by_label = dict(zip(spec.labels, spec.energies))
            for k in range(1, j + 1):
                gap = abs(by_label[(k, 0)] - by_label[(k, 1)])
                assert gap > 1e-6


class TestBranchTracking:
    def test_symmetric_endpoint(self):
        rc = RotationalConstants(3.0, 2.0, 1.0)
        abar, c, _, _ = decomposition(rc, "oblate")
        curves = track_branches(2, rc, "oblate", np.linspace(-0.4, 0.0, 9))
        i0 = curves.mu_grid.size - 1
        for (k, p), row in zip(curves.labels, curves.energies):
            assert row[i0] == pytest.approx(symmetric_top_energy(2, k, abar, c))

    def test_level_one_branches_follow_closed_form(self):
        rc = RotationalConstants(3.0, 2.0, 1.0)
        abar, c, _, _ = decomposition(rc, "oblate")
        grid = np.linspace(-0.8, 0.0, 17)
        curves = track_branches(1, rc, "oblate", grid)
        for i, mu in enumerate(grid):
            A_mu = abar + mu * (c - abar)
            B_mu = abar - mu * (c - abar)
            assert curves.branch(0, 0)[i] == pytest.approx(A_mu + B_mu)
            assert curves.branch(1, 0)[i] == pytest.approx(A_mu + c)
            assert curves.branch(1, 1)[i] == pytest.approx(B_mu + c)

    def test_ground_branch_is_zero(self):
        rc = RotationalConstants(3.0, 2.0, 1.0)
        curves = track_branches(0, rc, "oblate", np.linspace(-1.0, 0.0, 5))
        np.testing.assert_allclose(curves.branch(0, 0), 0.0, atol=1e-14)

    def test_grid_must_contain_zero(self):
        rc = RotationalConstants(3.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            track_branches(1, rc, "oblate", np.linspace(-0.9, -0.1, 5))


class TestDegeneracyPredicate:
    def test_scale_aware(self):
        assert degenerate(1e6, 1e6 + 1e-4)
        assert not degenerate(0.0, 1e-6)
        assert degenerate(0.0, 1e-10)
