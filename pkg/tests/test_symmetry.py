import math

import numpy as np
import pytest

from topcert.basis import WangIndex
from topcert.dipole import DipoleMoment
from topcert.rotor import RotationalConstants
from topcert.symmetry import (
    DipoleClassKind,
    Family,
    classify_dipole,
    classify_wang,
    invariance_certificate,
    propagator_leakage,
)

RC = RotationalConstants(2.0, 1.1, 0.6 * math.sqrt(2))
AXIS = {
    "a": DipoleMoment(1.0, 0.0, 0.0),
    "b": DipoleMoment(0.0, 1.0, 0.0),
    "c": DipoleMoment(0.0, 0.0, 1.0),
}
MATCH = {"a": Family.G, "b": Family.L, "c": Family.K}
GENERIC = DipoleMoment(1 / math.sqrt(3), 1 / math.sqrt(3), 1 / math.sqrt(3))


class TestClassifyWang:
    def test_examples(self):
        w = WangIndex(1, 1, 0, 0)
        assert classify_wang(w, Family.K) == "odd"
        assert classify_wang(w, Family.L) == "even"   # 1 + 1 + 0
        assert classify_wang(w, Family.G) == "odd"    # 1 + 0
        ground = WangIndex(0, 0, 0, 0)
        for fam in Family:
            assert classify_wang(ground, fam) == "even"

    def test_partition_is_complete(self):
        for fam in Family:
            for j in range(4):
                for k in range(j + 1):
                    for p in ((0,) if k == 0 else (0, 1)):
                        v = classify_wang(WangIndex(j, k, 0, p), fam)
                        assert v in ("even", "odd")


class TestClassifyDipole:
    def test_axis_cases(self):
        assert classify_dipole(AXIS["c"]).kind is DipoleClassKind.AXIS_C
        assert classify_dipole(AXIS["c"]).obstruction is Family.K
        assert classify_dipole(AXIS["b"]).obstruction is Family.L
        assert classify_dipole(AXIS["a"]).obstruction is Family.G

    def test_generic(self):
        cls = classify_dipole(GENERIC)
        assert cls.kind is DipoleClassKind.GENERIC
        assert cls.obstruction is None

    def test_in_plane(self):
        cls = classify_dipole(DipoleMoment(0.6, 0.8, 0.0))
        assert cls.kind is DipoleClassKind.GENERIC_IN_AB_PLANE
        assert cls.obstruction is None

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            classify_dipole(DipoleMoment(0, 0, 0))

    def test_tolerance_is_relative(self):
        almost_axis = DipoleMoment(1e-15, 0.0, 1.0)
        assert classify_dipole(almost_axis).kind is DipoleClassKind.AXIS_C
        off_axis = DipoleMoment(1e-3, 0.0, 1.0)
        assert classify_dipole(off_axis).kind is DipoleClassKind.GENERIC


class TestInvarianceCertificate:
    @pytest.mark.parametrize("axis", ["a", "b", "c"])
    def test_matched_family_invariant(self, axis):
        rep = invariance_certificate(AXIS[axis], MATCH[axis], 3, RC)
        assert rep.max_norm < 1e-10

    def test_free_hamiltonian_never_mixes(self):
        for fam in Family:
            rep = invariance_certificate(GENERIC, fam, 3, RC)
            h_norms = [e.norm for e in rep.entries if e.operator == "H"]
            assert max(h_norms) == 0.0

    def test_generic_dipole_breaks_every_family(self):
        for fam in Family:
            rep = invariance_certificate(GENERIC, fam, 3, RC)
            assert rep.max_norm > 1e-3
            worst = rep.worst()
            assert worst is not None and worst.witness is not None

    def test_mismatched_axis_family_breaks(self):
        rep = invariance_certificate(AXIS["c"], Family.L, 3, RC)
        assert rep.max_norm > 1e-3

    def test_requires_positive_jmax(self):
        with pytest.raises(ValueError):
            invariance_certificate(GENERIC, Family.K, 0, RC)


class TestPropagatorInvariance:
    @pytest.mark.parametrize("axis", ["a", "b", "c"])
    def test_matched_leakage_small(self, axis):
        leak = propagator_leakage(AXIS[axis], MATCH[axis], 1, RC)
        assert leak < 1e-8

    def test_generic_leaks(self):
        leak = propagator_leakage(GENERIC, Family.K, 1, RC)
        assert leak > 1e-6
