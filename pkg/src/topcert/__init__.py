"""Rotational spectra, Stark control operators, and controllability
certificates for rigid symmetric and asymmetric tops."""

from .basis import BlockSpec, WangIndex, WignerIndex, block_spec, lex_rank, wang_expansion
from .dipole import ControlOperatorBlock, DipoleMoment, build_control_blocks, wigner_element
from .galerkin import (
    GalerkinContext,
    controllability_verdict,
    excitation,
    graph_connected,
    lie_closure,
    minimal_ideal,
    mode_families,
    resonance_scan,
    spectral_gaps,
    su_inclusion,
    xi_membership,
)
from .rotor import (
    AsymmetryParams,
    RotationalConstants,
    SpectrumBlock,
    asymmetry_params,
    build_hamiltonian_block,
    diagonalize_block,
    symmetric_top_energy,
    track_branches,
)
from .so3 import EulerAngles, QuadratureGrid, little_d, oracle_element, quadrature_grid, stark_multiplier, wigner_D
from .symmetry import DipoleClass, Family, classify_dipole, classify_wang, invariance_certificate
from .classical import (
    QuaternionState,
    bracket_determinant,
    closed_form_S,
    control_field,
    drift_field,
    lie_bracket_numeric,
    rank_at,
    simulate,
)

__version__ = "0.1.0"
