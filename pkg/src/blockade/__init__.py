"""Photon blockade in the driven dispersive Jaynes-Cummings model.

Steady-state photon statistics under cavity and atomic decay, the
closed-form dressed-state spectrum with its resonance conditions, and a
fidelity check of the dispersive approximation.
"""

from .errors import (
    BlockadeError,
    ConfigError,
    DimensionMismatch,
    NoConvergence,
    NoPhotons,
    NotHermitian,
    PositivityViolation,
    Singular,
    StepTooLarge,
    TruncationTooSmall,
    ZeroChi,
)
from .lindblad import (
    DensityMatrix,
    Liouvillian,
    build_liouvillian,
    evolve,
    g2_weak_drive_estimate,
    g2_zero,
    mean_photon_number,
    model_liouvillian,
    photon_number_dist,
    steady_state,
)
from .model import (
    EigenPair,
    FockTruncation,
    ModelParams,
    analytic_spectrum,
    build_h_ddjc,
    build_h_eff,
    build_h_full,
    dressed_states,
    resonance_detunings,
)
from .sweep import SweepRow, SweepSpec

__version__ = "0.1.0"
