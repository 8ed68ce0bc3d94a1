"""Phase-controlled optical torque in a five-level double-tripod atom-light system."""

from .dynamics import BlochTrajectory, generator, integrate_to_steady, rhs
from .errors import (
    ConvergenceTimeout,
    DegenerateBasisError,
    DomainError,
    DTTorqueError,
    PoleError,
    PreconditionError,
    SingularAxisError,
    SingularSystemError,
    UnsupportedClassificationError,
)
from .mechanics import (
    ForceSample,
    TorqueSpectrum,
    force,
    phase_gradients,
    rotate_ensemble,
    torque,
    torque_function,
)
from .model import (
    ControlFieldSet,
    DetuningConfig,
    ProbeConfig,
    SpatialPoint,
    lg_profile,
    omega_matrix,
    reduce_phases,
)
from .regime import Regime, bright_dark, classify, coupling_coeffs, transformed_hamiltonian
from .steady import (
    CoherenceState,
    InteractionKernel,
    SpecialCase,
    coherences_closed_form,
    coherences_special,
    ground_coherences,
    kernel,
    solve,
    solve_general,
)
from .sweep import FigurePreset, SweepRequest, preset, run_map, run_spectrum

__version__ = "0.1.0"
