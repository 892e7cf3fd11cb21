"""Exact dynamics of a two-level system in a cnoidally modulated field."""
from .errors import (
    DomainError,
    GridMismatchError,
    IntegrationError,
    RecurrenceSingularityError,
    RootCoincidenceError,
    SingularCharacteristicError,
    UnresolvedBranchError,
)
from .exact import (
    amplitudes_n1,
    amplitudes_n2,
    amplitudes_resonant_chebyshev,
    amplitudes_soliton,
    exact_trajectory,
    rwa_s3,
    s3_n1_delta1,
    s3_resonant,
)
from .model import FieldKind, FieldParams, HarmonicField, RotatingField
from .oracle import IntegratorConfig, integrate, max_deviation, rms_deviation
from .states import AmplitudePair, Frame, Trajectory, bloch_from_amplitudes, evolution_matrix

__version__ = "0.1.0"
