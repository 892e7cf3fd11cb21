"""Amplitude containers, Bloch-vector components and the SU(2) evolution matrix."""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, GridMismatchError

NORM_TOL = 1e-8


class Frame(str, Enum):
    ROTATING = "rotating"
    LAB = "lab"


@dataclass(frozen=True)
class AmplitudePair:
    """Amplitudes ``(C+, C-)`` at one instant.

    Rotating and lab amplitudes differ by ``C~+- = exp(-+ i w0 t / 2) C+-``;
    the conversions take the accumulated angle ``w0 t``.
    """

    c_plus: complex
    c_minus: complex
    frame: Frame = Frame.ROTATING

    @property
    def norm(self) -> float:
        return abs(self.c_plus) ** 2 + abs(self.c_minus) ** 2

    def to_lab(self, omega0_t: float) -> "AmplitudePair":
        if self.frame is Frame.LAB:
            return self
        w = cmath.exp(-0.5j * omega0_t)
        return AmplitudePair(self.c_plus * w, self.c_minus / w, Frame.LAB)

    def to_rotating(self, omega0_t: float) -> "AmplitudePair":
        if self.frame is Frame.ROTATING:
            return self
        w = cmath.exp(0.5j * omega0_t)
        return AmplitudePair(self.c_plus * w, self.c_minus / w, Frame.ROTATING)


def bloch_components(c_plus, c_minus):
    """``(S1, S2, S3)`` from lab-frame amplitudes; works on arrays."""
    cross = np.conj(c_plus) * c_minus
    s3 = np.abs(c_plus) ** 2 - np.abs(c_minus) ** 2
    return 2.0 * np.real(cross), 2.0 * np.imag(cross), s3


def bloch_from_amplitudes(pair: AmplitudePair) -> tuple[float, float, float]:
    """Bloch vector of a lab-frame pair.

    Only ``S3`` is frame independent, so rotating-frame input is rejected.
    """
    if pair.frame is not Frame.LAB:
        raise DomainError("convert rotating-frame amplitudes to the lab frame first")
    s1, s2, s3 = bloch_components(pair.c_plus, pair.c_minus)
    return float(s1), float(s2), float(s3)


def evolution_matrix(pair: AmplitudePair) -> np.ndarray:
    """SU(2) matrix ``[[alpha, beta], [-beta*, alpha*]]`` with ``alpha = C+``, ``beta = -C-*``."""
    if abs(pair.norm - 1.0) > NORM_TOL:
        raise DomainError(f"amplitude pair is not normalized (|C+|^2 + |C-|^2 = {pair.norm!r})")
    alpha = complex(pair.c_plus)
    beta = -complex(pair.c_minus).conjugate()
    return np.array([[alpha, beta], [-beta.conjugate(), alpha.conjugate()]])


@dataclass(frozen=True)
class Trajectory:
    """Lab-frame amplitudes sampled on a strictly increasing ``tau`` grid.

    ``frame_rate`` is ``w0 / nu``, so the rotating frame angle at sample ``i`` is
    ``frame_rate * tau[i]``.
    """

    tau: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    frame_rate: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        cp = np.asarray(self.c_plus, dtype=complex)
        cm = np.asarray(self.c_minus, dtype=complex)
        if tau.ndim != 1 or cp.shape != tau.shape or cm.shape != tau.shape:
            raise DomainError("tau and amplitude arrays must be 1-d with equal length")
        if tau.size > 1 and np.any(np.diff(tau) <= 0):
            raise DomainError("tau grid must be strictly increasing")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "c_plus", cp)
        object.__setattr__(self, "c_minus", cm)

    @classmethod
    def from_rotating(cls, tau, c_plus, c_minus, frame_rate: float, metadata: dict | None = None) -> "Trajectory":
        tau = np.asarray(tau, dtype=float)
        w = np.exp(-0.5j * frame_rate * tau)
        return cls(tau, np.asarray(c_plus) * w, np.asarray(c_minus) / w, frame_rate, dict(metadata or {}))

    def __len__(self) -> int:
        return self.tau.size

    def rotating(self) -> tuple[np.ndarray, np.ndarray]:
        w = np.exp(0.5j * self.frame_rate * self.tau)
        return self.c_plus * w, self.c_minus / w

    def pair(self, i: int, frame: Frame = Frame.LAB) -> AmplitudePair:
        lab = AmplitudePair(complex(self.c_plus[i]), complex(self.c_minus[i]), Frame.LAB)
        return lab if frame is Frame.LAB else lab.to_rotating(self.frame_rate * self.tau[i])

    @property
    def bloch(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return bloch_components(self.c_plus, self.c_minus)

    @property
    def s1(self) -> np.ndarray:
        return self.bloch[0]

    @property
    def s2(self) -> np.ndarray:
        return self.bloch[1]

    @property
    def s3(self) -> np.ndarray:
        return np.abs(self.c_plus) ** 2 - np.abs(self.c_minus) ** 2

    @property
    def norm_error(self) -> np.ndarray:
        return np.abs(self.c_plus) ** 2 + np.abs(self.c_minus) ** 2 - 1.0


def check_same_grid(t1: Trajectory, t2: Trajectory) -> None:
    if t1.tau.shape != t2.tau.shape or not np.array_equal(t1.tau, t2.tau):
        raise GridMismatchError("trajectories are sampled on different tau grids")
