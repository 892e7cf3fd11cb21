"""Drive-field configurations and the dimensionless quantities derived from them.

The magnetic field is ``B(t) = {2a(t) cos wt, 2a(t) sin wt, w0}`` with the
cnoidal envelope ``a(t) = N k nu cn(nu t, k)`` and the Hamiltonian is
``H = B . sigma / 2`` (hbar = 1). Dimensionless time ``tau = nu t`` is the
canonical time everywhere; ``nu`` is carried only to convert back to
physical time.

Every field type exposes the same small interface used by the integrator:
``nu``, ``omega0`` and ``coupling(tau)``, the upper off-diagonal element
``(B1 - i B2) / (2 nu)`` of ``H / nu``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import specfun
from .errors import DomainError


class FieldKind(str, Enum):
    CNOIDAL = "cnoidal"
    SOLITON = "soliton"
    LP_CNOIDAL = "lp-cnoidal"
    LP_HARMONIC = "lp-harmonic"
    RABI = "rabi"


def _finite(name: str, value) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class FieldParams:
    """Cnoidal drive ``a(t) = N k nu cn(nu t, k)`` rotating at ``omega``.

    ``k = 1`` is the N-soliton envelope and ``omega = 0`` the linearly
    polarized cnoidal field; the kind is derived, never stored.
    """

    N: int
    k: float
    nu: float = 1.0
    omega: float = 0.0
    omega0: float = 0.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "k", specfun.check_modulus(self.k))
        nu = _finite("nu", self.nu)
        if nu <= 0:
            raise DomainError(f"nu must be positive, got {nu!r}")
        object.__setattr__(self, "nu", nu)
        omega = _finite("omega", self.omega)
        if omega < 0:
            raise DomainError(f"omega must be non-negative, got {omega!r}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "omega0", _finite("omega0", self.omega0))

    @classmethod
    def from_detuning(cls, N: int, k: float, delta: float, nu: float = 1.0, omega: float = 0.0) -> "FieldParams":
        """Build the field whose dimensionless detuning is ``delta``."""
        return cls(N=N, k=k, nu=nu, omega=omega, omega0=omega + delta * nu)

    @property
    def delta(self) -> float:
        """Dimensionless detuning ``(omega0 - omega) / nu``."""
        return (self.omega0 - self.omega) / self.nu

    @property
    def delta_tilde(self) -> float:
        """Detuning with the opposite sign and physical units, ``omega - omega0``."""
        return self.omega - self.omega0

    @property
    def kind(self) -> FieldKind:
        if self.k == 1.0:
            return FieldKind.SOLITON
        if self.omega == 0.0:
            return FieldKind.LP_CNOIDAL
        return FieldKind.CNOIDAL

    @property
    def frame_rate(self) -> float:
        """``omega0 / nu``: phase rate of the rotating-frame map in tau."""
        return self.omega0 / self.nu

    def coupling(self, tau):
        """Off-diagonal element ``a e^{-i omega t} / nu`` at dimensionless time."""
        if np.ndim(tau) == 0 and not isinstance(tau, np.ndarray):
            cn = specfun._elliptic_scalar(float(tau), self.k)[1]
            return self.N * self.k * cn * cmath.exp(-1j * self.omega / self.nu * tau)
        tau = np.asarray(tau, dtype=float)
        cn = specfun.jacobi_sn_cn_dn(tau, self.k).cn
        return self.N * self.k * cn * np.exp(-1j * self.omega / self.nu * tau)


@dataclass(frozen=True)
class HarmonicField:
    """Linearly polarized harmonic reference ``B = {2a cos(Omega t), 0, omega0}``.

    Used only as an integration target for comparisons; it has no closed form.
    """

    amplitude: float
    frequency: float
    omega0: float
    nu: float = 1.0

    def __post_init__(self):
        for name in ("amplitude", "frequency", "omega0"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if _finite("nu", self.nu) <= 0:
            raise DomainError("nu must be positive")

    @property
    def kind(self) -> FieldKind:
        return FieldKind.LP_HARMONIC

    @property
    def frame_rate(self) -> float:
        return self.omega0 / self.nu

    def coupling(self, tau):
        if np.ndim(tau) == 0 and not isinstance(tau, np.ndarray):
            return complex(self.amplitude * math.cos(self.frequency / self.nu * tau)) / self.nu
        return self.amplitude * np.cos(self.frequency / self.nu * np.asarray(tau, dtype=float)) / self.nu + 0j


@dataclass(frozen=True)
class RotatingField:
    """Constant-envelope circularly polarized field ``B = {2a cos wt, 2a sin wt, w0}``.

    The rotating-wave result is exact for this field.
    """

    amplitude: float
    omega: float
    omega0: float
    nu: float = 1.0

    def __post_init__(self):
        for name in ("amplitude", "omega", "omega0"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if _finite("nu", self.nu) <= 0:
            raise DomainError("nu must be positive")

    @property
    def kind(self) -> FieldKind:
        return FieldKind.RABI

    @property
    def frame_rate(self) -> float:
        return self.omega0 / self.nu

    def coupling(self, tau):
        if np.ndim(tau) == 0 and not isinstance(tau, np.ndarray):
            return self.amplitude / self.nu * cmath.exp(-1j * self.omega / self.nu * tau)
        return self.amplitude / self.nu * np.exp(-1j * self.omega / self.nu * np.asarray(tau, dtype=float))


def envelope(p: FieldParams, t):
    """Envelope ``a(t) = N k nu cn(nu t, k)`` in physical time."""
    cn = specfun.jacobi_sn_cn_dn(np.multiply(p.nu, t), p.k).cn
    return p.N * p.k * p.nu * cn


def field_vector(p: FieldParams, t):
    """Field components ``(B1, B2, B3)``; arrays in ``t`` give arrays per component."""
    a = envelope(p, t)
    wt = np.multiply(p.omega, t)
    return 2.0 * a * np.cos(wt), 2.0 * a * np.sin(wt), np.full_like(np.asarray(a, dtype=float), p.omega0)[()]


def effective_frequency(p: FieldParams) -> float:
    """Effective cnoidal frequency ``pi nu / (2 K(k))``; undefined at ``k = 1``."""
    return math.pi * p.nu / (2.0 * specfun.complete_K(p.k))


def delta_tilde_from_delta(delta: float, nu: float = 1.0) -> float:
    """Convert ``(omega0 - omega) / nu`` to ``omega - omega0``."""
    return -delta * nu


def delta_from_delta_tilde(delta_tilde: float, nu: float = 1.0) -> float:
    """Convert ``omega - omega0`` to ``(omega0 - omega) / nu``."""
    return -delta_tilde / nu
