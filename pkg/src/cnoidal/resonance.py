"""Resonance conditions and resonance detection in trajectories.

A resonance is a full transfer ``|+> -> |->``, i.e. ``min S3 = -1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import specfun
from .errors import DomainError
from .states import Trajectory

BISECTION_STEPS = 60
RESIDUAL_TOL = 1e-10


class ResonanceKind(str, Enum):
    CHEBYSHEV = "chebyshev"
    BLOCH_SIEGERT = "bloch-siegert"
    RABI = "rabi"


@dataclass(frozen=True)
class ResonanceSolution:
    """A solved resonance condition.

    ``value`` is the modulus ``k`` (Chebyshev, Rabi) or the ratio ``w0 / nu``
    (Bloch-Siegert); ``k`` is the modulus in every case.
    """

    kind: ResonanceKind
    k: float
    value: float
    N: int | None
    index: int | None
    residual: float

    def as_row(self) -> dict:
        return {
            "kind": self.kind.value, "N": self.N, "index": self.index,
            "k": self.k, "value": self.value, "residual": self.residual,
        }


def _check_positive_int(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise DomainError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def chebyshev_resonance_moduli(N: int, labeling: str = "chebyshev") -> list[float]:
    """Moduli in ``(0, 1)`` at which the zero-detuning dynamics reaches ``S3 = -1``.

    ``labeling="chebyshev"`` returns the positive zeros of ``T_N``,
    ``cos((2j + 1) pi / (2N))``. With ``labeling="initial"`` the condition is
    ``cos(2 N psi) = -1`` at ``sn = +-1``, i.e. ``k = sin((2j + 1) pi / (2N))``.
    The two sets coincide for even ``N``.
    """
    N = _check_positive_int("N", N)
    if labeling == "chebyshev":
        trig = math.cos
    elif labeling == "initial":
        trig = math.sin
    else:
        raise ValueError(f"unknown labeling {labeling!r}")
    # 2j + 1 < N keeps each root once and excludes k = 0 and k = 1.
    return sorted(trig((2 * j + 1) * math.pi / (2 * N)) for j in range(N) if 2 * j + 1 < N)


def chebyshev_solutions(N: int, labeling: str = "chebyshev") -> list[ResonanceSolution]:
    out = []
    for j, k in enumerate(chebyshev_resonance_moduli(N, labeling)):
        if labeling == "chebyshev":
            residual = abs(float(specfun.chebyshev_T(N, -k)))
        else:
            residual = abs(math.cos(2 * N * math.asin(k)) + 1.0)
        out.append(ResonanceSolution(ResonanceKind.CHEBYSHEV, k, k, N, j, residual))
    return out


def bloch_siegert_ratio(k: float) -> float:
    """Resonant ``w0 / nu = pi / (2 K(k))`` for the linearly polarized cnoidal field."""
    return math.pi / (2.0 * specfun.complete_K(k))


def bloch_siegert_series(k: float) -> float:
    """Truncated small-``k`` expansion ``1 - k^2/4 - 5 k^4/64``."""
    k2 = k * k
    return 1.0 - k2 / 4.0 - 5.0 * k2 * k2 / 64.0


def bloch_siegert_solution(k: float) -> ResonanceSolution:
    ratio = bloch_siegert_ratio(k)
    residual = abs(ratio * 2.0 * specfun.complete_K(k) / math.pi - 1.0)
    return ResonanceSolution(ResonanceKind.BLOCH_SIEGERT, float(k), ratio, None, None, residual)


def rabi_lhs(k: float) -> float:
    """``k 2F1(1/2, 1/2; 1; k^2)``; strictly increasing on ``[0, 1)``."""
    return k * specfun.hyp2f1_half(k)


def bisect(f, lo: float, hi: float, steps: int = BISECTION_STEPS) -> float:
    """Bisection for an increasing ``f`` with ``f(lo) <= 0 < f(hi)``."""
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_rabi_resonance_k(N: int, m: int) -> ResonanceSolution:
    """Modulus solving ``k 2F1(1/2, 1/2; 1; k^2) = 1 / (m N)``."""
    N = _check_positive_int("N", N)
    m = _check_positive_int("m", m)
    target = 1.0 / (m * N)
    hi = 1.0 - 1e-16
    if rabi_lhs(hi) <= target:
        raise DomainError("no root below k = 1")  # unreachable: lhs diverges at k = 1
    k = bisect(lambda x: rabi_lhs(x) - target, 0.0, hi)
    return ResonanceSolution(ResonanceKind.RABI, k, k, N, m, abs(rabi_lhs(k) - target))


def _local_minimum(x: np.ndarray, y: np.ndarray) -> tuple[float, float] | None:
    """Minimum of the polynomial interpolating ``(x, y)`` between the outer nodes."""
    poly = np.polynomial.Polynomial.fit(x, y, len(x) - 1)
    best = None
    for r in poly.deriv().roots():
        if abs(r.imag) > 1e-12 or not x[0] <= r.real <= x[-1]:
            continue
        value = float(poly(r.real))
        if best is None or value < best[1]:
            best = (float(r.real), value)
    return best


def detect_resonance(traj: Trajectory, tol: float = 1e-6) -> tuple[float, float, bool]:
    """Global minimum of ``S3`` refined by local interpolation around the best sample.

    Five samples (a quartic) are used where available and three (a parabola)
    next to the grid edges. Returns ``(tau0, min_s3, resonant)`` with
    ``resonant = min_s3 < -1 + tol``.
    """
    s3 = traj.s3
    tau = traj.tau
    i = int(np.argmin(s3))
    tau0, best = float(tau[i]), float(s3[i])
    n = len(tau)
    if 0 < i < n - 1:
        half = 2 if 2 <= i <= n - 3 else 1
        # Only the central interval pair is searched, where the sample minimum lives.
        found = _local_minimum(tau[i - half:i + half + 1], s3[i - half:i + half + 1])
        if found is not None and tau[i - 1] <= found[0] <= tau[i + 1] and found[1] < best:
            tau0, best = found
    return tau0, best, best < -1.0 + tol
