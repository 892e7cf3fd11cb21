"""Direct integration of the lab-frame amplitude equations.

For a field with diagonal ``d = w0 / (2 nu)`` and off-diagonal coupling
``g(tau) = (B1 - i B2) / (2 nu)`` the system is

    i dC+/dtau = d C+ + g C-
    i dC-/dtau = conj(g) C+ - d C-

integrated with an adaptive Dormand-Prince 8(5,3) pair. Steps are clipped to
land exactly on the requested samples, so no interpolation is involved. The
norm is never renormalized; its drift is recorded as a diagnostic.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _dop853 as tab
from .errors import DomainError, IntegrationError
from .model import FieldKind
from .states import Trajectory, check_same_grid

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
#: Soliton runs need the envelope at the start to be negligible.
SOLITON_START_LIMIT = 1e-8

_EXP = -1.0 / 8.0

# Nonzero entries only; the tableau is sparse.
_A = tuple(tuple((j, a) for j, a in enumerate(row) if a != 0.0) for row in tab.A)
_B = tuple((j, b) for j, b in enumerate(tab.B) if b != 0.0)
_E3 = tuple((j, e) for j, e in enumerate(tab.E3) if e != 0.0)
_E5 = tuple((j, e) for j, e in enumerate(tab.E5) if e != 0.0)


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and sampling for one integration run."""

    sample_grid: tuple = field(default=(0.0,))
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = math.inf
    start_tau: float = 0.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            tol = float(getattr(self, name))
            if not 1e-14 < tol < 1e-2:
                raise DomainError(f"{name} must lie in (1e-14, 1e-2), got {tol!r}")
        if not self.max_step > 0:
            raise DomainError("max_step must be positive")
        grid = np.asarray(self.sample_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
            raise DomainError("sample_grid must be a non-empty 1-d array of finite values")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise DomainError("sample_grid must be strictly increasing")
        if grid[0] < self.start_tau:
            raise DomainError("sample_grid starts before start_tau")
        object.__setattr__(self, "sample_grid", tuple(float(x) for x in grid))


def _rhs_factory(fld):
    d = 0.5 * fld.frame_rate
    coupling = fld.coupling

    def rhs(t, yp, ym):
        g = coupling(t)
        return -1j * (d * yp + g * ym), -1j * (g.conjugate() * yp - d * ym)

    return rhs


def _error_norm(h, yp, ym, np_, nm, kp, km, rel_tol, abs_tol):
    sp = abs_tol + max(abs(yp), abs(np_)) * rel_tol
    sm = abs_tol + max(abs(ym), abs(nm)) * rel_tol
    e5p = sum(e * kp[j] for j, e in _E5) / sp
    e5m = sum(e * km[j] for j, e in _E5) / sm
    e3p = sum(e * kp[j] for j, e in _E3) / sp
    e3m = sum(e * km[j] for j, e in _E3) / sm
    n5 = abs(e5p) ** 2 + abs(e5m) ** 2
    n3 = abs(e3p) ** 2 + abs(e3m) ** 2
    if n5 == 0.0 and n3 == 0.0:
        return 0.0
    return abs(h) * n5 / math.sqrt((n5 + 0.01 * n3) * 2.0)


def _initial_step(rhs, t0, yp, ym, fp, fm, direction, rel_tol, abs_tol, span):
    sp = abs_tol + abs(yp) * rel_tol
    sm = abs_tol + abs(ym) * rel_tol
    d0 = math.sqrt(((abs(yp) / sp) ** 2 + (abs(ym) / sm) ** 2) / 2)
    d1 = math.sqrt(((abs(fp) / sp) ** 2 + (abs(fm) / sm) ** 2) / 2)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    gp, gm = rhs(t0 + direction * h0, yp + direction * h0 * fp, ym + direction * h0 * fm)
    d2 = math.sqrt(((abs(gp - fp) / sp) ** 2 + (abs(gm - fm) / sm) ** 2) / 2) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (tab.ORDER + 1))
    return min(100 * h0, h1, span)


def _propagate(rhs, t, yp, ym, targets, cfg: IntegratorConfig, on_sample=None):
    """Advance from ``t`` through each target in order; returns the final state."""
    rel_tol, abs_tol = cfg.rel_tol, cfg.abs_tol
    direction = 1.0 if targets[-1] >= t else -1.0
    norm0 = abs(yp) ** 2 + abs(ym) ** 2
    drift_limit = 100.0 * rel_tol
    fp, fm = rhs(t, yp, ym)
    h = min(_initial_step(
        rhs, t, yp, ym, fp, fm, direction, rel_tol, abs_tol, abs(targets[-1] - t) or 1.0), cfg.max_step)
    kp = [0j] * 12
    km = [0j] * 12
    for index, target in enumerate(targets):
        while direction * (target - t) > 0:
            min_step = 10.0 * abs(math.nextafter(t, direction * math.inf) - t)
            rejected = False
            while True:
                if h < min_step:
                    raise IntegrationError(f"step size underflow at tau={t!r}")
                step = h
                clipped = direction * (target - t) <= step
                if clipped:
                    step = direction * (target - t)
                hs = direction * step
                kp[0], km[0] = fp, fm
                for s in range(1, 12):
                    ap = yp + hs * sum(a * kp[j] for j, a in _A[s])
                    am = ym + hs * sum(a * km[j] for j, a in _A[s])
                    kp[s], km[s] = rhs(t + tab.C[s] * hs, ap, am)
                np_ = yp + hs * sum(b * kp[j] for j, b in _B)
                nm = ym + hs * sum(b * km[j] for j, b in _B)
                err = _error_norm(hs, yp, ym, np_, nm, kp, km, rel_tol, abs_tol)
                if err < 1.0:
                    factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** _EXP)
                    if rejected:
                        factor = min(1.0, factor)
                    if not clipped:
                        h = min(step * factor, cfg.max_step)
                    break
                h = step * max(MIN_FACTOR, SAFETY * err ** _EXP)
                rejected = True
            t = target if clipped else t + hs
            yp, ym = np_, nm
            fp, fm = rhs(t, yp, ym)
            if abs(abs(yp) ** 2 + abs(ym) ** 2 - norm0) > drift_limit:
                raise IntegrationError(
                    f"norm drift {abs(yp) ** 2 + abs(ym) ** 2 - norm0:.3e} exceeds {drift_limit:.1e} at tau={t!r}"
                )
        if on_sample is not None:
            on_sample(index, yp, ym)
    return t, yp, ym


def _check_soliton_start(fld, cfg: IntegratorConfig) -> None:
    if getattr(fld, "kind", None) is FieldKind.SOLITON:
        peak = fld.N
        if abs(fld.coupling(cfg.start_tau)) > SOLITON_START_LIMIT * peak:
            raise DomainError(
                f"soliton envelope at start_tau={cfg.start_tau} is not negligible; start earlier"
            )


def integrate(fld, cfg: IntegratorConfig) -> Trajectory:
    """Integrate from the ``|+>`` state at ``cfg.start_tau`` and sample on the grid.

    The initial lab state is ``(exp(-i w0 tau0 / 2), 0)`` so that the rotating
    amplitude is exactly ``(1, 0)`` at ``tau0``.
    """
    _check_soliton_start(fld, cfg)
    grid = cfg.sample_grid
    cp = np.empty(len(grid), dtype=complex)
    cm = np.empty(len(grid), dtype=complex)

    def store(i, yp, ym):
        cp[i] = yp
        cm[i] = ym

    y0 = cmath.exp(-0.5j * fld.frame_rate * cfg.start_tau)
    rhs = _rhs_factory(fld)
    _propagate(rhs, cfg.start_tau, y0, 0j, grid, cfg, store)
    return Trajectory(
        np.array(grid), cp, cm, fld.frame_rate,
        {"method": "ode", "rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol, "start_tau": cfg.start_tau},
    )


def propagate(fld, state: tuple[complex, complex], tau0: float, tau1: float, cfg: IntegratorConfig) -> tuple[complex, complex]:
    """Carry a lab-frame state from ``tau0`` to ``tau1`` (either direction)."""
    rhs = _rhs_factory(fld)
    if tau1 == tau0:
        return complex(state[0]), complex(state[1])
    _, yp, ym = _propagate(rhs, float(tau0), complex(state[0]), complex(state[1]), (float(tau1),), cfg)
    return yp, ym


def default_grid(tau_max: float, samples: int, tau_min: float = 0.0) -> np.ndarray:
    return np.linspace(tau_min, tau_max, samples)


def max_deviation(t1: Trajectory, t2: Trajectory) -> float:
    """Largest pointwise ``|S3(1) - S3(2)|`` on a shared grid."""
    check_same_grid(t1, t2)
    return float(np.max(np.abs(t1.s3 - t2.s3)))


def rms_deviation(t1: Trajectory, t2: Trajectory) -> float:
    """Root-mean-square ``S3`` difference on a shared grid."""
    check_same_grid(t1, t2)
    return float(np.sqrt(np.mean((t1.s3 - t2.s3) ** 2)))
