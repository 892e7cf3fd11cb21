"""Elliptic functions, elliptic integrals and orthogonal polynomials.

Everything the closed-form amplitudes need is implemented here without
external special-function libraries:

* Jacobi ``sn, cn, dn`` and the amplitude ``am`` by descending Landen
  transformation seeded by the arithmetic-geometric mean (AGM),
* the complete integral ``K(k)`` and ``2F1(1/2, 1/2; 1; k^2) = 2K/pi``,
* Carlson's symmetric integrals ``R_F`` and ``R_J`` for complex arguments,
* the incomplete integrals ``F(phi, k)`` and ``Pi(n; phi, k)`` for any real
  (unwrapped) amplitude ``phi``,
* Chebyshev ``T_N, U_N`` and Jacobi ``P_N^{(a, b)}`` polynomials.

Time/amplitude arguments may be scalars or numpy arrays; the modulus ``k`` is
always a scalar in ``[0, 1]``.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DomainError, RecurrenceSingularityError, SingularCharacteristicError

# Accuracy constants for the whole module.
#: Landen descent stops once c_n / a_n drops below this.
LANDEN_TOL = 1e-16
#: Carlson duplication stops once every argument lies within this relative
#: distance of the mean; the fifth-order series then errs by ~ CARLSON_TOL**6.
CARLSON_TOL = 1.5e-3
MAX_DUPLICATIONS = 100


class JacobiTriple(NamedTuple):
    sn: float | np.ndarray
    cn: float | np.ndarray
    dn: float | np.ndarray


def check_modulus(k, *, allow_one: bool = True) -> float:
    """Validate an elliptic modulus and return it as a float."""
    k = float(k)
    if math.isnan(k) or not 0.0 <= k <= 1.0:
        raise DomainError(f"elliptic modulus must lie in [0, 1], got {k!r}")
    if k == 1.0 and not allow_one:
        raise DomainError("complete elliptic integral diverges at k = 1")
    return k


def _out(value):
    """Unwrap 0-d arrays so scalar input gives a scalar back."""
    if isinstance(value, np.ndarray) and value.ndim == 0:
        return value[()]
    return value


@lru_cache(maxsize=512)
def _landen_chain(k: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """AGM means ``a_n`` and ratios ``c_n / a_n`` of the descending chain."""
    a, b, c = 1.0, math.sqrt((1.0 - k) * (1.0 + k)), k
    means, ratios = [a], [c]
    while abs(c) > LANDEN_TOL * a:
        a, b, c_next = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        if abs(c_next) >= abs(c):
            break  # stalled at rounding level
        c = c_next
        means.append(a)
        ratios.append(c / a)
    return tuple(means), tuple(ratios)


def _quarter_period(k: float) -> float:
    means, _ = _landen_chain(k)
    return math.pi / (2.0 * means[-1])


def complete_K(k) -> float:
    """Complete elliptic integral of the first kind via the AGM."""
    k = check_modulus(k, allow_one=False)
    return _quarter_period(k)


def hyp2f1_half(k) -> float:
    """``2F1(1/2, 1/2; 1; k^2)``, which equals ``2 K(k) / pi``."""
    k = check_modulus(k, allow_one=False)
    means, _ = _landen_chain(k)
    return 1.0 / means[-1]


def _descend_scalar(u: float, k: float) -> float:
    means, ratios = _landen_chain(k)
    n = len(means) - 1
    phi = math.ldexp(means[-1] * u, n)
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(ratios[j] * math.sin(phi)))
    return phi


def _descend(u: np.ndarray, k: float) -> np.ndarray:
    means, ratios = _landen_chain(k)
    n = len(means) - 1
    phi = np.ldexp(means[-1] * u, n)
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(ratios[j] * np.sin(phi)))
    return phi


def _dn_scalar(sn: float, cn: float, k: float) -> float:
    if abs(sn) < abs(cn):
        return math.sqrt(1.0 - (k * sn) ** 2)
    return math.sqrt((1.0 - k) * (1.0 + k) + (k * cn) ** 2)


def _elliptic_scalar(tau: float, k: float) -> tuple[float, float, float, float]:
    if k == 1.0:
        x = math.exp(-abs(tau))
        sech = 2.0 * x / (1.0 + x * x)
        return math.tanh(tau), sech, sech, math.copysign(math.atan2(1.0 - x * x, 2.0 * x), tau)
    half_period = 2.0 * _quarter_period(k)
    m = round(tau / half_period)
    phi = _descend_scalar(tau - m * half_period, k)
    sn, cn = math.sin(phi), math.cos(phi)
    if m % 2:
        sn, cn = -sn, -cn
    dn = _dn_scalar(sn, cn, k)
    return sn, cn, dn, phi + m * math.pi


def jacobi_elliptic(tau, k):
    """Return ``(sn, cn, dn, am)`` at ``tau`` for modulus ``k``.

    The amplitude is unwrapped: ``am(tau + 2K) = am(tau) + pi``, so it is
    continuous and increasing in ``tau``. ``k = 1`` uses the hyperbolic limit
    (``tanh``, ``sech``, ``sech``, Gudermannian).
    """
    k = check_modulus(k)
    if np.ndim(tau) == 0 and not isinstance(tau, np.ndarray):
        tau = float(tau)
        if math.isnan(tau):
            nan = float("nan")
            return nan, nan, nan, nan
        return _elliptic_scalar(tau, k)

    tau = np.asarray(tau, dtype=float)
    if k == 1.0:
        x = np.exp(-np.abs(tau))
        sech = 2.0 * x / (1.0 + x * x)
        return np.tanh(tau), sech, sech, np.copysign(np.arctan2(1.0 - x * x, 2.0 * x), tau)
    half_period = 2.0 * _quarter_period(k)
    m = np.rint(tau / half_period)
    phi = _descend(tau - m * half_period, k)
    sign = 1.0 - 2.0 * np.mod(m, 2.0)
    sn, cn = sign * np.sin(phi), sign * np.cos(phi)
    # Pick the cancellation-free form on each side of |sn| = |cn|.
    dn = np.where(np.abs(sn) < np.abs(cn), np.sqrt(1.0 - (k * sn) ** 2),
                  np.sqrt((1.0 - k) * (1.0 + k) + (k * cn) ** 2))
    return sn, cn, dn, phi + m * np.pi


def jacobi_sn_cn_dn(tau, k) -> JacobiTriple:
    """Jacobi elliptic functions ``sn, cn, dn`` of modulus ``k``."""
    sn, cn, dn, _ = jacobi_elliptic(tau, k)
    return JacobiTriple(sn, cn, dn)


def jacobi_am(tau, k):
    """Unwrapped Jacobi amplitude ``am(tau, k)``; ``sin(am) = sn``."""
    return jacobi_elliptic(tau, k)[3]


# ---------------------------------------------------------------------------
# Carlson symmetric integrals


def _complex_args(*args):
    arrays = np.broadcast_arrays(*(np.asarray(a) for a in args))
    is_real = not any(np.iscomplexobj(a) for a in arrays)
    return [np.array(a, dtype=complex) for a in arrays], is_real


def _check_cut(name: str, func: str, z: np.ndarray) -> None:
    if np.any(np.isnan(z)):
        raise DomainError(f"{func}: argument {name} is NaN")
    if np.any((z.imag == 0) & (z.real < 0)):
        raise DomainError(f"{func}: argument {name} lies on the negative real axis")


def _check_zeros(func: str, x, y, z) -> None:
    zx, zy, zz = x == 0, y == 0, z == 0
    if np.any((zx & zy) | (zx & zz) | (zy & zz)):
        raise DomainError(f"{func}: at most one of x, y, z may vanish")


def _spread(mean, *args) -> float:
    if mean.size == 0:
        return 0.0
    return max(float(np.max(np.abs(v - mean) / np.abs(mean))) for v in args)


def _rf(x, y, z):
    for _ in range(MAX_DUPLICATIONS):
        mean = (x + y + z) / 3.0
        if _spread(mean, x, y, z) < CARLSON_TOL:
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = (x + lam) / 4.0, (y + lam) / 4.0, (z + lam) / 4.0
    else:
        raise DomainError("carlson_rf: duplication did not converge")
    dx = (mean - x) / mean
    dy = (mean - y) / mean
    dz = -(dx + dy)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / np.sqrt(mean)


def _rj(x, y, z, p):
    total = np.zeros_like(x)
    scale = 1.0
    for _ in range(MAX_DUPLICATIONS):
        mean = (x + y + z + 2.0 * p) / 5.0
        if _spread(mean, x, y, z, p) < CARLSON_TOL:
            break
        sx, sy, sz, sp = np.sqrt(x), np.sqrt(y), np.sqrt(z), np.sqrt(p)
        lam = sx * sy + sy * sz + sz * sx
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = (p - x) * (p - y) * (p - z) / (d * d)
        one = np.ones_like(e)
        total = total + 6.0 * scale / d * _rf(one, one + e, one + e)
        scale /= 4.0
        x, y, z, p = (x + lam) / 4.0, (y + lam) / 4.0, (z + lam) / 4.0, (p + lam) / 4.0
    else:
        raise DomainError("carlson_rj: duplication did not converge")
    dx = (mean - x) / mean
    dy = (mean - y) / mean
    dz = (mean - z) / mean
    dp = -(dx + dy + dz) / 2.0
    e2 = dx * dy + dx * dz + dy * dz - 3.0 * dp * dp
    e3 = dx * dy * dz + 2.0 * e2 * dp + 4.0 * dp ** 3
    e4 = (2.0 * dx * dy * dz + e2 * dp + 3.0 * dp ** 3) * dp
    e5 = dx * dy * dz * dp * dp
    series = (
        1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
        - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0
    )
    return total + scale * series / (mean * np.sqrt(mean))


def carlson_rf(x, y, z):
    """Carlson's ``R_F(x, y, z)`` for complex arguments off the negative axis."""
    (x, y, z), is_real = _complex_args(x, y, z)
    for name, v in (("x", x), ("y", y), ("z", z)):
        _check_cut(name, "carlson_rf", v)
    _check_zeros("carlson_rf", x, y, z)
    value = _rf(x, y, z)
    return _out(value.real if is_real else value)


def carlson_rj(x, y, z, p):
    """Carlson's ``R_J(x, y, z, p)``; the Cauchy principal value is not supported."""
    (x, y, z, p), is_real = _complex_args(x, y, z, p)
    for name, v in (("x", x), ("y", y), ("z", z), ("p", p)):
        _check_cut(name, "carlson_rj", v)
    _check_zeros("carlson_rj", x, y, z)
    if np.any(p == 0):
        raise DomainError("carlson_rj: argument p must be nonzero")
    value = _rj(x, y, z, p)
    return _out(value.real if is_real else value)


# ---------------------------------------------------------------------------
# Incomplete integrals


def _reduce_amplitude(phi):
    phi = np.asarray(phi, dtype=float)
    m = np.rint(phi / np.pi)
    r = phi - m * np.pi
    return m, np.sin(r), np.cos(r)


def ellint_F(phi, k):
    """Incomplete integral of the first kind for any real amplitude."""
    k = check_modulus(k)
    m, s, c = _reduce_amplitude(phi)
    if k == 1.0 and np.any((c == 0) | (m != 0)):
        raise DomainError("F(phi, 1) diverges at |phi| >= pi/2")
    value = s * carlson_rf(c * c, (1.0 - k * s) * (1.0 + k * s), np.ones_like(s))
    if np.any(m != 0):
        value = value + 2.0 * m * complete_K(k)
    return _out(np.asarray(value))


def complete_Pi(n, k):
    """Complete integral of the third kind ``Pi(n; pi/2, k)``."""
    k = check_modulus(k, allow_one=False)
    n_arr = np.asarray(n)
    if not np.iscomplexobj(n_arr) and np.any(n_arr >= 1.0):
        raise SingularCharacteristicError(
            f"complete Pi: characteristic {n!r} puts the pole on [0, 1]"
        )
    kp2 = (1.0 - k) * (1.0 + k)
    zero = np.zeros_like(n_arr, dtype=float)
    value = carlson_rf(zero, zero + kp2, zero + 1.0) + n_arr / 3.0 * carlson_rj(
        zero, zero + kp2, zero + 1.0, 1.0 - n_arr
    )
    return _out(np.asarray(value))


def ellint_Pi(n, phi, k):
    """Incomplete integral of the third kind ``Pi(n; phi, k)``.

    Defined as ``int_0^{sin phi} dx / ((1 - n x^2) sqrt((1 - x^2)(1 - k^2 x^2)))``
    on the principal strip and continued to any real ``phi`` by
    ``Pi(n; phi + pi) = Pi(n; phi) + 2 Pi(n; pi/2)``. ``n`` may be complex.
    """
    k = check_modulus(k)
    m, s, c = _reduce_amplitude(phi)
    n_arr = np.asarray(n)
    s, c, n_arr = np.broadcast_arrays(s, c, n_arr)
    if k == 1.0 and np.any((c == 0) | (m != 0)):
        raise DomainError("Pi(n; phi, 1) diverges at |phi| >= pi/2")
    s2 = s * s
    p = 1.0 - n_arr * s2
    if not np.iscomplexobj(n_arr) and np.any(p <= 0):
        raise SingularCharacteristicError(
            f"Pi: characteristic {n!r} puts the pole on the integration path"
        )
    x = c * c
    y = (1.0 - k * s) * (1.0 + k * s)
    z = np.ones_like(s)
    value = s * carlson_rf(x, y, z) + n_arr * s * s2 / 3.0 * carlson_rj(x, y, z, p)
    if np.any(m != 0):
        value = value + 2.0 * np.broadcast_to(m, np.shape(value)) * complete_Pi(n, k)
    return _out(np.asarray(value))


# ---------------------------------------------------------------------------
# Orthogonal polynomials


def chebyshev_T(N: int, x):
    """Chebyshev polynomial of the first kind by three-term recurrence."""
    if N < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x
    if N == 0:
        return _out(prev)
    for _ in range(N - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return _out(cur)


def chebyshev_U(N: int, x):
    """Chebyshev polynomial of the second kind; ``U_{-1} = 0``."""
    if N < -1:
        raise ValueError("degree must be >= -1")
    x = np.asarray(x, dtype=float)
    if N == -1:
        return _out(np.zeros_like(x))
    prev, cur = np.ones_like(x), 2.0 * x
    if N == 0:
        return _out(prev)
    for _ in range(N - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return _out(cur)


def jacobi_P(N: int, a, b, x):
    """Jacobi polynomial ``P_N^{(a, b)}(x)`` with complex parameters."""
    if N < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    a, b = complex(a), complex(b)
    prev = np.ones_like(x, dtype=complex)
    if N == 0:
        return _out(prev)
    cur = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0
    for n in range(2, N + 1):
        s = 2 * n + a + b
        lead = 2 * n * (n + a + b) * (s - 2)
        if lead == 0:
            raise RecurrenceSingularityError(
                f"Jacobi recurrence singular at n={n} for a={a}, b={b}"
            )
        mid = (s - 1) * (s * (s - 2) * x + a * a - b * b)
        back = 2 * (n + a - 1) * (n + b - 1) * s
        prev, cur = cur, (mid * cur - back * prev) / lead
    return _out(np.asarray(cur))


def jacobi_P_derivative(N: int, a, b, x):
    """``d/dx P_N^{(a, b)}(x) = (N + a + b + 1)/2 * P_{N-1}^{(a+1, b+1)}(x)``."""
    if N == 0:
        return _out(np.zeros_like(np.asarray(x, dtype=float), dtype=complex))
    a, b = complex(a), complex(b)
    return (N + a + b + 1.0) / 2.0 * jacobi_P(N - 1, a + 1.0, b + 1.0, x)
