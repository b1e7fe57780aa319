"""Complex log-gamma and the squared gamma modulus used by the Meixner density.

The Meixner density carries the factor ``|Gamma(a + i b)|**2`` with ``a`` as small
as a few hundredths and ``|b|`` in the thousands, where the modulus decays like
``exp(-pi |b|)``.  Everything here therefore works in log space.

The branch convention is the one of ``scipy.special.loggamma``: the analytic
continuation of ``log Gamma`` from the positive real axis, with a single branch
cut along the negative real axis (approached from above).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.special import zeta

from .errors import DomainError, PoleError

__all__ = ["log_gamma_complex", "gamma_abs_squared_log"]

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
_LOG_PI = np.log(np.pi)
_EULER_GAMMA = 0.57721566490153286061

# Stirling series coefficients B_2k / (2k (2k - 1)), k = 1..10
_BERNOULLI_2K = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
    Fraction(43867, 798), Fraction(-174611, 330),
]
_STIRLING = np.array(
    [float(b / (2 * k * (2 * k - 1))) for k, b in enumerate(_BERNOULLI_2K, start=1)]
)

# Taylor series of log Gamma(1 + w): -gamma w + sum_k (-1)^k zeta(k) w^k / k
_TAYLOR_ORDER = 32
_TAYLOR = np.zeros(_TAYLOR_ORDER + 1)
_TAYLOR[1] = -_EULER_GAMMA
for _k in range(2, _TAYLOR_ORDER + 1):
    _TAYLOR[_k] = (-1) ** _k * zeta(_k) / _k

_STIRLING_RADIUS = 16.0
_TAYLOR_RADIUS = 0.2


def _stirling(z: np.ndarray) -> np.ndarray:
    """Asymptotic series, accurate to double precision for ``|z| >= 16``, ``Re z >= 0``."""
    inv = 1.0 / z
    inv2 = inv * inv
    acc = np.zeros_like(z)
    for c in _STIRLING[::-1]:
        acc = acc * inv2 + c
    return (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + acc * inv


def _taylor_one(w: np.ndarray) -> np.ndarray:
    """log Gamma(1 + w) for small ``|w|``."""
    acc = np.zeros_like(w)
    for c in _TAYLOR[:0:-1]:
        acc = (acc + c) * w
    return acc


def _right_half(z: np.ndarray) -> np.ndarray:
    """log Gamma on ``Re z >= 0`` (poles excluded by the caller)."""
    out = np.empty_like(z)

    near1 = np.abs(z - 1.0) < _TAYLOR_RADIUS
    near2 = np.abs(z - 2.0) < _TAYLOR_RADIUS
    out[near1] = _taylor_one(z[near1] - 1.0)
    w2 = z[near2] - 2.0
    out[near2] = _taylor_one(w2) + np.log1p(w2)

    rest = ~(near1 | near2)
    zr = z[rest]
    shift = np.where(
        np.abs(zr) >= _STIRLING_RADIUS, 0, np.ceil(_STIRLING_RADIUS - zr.real)
    ).astype(int)
    shift = np.maximum(shift, 0)
    acc = np.zeros_like(zr)
    for k in range(int(shift.max(initial=0))):
        sel = shift > k
        acc[sel] += np.log(zr[sel] + k)
    out[rest] = _stirling(zr + shift) - acc
    return out


def _log_sin_pi_upper(z: np.ndarray) -> np.ndarray:
    """Branch of ``log sin(pi z)`` on ``Im z >= 0`` that is continuous there and real on ``Re z = 1/2``."""
    x, y = z.real, z.imag
    return (
        np.pi * y
        - np.log(2.0)
        - 1j * np.pi * (x - 0.5)
        + np.log1p(-np.exp(2j * np.pi * z))
    )


def log_gamma_complex(z):
    """Principal-branch ``log Gamma(z)`` for complex ``z`` (scalar or array).

    Parameters
    ----------
    z : complex or array_like
        Argument; must be finite and not a non-positive integer.

    Returns
    -------
    complex or ndarray
        ``log Gamma(z)`` with the same shape as ``z``.

    Raises
    ------
    PoleError
        If any element is a non-positive integer.
    DomainError
        If any element is NaN or infinite.
    """
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    flat = arr.ravel()
    if not np.all(np.isfinite(flat)):
        raise DomainError("log_gamma_complex requires finite arguments")
    poles = (flat.imag == 0) & (flat.real <= 0) & (flat.real == np.round(flat.real))
    if np.any(poles):
        raise PoleError(f"Gamma has a pole at {flat[poles][0].real:g}")

    out = np.empty_like(flat)
    right = flat.real >= 0
    out[right] = _right_half(flat[right])

    left = ~right
    if np.any(left):
        zl = flat[left]
        # reflection on the closed upper half plane, conjugation below it
        lower = zl.imag < 0
        zu = np.where(lower, np.conj(zl), zl)
        val = _LOG_PI - _log_sin_pi_upper(zu) - _right_half(1.0 - zu)
        out[left] = np.where(lower, np.conj(val), val)

    out = out.reshape(arr.shape)
    return complex(out) if scalar else out


def gamma_abs_squared_log(a, b):
    """``log |Gamma(a + i b)|**2`` for ``a > 0``; never underflows.

    Exact conjugate symmetry in ``b`` is enforced by evaluating at ``|b|``.
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.abs(np.asarray(b, dtype=float))
    if np.any(~(a_arr > 0)):
        raise DomainError("gamma_abs_squared_log requires a > 0")
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    val = 2.0 * np.real(log_gamma_complex(a_arr + 1j * b_arr))
    return float(val) if np.ndim(val) == 0 else val
