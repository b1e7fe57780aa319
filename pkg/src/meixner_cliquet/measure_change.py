"""Structure-preserving changes of measure between risk-neutral and physical Meixner laws.

A change of measure for a pure-jump Levy process is described by a function
``h`` with ``nu_P(dz) = exp(h(z)) nu_Q(dz)``.  Both Levy measures have infinite
mass near ``z = 0`` (the Meixner density behaves like ``delta alpha / (pi z^2)``),
so every quantity that mixes them is evaluated as a single combined integrand
whose singular parts cancel, never as a difference of two divergent integrals.

The simple change tilts the skewness only, ``h(z) = (beta* - beta) z / alpha``.
The general change moves to ``(alpha*, beta*, delta*)``; when
``delta* alpha* != delta alpha`` its location integral is finite only as a
principal value and the Novikov-type integral diverges at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceFailure, DivergenceDetected, DomainError, SingularCombination
from .meixner import MeixnerParams, drift_theta, levy_density
from .quadrature import DISTRIBUTION_CONFIG, QuadConfig, QuadResult, integrate_finite, integrate_principal_value

__all__ = [
    "SimpleChangeSpec",
    "GeneralChangeSpec",
    "GeneralChangeResult",
    "radon_nikodym_h_simple",
    "radon_nikodym_h_general",
    "apply_simple_change",
    "apply_general_change",
    "general_change_report",
    "theta_shift",
    "novikov_integrand",
    "novikov_check",
]


@dataclass(frozen=True)
class SimpleChangeSpec:
    """Target skewness ``beta_star`` in (-pi, pi)."""

    beta_star: float

    def __post_init__(self):
        b = self.beta_star
        if isinstance(b, bool) or not isinstance(b, (int, float)) or not -math.pi < b < math.pi:
            raise DomainError(f"beta_star must lie in (-pi, pi), got {b!r}")
        object.__setattr__(self, "beta_star", float(b))


@dataclass(frozen=True)
class GeneralChangeSpec:
    alpha_star: float
    beta_star: float
    delta_star: float

    def __post_init__(self):
        for name in ("alpha_star", "beta_star", "delta_star"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not self.alpha_star > 0:
            raise DomainError(f"alpha_star must be positive, got {self.alpha_star}")
        if not -math.pi < self.beta_star < math.pi:
            raise DomainError(f"beta_star must lie in (-pi, pi), got {self.beta_star}")
        if not self.delta_star > 0:
            raise DomainError(f"delta_star must be positive, got {self.delta_star}")


@dataclass(frozen=True)
class GeneralChangeResult:
    """Physical parameters plus how the location integral was obtained."""

    params: MeixnerParams
    location_integral: QuadResult
    pv_regularized: bool


def _nonzero(z):
    z = np.asarray(z, dtype=float)
    if np.any(z == 0):
        raise DomainError("the density process is defined on z != 0 only")
    return z


def radon_nikodym_h_simple(q: MeixnerParams, spec: SimpleChangeSpec, z):
    """``h(z) = (beta* - beta) z / alpha``."""
    z = _nonzero(z)
    val = (spec.beta_star - q.beta) * z / q.alpha
    return float(val) if val.ndim == 0 else val


def _log_sinh_ratio(k1: float, k2: float, az):
    """``log(sinh(k1 z) / sinh(k2 z))`` for ``z > 0``, stable at both ends."""
    return (k1 - k2) * az + np.log(-np.expm1(-2.0 * k1 * az)) - np.log(-np.expm1(-2.0 * k2 * az))


def radon_nikodym_h_general(q: MeixnerParams, spec: GeneralChangeSpec, z):
    """``h(z) = (beta*/alpha* - beta/alpha) z + log(delta* sinh(pi z/alpha) / (delta sinh(pi z/alpha*)))``."""
    z = _nonzero(z)
    slope = spec.beta_star / spec.alpha_star - q.beta / q.alpha
    # the sinh ratio is even in z
    ratio = _log_sinh_ratio(math.pi / q.alpha, math.pi / spec.alpha_star, np.abs(z))
    val = slope * z + math.log(spec.delta_star / q.delta) + ratio
    return float(val) if val.ndim == 0 else val


def _sinh_ratio(a: float, k: float, z):
    """``sinh(a z) / sinh(k z)`` for ``z > 0`` and ``|a| < k``."""
    aa = abs(a)
    if aa == 0.0:
        return np.zeros_like(z)
    return math.copysign(1.0, a) * np.exp((aa - k) * z) * np.expm1(-2.0 * aa * z) / np.expm1(-2.0 * k * z)


def _cutoff(rate: float) -> float:
    # exp(-rate z) < 1e-18
    return 42.0 / rate


def theta_shift(q: MeixnerParams, spec: SimpleChangeSpec, cfg: QuadConfig = DISTRIBUTION_CONFIG) -> float:
    """Drift shift ``theta* - theta = delta int (e^{beta* z/alpha} - e^{beta z/alpha}) / sinh(pi z/alpha) dz``.

    The integrand is folded onto ``z > 0``, where it becomes
    ``2 delta (sinh(beta* z/alpha) - sinh(beta z/alpha)) / sinh(pi z/alpha)``.
    """
    if spec.beta_star == q.beta:
        return 0.0
    k = math.pi / q.alpha
    a_star, a = spec.beta_star / q.alpha, q.beta / q.alpha

    def f(z):
        return 2.0 * q.delta * (_sinh_ratio(a_star, k, z) - _sinh_ratio(a, k, z))

    zmax = _cutoff(k - max(abs(a_star), abs(a)))
    res = integrate_finite(f, 0.0, zmax, cfg)
    if not res.converged:
        raise ConvergenceFailure(f"drift-shift integral did not converge ({res.error_estimate:.3g})")
    return float(res.value)


def apply_simple_change(
    q: MeixnerParams, spec: SimpleChangeSpec, cfg: QuadConfig = DISTRIBUTION_CONFIG
) -> MeixnerParams:
    """Physical law ``M(alpha, beta*, delta, mu*)`` after the skewness tilt."""
    if spec.beta_star == q.beta:
        return q
    mu_star = (
        q.mu
        + q.delta * q.alpha * (math.tan(q.beta / 2.0) - math.tan(spec.beta_star / 2.0))
        + theta_shift(q, spec, cfg)
    )
    return MeixnerParams(q.alpha, spec.beta_star, q.delta, mu_star)


def general_change_report(
    q: MeixnerParams,
    spec: GeneralChangeSpec,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
    *,
    strict: bool = False,
) -> GeneralChangeResult:
    """Physical law ``M(alpha*, beta*, delta*, mu_bar)`` with diagnostics.

    The location involves ``int [delta* e^{beta* z/alpha*}/sinh(pi z/alpha*)
    - delta e^{beta z/alpha}/sinh(pi z/alpha)] dz``, whose integrand behaves
    like ``(delta* alpha* - delta alpha) / (pi z)`` at the origin.  It is
    evaluated as a principal value (nodes paired at ``+-z``); the result is
    flagged as regularized when the ``1/z`` part does not vanish, and
    ``strict=True`` refuses that case with :class:`SingularCombination`.
    """
    singular = not math.isclose(spec.delta_star * spec.alpha_star, q.delta * q.alpha, rel_tol=1e-14, abs_tol=0.0)
    if singular and strict:
        raise SingularCombination(
            "delta* alpha* = %.17g differs from delta alpha = %.17g: the location integral "
            "diverges like 1/z at the origin and exists only as a principal value"
            % (spec.delta_star * spec.alpha_star, q.delta * q.alpha)
        )
    k_star, b_star = math.pi / spec.alpha_star, spec.beta_star / spec.alpha_star
    k, b = math.pi / q.alpha, q.beta / q.alpha

    def combined(z):
        z = np.asarray(z, dtype=float)
        az = np.where(z == 0, 1.0, np.abs(z))
        sgn = np.sign(z)
        p_part = spec.delta_star * 2.0 * np.exp((sgn * b_star - k_star) * az) / -np.expm1(-2.0 * k_star * az)
        q_part = q.delta * 2.0 * np.exp((sgn * b - k) * az) / -np.expm1(-2.0 * k * az)
        return sgn * (p_part - q_part)

    zmax = max(_cutoff(k_star - abs(b_star)), _cutoff(k - abs(b)))
    res = integrate_principal_value(combined, 0.0, -zmax, zmax, cfg)
    if not res.converged:
        raise ConvergenceFailure(f"location integral did not converge ({res.error_estimate:.3g})")
    mu_bar = (
        q.mu
        + q.delta * q.alpha * math.tan(q.beta / 2.0)
        - spec.delta_star * spec.alpha_star * math.tan(spec.beta_star / 2.0)
        + float(res.value)
    )
    params = MeixnerParams(spec.alpha_star, spec.beta_star, spec.delta_star, mu_bar)
    return GeneralChangeResult(params=params, location_integral=res, pv_regularized=singular)


def apply_general_change(
    q: MeixnerParams,
    spec: GeneralChangeSpec,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
    *,
    strict: bool = False,
) -> MeixnerParams:
    """Physical law ``M(alpha*, beta*, delta*, mu_bar)``; see :func:`general_change_report`."""
    if (spec.alpha_star, spec.beta_star, spec.delta_star) == (q.alpha, q.beta, q.delta):
        return q
    return general_change_report(q, spec, cfg, strict=strict).params


def _novikov_kernel(h):
    """``1 - e^h + h e^h``, by its power series for small ``|h|``."""
    h = np.asarray(h, dtype=float)
    small = np.abs(h) < 1e-3
    hs = np.where(small, h, 0.0)
    series = hs * hs * (0.5 + hs * (1.0 / 3.0 + hs * (1.0 / 8.0 + hs * (1.0 / 30.0))))
    hb = np.where(small, 0.0, h)
    direct = 1.0 + (hb - 1.0) * np.exp(hb)
    return np.where(small, series, direct)


def novikov_integrand(q: MeixnerParams, h: Callable, z):
    """``(1 - e^{h(z)} + h(z) e^{h(z)}) nu_Q(z)``; nonnegative."""
    z = _nonzero(z)
    val = _novikov_kernel(h(z)) * levy_density(q, z)
    return float(val) if np.ndim(val) == 0 else val


def novikov_check(
    q: MeixnerParams,
    h: Callable,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
    *,
    max_levels: int = 60,
) -> float:
    """``int (1 - e^h + h e^h) dnu_Q`` over ``z != 0`` as one combined integrand.

    Each half-line is cut at ``z0 = alpha`` and covered by dyadic shells
    ``[z0 2^-(j+1), z0 2^-j]`` towards the origin and ``[z0 2^j, z0 2^(j+1)]``
    outwards.  Near the origin a bounded integrand gives shell masses that
    halve at every level; masses that stop shrinking mean the integral
    diverges and raise :class:`DivergenceDetected`.  ``h`` must accept arrays.
    """
    z0 = q.alpha
    shell_cfg = cfg.with_tol(cfg.abs_tol / 64)
    total = 0.0
    for sign in (1.0, -1.0):

        def f(z, sign=sign):
            return novikov_integrand(q, h, sign * z)

        # inward shells
        prev = None
        growth = 0
        for j in range(max_levels):
            lo, hi = z0 * 2.0 ** -(j + 1), z0 * 2.0**-j
            res = integrate_finite(f, lo, hi, shell_cfg)
            v = float(res.value)
            if not math.isfinite(v):
                raise DivergenceDetected(f"integrand not finite near z = {sign * lo:g}")
            total += v
            if prev is not None and prev > 0 and v > 0.75 * prev:
                growth += 1
                if growth >= 6:
                    raise DivergenceDetected(
                        f"shell masses stop shrinking towards z = 0 (last {v:.3g} on [{lo:.3g}, {hi:.3g}])"
                    )
            else:
                growth = 0
            # remaining inner mass is at most the geometric sum of halving shells
            if j >= 8 and growth == 0 and v <= shell_cfg.abs_tol:
                break
            prev = v
        else:
            raise DivergenceDetected("inner shells did not settle")

        # outward shells
        prev = None
        growth = 0
        for j in range(max_levels):
            lo, hi = z0 * 2.0**j, z0 * 2.0 ** (j + 1)
            res = integrate_finite(f, lo, hi, shell_cfg)
            v = float(res.value)
            if not math.isfinite(v):
                raise DivergenceDetected(f"integrand not finite near z = {sign * hi:g}")
            total += v
            if prev is not None and v > prev and v > shell_cfg.abs_tol:
                growth += 1
                if growth >= 4:
                    raise DivergenceDetected(f"shell masses grow towards |z| = {hi:g}")
            else:
                growth = 0
            if j >= 2 and v <= shell_cfg.abs_tol * 1e-3:
                break
            prev = v
        else:
            raise DivergenceDetected("outer shells did not settle")
    return total
