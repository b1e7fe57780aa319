"""The Meixner law M(alpha, beta, delta, mu) and the Meixner-Levy process built on it.

A Meixner-Levy process with time-one law ``M(alpha, beta, delta, mu)`` has
time-``t`` marginal ``M(alpha, beta, delta t, mu t)``; every function below that
takes ``t`` works with that marginal.

Densities are assembled in log space and exponentiated last.  Near its centre
``mu t`` the density of a short-horizon marginal is a sharp Lorentzian-like
spike of half-width about ``alpha delta t``, while its tails decay like
``exp(-(pi -+ beta) |x| / alpha)``; quadrature breakpoints are graded to both
scales (see :func:`law_breakpoints`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    BranchError,
    ConvergenceFailure,
    DomainError,
    IncompatibleParams,
    InfeasibleMoments,
)
from .quadrature import DISTRIBUTION_CONFIG, QuadConfig, integrate_finite, integrate_intervals
from .special import gamma_abs_squared_log, log_gamma_complex

__all__ = [
    "MeixnerParams",
    "LevyTriplet",
    "Cumulants",
    "drift_theta",
    "levy_triplet",
    "levy_density",
    "char_exponent",
    "char_function",
    "log_pdf",
    "pdf",
    "pdf_by_inversion",
    "inversion_residue",
    "cdf",
    "cdf_and_survival",
    "cumulants",
    "char_exponent_by_levy_khinchin",
    "levy_khinchin_integrand",
    "total_mass",
    "affine_transform",
    "convolve",
    "fit_by_moments",
    "law_breakpoints",
    "law_support",
]

_LOG2 = math.log(2.0)
# tail mass left outside the numerical support of a law
_TAIL_MASS = 1e-17


@dataclass(frozen=True)
class MeixnerParams:
    """Scale ``alpha > 0``, skewness ``beta`` in (-pi, pi), peakedness ``delta > 0``, location ``mu``."""

    alpha: float
    beta: float
    delta: float
    mu: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "mu"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not -math.pi < self.beta < math.pi:
            raise DomainError(f"beta must lie in (-pi, pi), got {self.beta}")
        if not self.delta > 0:
            raise DomainError(f"delta must be positive, got {self.delta}")

    def at(self, t: float) -> "MeixnerParams":
        """Law of the process at time ``t``: ``M(alpha, beta, delta t, mu t)``."""
        if not t > 0:
            raise DomainError(f"t must be positive, got {t}")
        return MeixnerParams(self.alpha, self.beta, self.delta * t, self.mu * t)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "delta": self.delta, "mu": self.mu}

    @classmethod
    def from_dict(cls, record: dict) -> "MeixnerParams":
        keys = {"alpha", "beta", "delta", "mu"}
        unknown = set(record) - keys
        if unknown:
            raise DomainError(f"unknown parameter keys: {sorted(unknown)}")
        missing = keys - set(record)
        if missing:
            raise DomainError(f"missing parameter keys: {sorted(missing)}")
        return cls(**{k: record[k] for k in ("alpha", "beta", "delta", "mu")})


@dataclass(frozen=True)
class LevyTriplet:
    """Drift, (zero) diffusion and the Levy measure of a Meixner-Levy process.

    The measure is infinite near the origin, so it is carried as a reference to
    the parameters; :func:`levy_density` evaluates it.
    """

    theta: float
    diffusion: float
    levy_measure: MeixnerParams


class Cumulants(NamedTuple):
    mean: float
    variance: float
    skewness: float
    kurtosis: float


def drift_theta(p: MeixnerParams) -> float:
    """Drift of the Levy-Ito decomposition, ``mu + delta alpha tan(beta / 2)``."""
    return p.mu + p.delta * p.alpha * math.tan(p.beta / 2.0)


def levy_triplet(p: MeixnerParams) -> LevyTriplet:
    return LevyTriplet(theta=drift_theta(p), diffusion=0.0, levy_measure=p)


def _exp_over_sinh(b, z, alpha):
    """``exp(b z) / sinh(pi z / alpha)`` for ``z > 0`` without overflow."""
    k = math.pi / alpha
    return 2.0 * np.exp((b - k) * z) / -np.expm1(-2.0 * k * z)


def levy_density(p: MeixnerParams, z):
    """Levy density ``delta exp(beta z / alpha) / (z sinh(pi z / alpha))``; ``z != 0``."""
    z = np.asarray(z, dtype=float)
    if np.any(z == 0):
        raise DomainError("the Levy density is singular at z = 0")
    az = np.abs(z)
    b = p.beta / p.alpha
    # 1/(z sinh(pi z/alpha)) is even, so evaluate on |z| with the tilt sign-adjusted
    val = p.delta * _exp_over_sinh(np.sign(z) * b, az, p.alpha) / az
    return float(val) if val.ndim == 0 else val


def _log_cosh(w):
    """Principal ``log cosh(w)`` for complex ``w`` with ``|Im w| < pi/2``."""
    s = np.where(w.real >= 0, w, -w)
    return s + np.log1p(np.exp(-2.0 * s)) - _LOG2


def _check_strip(p: MeixnerParams, u) -> None:
    shift = p.alpha * np.imag(u) - p.beta
    if np.any(np.abs(shift) >= math.pi):
        raise BranchError(
            "continuation argument outside |alpha Im(u) - beta| < pi "
            f"(alpha={p.alpha}, beta={p.beta}, Im(u) in [{np.min(np.imag(u))}, {np.max(np.imag(u))}])"
        )


def char_exponent(p: MeixnerParams, u):
    """Characteristic exponent ``psi(u)`` with ``E[exp(i u M_t)] = exp(t psi(u))``.

    Accepts complex ``u`` inside the strip ``|alpha Im(u) - beta| < pi``, where
    ``Re cosh((alpha u - i beta) / 2) > 0`` keeps the principal logarithm
    continuous.
    """
    u_arr = np.asarray(u, dtype=complex)
    _check_strip(p, u_arr)
    w = (p.alpha * u_arr - 1j * p.beta) / 2.0
    psi = 1j * u_arr * p.mu + 2.0 * p.delta * (math.log(math.cos(p.beta / 2.0)) - _log_cosh(w))
    # exact zero at the origin
    psi = np.where(u_arr == 0, 0.0, psi)
    return complex(psi) if psi.ndim == 0 else psi


def char_function(p: MeixnerParams, u, t: float = 1.0):
    """``E[exp(i u M_t)] = exp(t psi(u))``."""
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    val = np.exp(t * np.asarray(char_exponent(p, u)))
    return complex(val) if val.ndim == 0 else val


def _log_norm(p: MeixnerParams, t: float) -> float:
    dt = p.delta * t
    return (
        2.0 * dt * math.log(2.0 * math.cos(p.beta / 2.0))
        - math.log(2.0 * math.pi * p.alpha)
        - log_gamma_complex(2.0 * dt).real
    )


def log_pdf(p: MeixnerParams, t: float, x):
    """Log density of ``M_t``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    y = (x - p.mu * t) / p.alpha
    val = _log_norm(p, t) + p.beta * y + gamma_abs_squared_log(p.delta * t, y)
    return float(val) if np.ndim(val) == 0 else val


def pdf(p: MeixnerParams, t: float, x):
    """Density of ``M_t`` (log space internally)."""
    val = np.exp(log_pdf(p, t, x))
    return float(val) if np.ndim(val) == 0 else val


def _scales(p: MeixnerParams, t: float):
    dt = p.delta * t
    centre = p.mu * t
    sd = math.sqrt(dt / 2.0) * p.alpha / math.cos(p.beta / 2.0)
    core = p.alpha * min(dt, 1.0)
    return centre, sd, core


def law_support(p: MeixnerParams, t: float, tilt: float = 0.0):
    """Interval outside of which each tail holds less than about 1e-17 of mass.

    Uses the exponential tail rates ``(pi -+ beta) / alpha`` of the density:
    the mass beyond ``x`` is bounded by ``f(x) / rate`` (up to the slowly
    varying power factor).  With ``tilt`` the weight is ``exp(tilt x) f(x)``
    and both rates shift accordingly.
    """
    centre, sd, _ = _scales(p, t)
    rates = ((math.pi + p.beta) / p.alpha + tilt, (math.pi - p.beta) / p.alpha - tilt)
    if min(rates) <= 0:
        raise DomainError(f"exp({tilt} x) is not integrable against M(alpha={p.alpha}, beta={p.beta})")
    out = []
    for sign, rate in zip((-1.0, 1.0), rates):
        dist = max(40.0 * sd, 30.0 / rate)
        for _ in range(400):
            x = centre + sign * dist
            if math.exp(log_pdf(p, t, x) + tilt * x) / rate < _TAIL_MASS:
                break
            dist += 5.0 / rate
        out.append(centre + sign * dist)
    return out[0], out[1]


def law_breakpoints(
    p: MeixnerParams, t: float, lo: float | None = None, hi: float | None = None, tilt: float = 0.0
):
    """Panel edges graded geometrically away from the density spike at ``mu t``."""
    centre, sd, core = _scales(p, t)
    s_lo, s_hi = law_support(p, t, tilt)
    lo = s_lo if lo is None else lo
    hi = s_hi if hi is None else hi
    reach = max(centre - s_lo, s_hi - centre)
    steps = core * 2.0 ** np.arange(-3, 80)
    steps = steps[steps < reach]
    # uniform panels of one sd on top of the geometric grading
    body = centre + sd * np.arange(-60, 61)
    pts = np.concatenate([[centre], centre - steps, centre + steps, body, [lo, hi]])
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    return pts


def cdf_and_survival(p: MeixnerParams, t: float, x, cfg: QuadConfig = DISTRIBUTION_CONFIG):
    """``(F(x), 1 - F(x))`` with the survival summed from the right.

    Summing the per-panel masses from the right keeps the survival accurate
    relative to its own size deep in the upper tail.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    lo, hi = law_support(p, t)
    inside = flat[(flat > lo) & (flat < hi)]
    edges = np.unique(np.concatenate([law_breakpoints(p, t, lo, hi), inside]))
    values, _, res = integrate_intervals(lambda v: pdf(p, t, v), edges, cfg)
    if not res.converged:
        raise ConvergenceFailure(f"cdf quadrature did not converge ({res.error_estimate:.3g})")
    left = np.concatenate([[0.0], np.cumsum(values)])
    right = np.concatenate([np.cumsum(values[::-1])[::-1], [0.0]])
    idx = np.searchsorted(edges, np.clip(flat, lo, hi))
    F = np.where(flat <= lo, 0.0, np.where(flat >= hi, 1.0, left[idx]))
    S = np.where(flat <= lo, 1.0, np.where(flat >= hi, 0.0, right[idx]))
    return F.reshape(x.shape), S.reshape(x.shape)


def total_mass(p: MeixnerParams, t: float, cfg: QuadConfig = DISTRIBUTION_CONFIG) -> float:
    """Quadrature of the density over :func:`law_support` (one, up to ~1e-17 of tail mass)."""
    edges = law_breakpoints(p, t)
    _, _, res = integrate_intervals(lambda v: pdf(p, t, v), edges, cfg)
    if not res.converged:
        raise ConvergenceFailure(f"density quadrature did not converge ({res.error_estimate:.3g})")
    return float(res.value)


def cdf(p: MeixnerParams, t: float, x, cfg: QuadConfig = DISTRIBUTION_CONFIG):
    """Distribution function of ``M_t`` by quadrature of the density.

    Outside :func:`law_support` the result is exactly 0 or 1.
    """
    F, S = cdf_and_survival(p, t, x, cfg)
    val = np.clip(np.where(F <= 0.5, F, 1.0 - S), 0.0, 1.0)
    return float(val) if val.ndim == 0 else val


def _inversion_integral(p: MeixnerParams, t: float, x: float, cfg: QuadConfig) -> complex:
    """``(1 / 2 pi) int exp(t psi(u) - i u x) du`` with exact exponential tails."""
    dt = p.delta * t
    a = dt * p.alpha
    xs = x - p.mu * t
    cut = 40.0 / p.alpha

    def integrand(u):
        return char_function(p, u, t) * np.exp(-1j * u * x)

    res = integrate_finite(integrand, -cut, cut, cfg, points=[0.0])
    if not res.converged:
        raise ConvergenceFailure(f"Fourier inversion did not converge ({res.error_estimate:.3g})")
    # beyond |u| = cut the characteristic function equals its asymptote to ~1e-17
    amp = (2.0 * math.cos(p.beta / 2.0)) ** (2.0 * dt)
    right = amp * np.exp(1j * p.beta * dt) * np.exp(-(a + 1j * xs) * cut) / (a + 1j * xs)
    total = res.value + right + np.conj(right)
    return complex(total) / (2.0 * math.pi)


def pdf_by_inversion(p: MeixnerParams, t: float, x, cfg: QuadConfig | None = None):
    """Density of ``M_t`` by Fourier inversion of the characteristic function."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    cfg = cfg or DISTRIBUTION_CONFIG.with_tol(1e-10, 1e-12)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.array([_inversion_integral(p, t, xi, cfg).real for xi in xs])
    return float(vals[0]) if np.ndim(x) == 0 else vals.reshape(np.shape(x))


def inversion_residue(p: MeixnerParams, t: float, x: float, cfg: QuadConfig | None = None) -> float:
    """Imaginary part left over by the inversion integral (zero in exact arithmetic)."""
    cfg = cfg or DISTRIBUTION_CONFIG.with_tol(1e-10, 1e-12)
    return _inversion_integral(p, t, float(x), cfg).imag


def cumulants(p: MeixnerParams, t: float = 1.0) -> Cumulants:
    """Mean, variance, skewness and kurtosis (not excess) of ``M_t``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    dt = p.delta * t
    half = p.beta / 2.0
    return Cumulants(
        mean=p.mu * t + dt * p.alpha * math.tan(half),
        variance=dt / 2.0 * p.alpha**2 / math.cos(half) ** 2,
        skewness=math.sqrt(2.0 / dt) * math.sin(half),
        kurtosis=3.0 + (2.0 - math.cos(p.beta)) / dt,
    )


def levy_khinchin_integrand(p: MeixnerParams, u: float, z):
    """``delta (exp(i u z) - 1 - i u z) exp(beta z / alpha) / (z sinh(pi z / alpha))``.

    The singularity at ``z = 0`` is removable; below ``|z| < 1e-6 / scale`` the
    limit ``-u**2 delta alpha / (2 pi)`` is returned (the O(z) correction there
    is below 1e-6 relative and covers a negligible stretch of the integral).
    """
    z = np.asarray(z, dtype=float)
    b = p.beta / p.alpha
    scale = max(abs(u), abs(b), math.pi / p.alpha)
    limit = -(u**2) * p.delta * p.alpha / (2.0 * math.pi)
    az = np.abs(z)
    safe = np.where(az == 0, 1.0, az)
    uz = u * z
    # exp(iuz) - 1 - iuz without cancellation in the real part
    kernel = -2.0 * np.sin(uz / 2.0) ** 2 + 1j * (np.sin(uz) - uz)
    val = p.delta * kernel * _exp_over_sinh(np.sign(z) * b, safe, p.alpha) / safe
    val = np.where(az < 1e-6 / scale, limit, val)
    return complex(val) if val.ndim == 0 else val


def char_exponent_by_levy_khinchin(
    p: MeixnerParams, u: float, cfg: QuadConfig | None = None
) -> complex:
    """Characteristic exponent from the Levy-Khinchin integral over the Meixner Levy measure."""
    u = float(u)
    if u == 0.0:
        return 0j
    cfg = cfg or DISTRIBUTION_CONFIG.with_tol(1e-11, 1e-11)
    rate = (math.pi - abs(p.beta)) / p.alpha
    zmax = (45.0 + math.log1p(abs(u) * p.alpha + p.delta)) / rate
    # fold the negative half-line onto the positive one
    def folded(z):
        return levy_khinchin_integrand(p, u, z) + levy_khinchin_integrand(p, u, -z)

    res = integrate_finite(folded, 0.0, zmax, cfg)
    if not res.converged:
        raise ConvergenceFailure(f"Levy-Khinchin integral did not converge ({res.error_estimate:.3g})")
    return 1j * u * drift_theta(p) + complex(res.value)


def affine_transform(p: MeixnerParams, c: float, m: float) -> MeixnerParams:
    """Law of ``c X + m`` for ``X ~ M(alpha, beta, delta, mu)`` and ``c > 0``."""
    if not c > 0:
        raise DomainError(f"scale factor must be positive, got {c}")
    return MeixnerParams(c * p.alpha, p.beta, p.delta, c * p.mu + m)


def convolve(p1: MeixnerParams, p2: MeixnerParams) -> MeixnerParams:
    """Law of the sum of independent ``M(alpha, beta, delta_i, mu_i)`` variables."""
    if p1.alpha != p2.alpha or p1.beta != p2.beta:
        raise IncompatibleParams(
            f"convolution needs equal alpha and beta, got ({p1.alpha}, {p1.beta}) and ({p2.alpha}, {p2.beta})"
        )
    return MeixnerParams(p1.alpha, p1.beta, p1.delta + p2.delta, p1.mu + p2.mu)


def fit_by_moments(
    mean: float, variance: float, skewness: float, kurtosis: float, t: float = 1.0
) -> MeixnerParams:
    """Invert the moment formulas of ``M_t`` to time-one parameters.

    Feasible moments satisfy ``kurtosis > 3 + skewness**2`` and
    ``3 skewness**2 < 2 (kurtosis - 3)``; the second condition keeps
    ``|beta| < pi``.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if not variance > 0:
        raise InfeasibleMoments(f"variance must be positive, got {variance}")
    excess = kurtosis - 3.0
    gap = excess - skewness**2
    if not gap > 0:
        raise InfeasibleMoments(
            f"kurtosis {kurtosis} must exceed 3 + skewness^2 = {3.0 + skewness**2}"
        )
    dt = 1.0 / gap
    cos_beta = 2.0 - excess * dt
    if not cos_beta > -1.0:
        raise InfeasibleMoments(
            f"skewness {skewness} too large for kurtosis {kurtosis}: |beta| would reach pi"
        )
    # sin(beta/2) = skewness sqrt(dt/2) is well conditioned for small |beta|,
    # cos(beta) from the kurtosis for |beta| near pi
    half_sin = skewness * math.sqrt(dt / 2.0)
    if abs(half_sin) < 0.7:
        beta = 2.0 * math.asin(half_sin)
    else:
        beta = math.copysign(math.acos(min(cos_beta, 1.0)), skewness)
    alpha = math.sqrt(2.0 * variance / dt) * math.cos(beta / 2.0)
    mu_t = mean - dt * alpha * math.tan(beta / 2.0)
    return MeixnerParams(alpha, beta, dt / t, mu_t / t)
