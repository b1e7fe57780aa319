"""Geometric Meixner stock model ``S_t = S_0 exp(M_t + b t)`` under a risk-neutral measure.

The drift ``b`` is pinned by requiring ``exp(-r t) S_t`` to be a martingale,
``b = r - psi(-i)``, which needs ``E[exp(M_1)] < inf``, i.e.
``|alpha + beta| < pi``.  Over a reset period of length ``tau`` the log-return
``Y_tau = M_tau + b tau`` is again Meixner distributed,
``M(alpha, beta, delta tau, (mu + b) tau)``, and the simple return is
``R = exp(Y_tau) - 1 > -1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DomainError, MomentExplosion
from .meixner import MeixnerParams, cdf, law_breakpoints, log_pdf
from .quadrature import DISTRIBUTION_CONFIG, QuadConfig, QuadResult, integrate_intervals

__all__ = [
    "GeometricMeixnerModel",
    "PeriodLaw",
    "martingale_drift_b",
    "period_law",
    "return_cdf",
    "expected_exp",
]


def martingale_drift_b(r: float, p: MeixnerParams) -> float:
    """``b = r - mu - 2 delta log(cos(beta/2) / cos((alpha + beta)/2))``."""
    half = (p.alpha + p.beta) / 2.0
    c = math.cos(half)
    if not (abs(p.alpha + p.beta) < math.pi and c > 0):
        raise MomentExplosion(
            f"E[exp(M_1)] is infinite: alpha + beta = {p.alpha + p.beta} is outside (-pi, pi)"
        )
    return r - p.mu - 2.0 * p.delta * math.log(math.cos(p.beta / 2.0) / c)


@dataclass(frozen=True)
class GeometricMeixnerModel:
    """Initial price, risk-free rate and risk-neutral law of ``M_1``.

    ``b`` is derived from ``(r, q_params)``; passing a value that disagrees
    with the martingale restriction is an error.
    """

    s0: float
    r: float
    q_params: MeixnerParams
    b: float | None = field(default=None)

    def __post_init__(self):
        for name in ("s0", "r"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not self.s0 > 0:
            raise DomainError(f"s0 must be positive, got {self.s0}")
        if self.r < 0:
            raise DomainError(f"r must be nonnegative, got {self.r}")
        if not isinstance(self.q_params, MeixnerParams):
            raise DomainError("q_params must be a MeixnerParams")
        b = martingale_drift_b(self.r, self.q_params)
        if self.b is not None and not math.isclose(self.b, b, rel_tol=1e-12, abs_tol=1e-15):
            raise DomainError(f"b = {self.b!r} violates the martingale restriction (expected {b!r})")
        object.__setattr__(self, "b", b)

    def to_dict(self) -> dict:
        return {"s0": self.s0, "r": self.r, **self.q_params.to_dict()}

    @classmethod
    def from_dict(cls, record: dict) -> "GeometricMeixnerModel":
        """Build from ``{s0, r, alpha, beta, delta, mu}``; a ``b`` entry is ignored."""
        keys = {"s0", "r", "alpha", "beta", "delta", "mu"}
        unknown = set(record) - keys - {"b"}
        if unknown:
            raise DomainError(f"unknown model keys: {sorted(unknown)}")
        missing = keys - set(record)
        if missing:
            raise DomainError(f"missing model keys: {sorted(missing)}")
        params = MeixnerParams.from_dict({k: record[k] for k in ("alpha", "beta", "delta", "mu")})
        return cls(record["s0"], record["r"], params)


@dataclass(frozen=True)
class PeriodLaw:
    """Law of the one-period log-return; ``params`` already include the period length."""

    params: MeixnerParams
    tau: float


def period_law(model: GeometricMeixnerModel, tau: float) -> PeriodLaw:
    """``Y_tau ~ M(alpha, beta, delta tau, (mu + b) tau)``."""
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    q = model.q_params
    return PeriodLaw(MeixnerParams(q.alpha, q.beta, q.delta * tau, (q.mu + model.b) * tau), float(tau))


def return_cdf(law: PeriodLaw, xi, cfg: QuadConfig = DISTRIBUTION_CONFIG):
    """``Q(R <= xi) = Q(Y_tau <= log(1 + xi))`` for ``xi > -1``."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(~(xi_arr > -1.0)):
        raise DomainError("returns are bounded below by -1; need xi > -1")
    return cdf(law.params, 1.0, np.log1p(xi_arr), cfg)


def expected_exp(law: PeriodLaw, cfg: QuadConfig = DISTRIBUTION_CONFIG) -> QuadResult:
    """``E[exp(Y_tau)]`` by quadrature of ``exp(u) f(u)``; equals ``exp(r tau)`` under the model."""
    p = law.params
    edges = law_breakpoints(p, 1.0, tilt=1.0)
    _, _, res = integrate_intervals(lambda u: np.exp(u + log_pdf(p, 1.0, u)), edges, cfg)
    if not res.converged:
        raise ConvergenceFailure(f"E[exp(Y)] quadrature did not converge ({res.error_estimate:.3g})")
    return res
