"""Sum-cap cliquet pricing under the geometric Meixner model.

The contract pays ``K (1 + g + max(0, sum_k Z_k))`` at ``T`` with i.i.d.
``Z_k = min(c, R_k) - g/n`` over ``n`` equal reset periods of length
``tau = T / n``.  Two Fourier routes are implemented:

* the distribution method, ``E[X^+] = E[X]/2 + (1/pi) int_0^inf (1 - Re phi_X(x)) / x^2 dx``;
* the Fourier-transform method, built on ``V = n c - sum_k min(c, R_k) >= 0``
  and the transform of ``v -> (rho - v)^+`` on ``v >= 0``, ``rho = n c - g``.

``V`` has an atom at 0 of mass ``Q(R >= c)^n``, where the payoff kernel jumps
from 0 to ``rho``.  Fourier inversion returns the midpoint of that jump, so the
half-line integral is doubled and ``rho Q(R >= c)^n / 2`` is added back.

Characteristic functions of ``Z_1`` are evaluated from one fixed product rule
in the log-return ``u`` (nodes graded to the density spike and fine enough for
the largest frequency needed), so that many ``x`` values cost one matrix
product.  Beyond a truncation point the outer integrands are replaced by their
large-``x`` asymptotics, ``phi_Z(x) ~ e^{i rho x} (p + q / (i x) + ...)^n`` with
``p = Q(R >= c)`` and ``q = f(log(1 + c)) / (1 + c)``, integrated in closed form
through sine and cosine integrals.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import sici

from .errors import ConvergenceFailure, DomainError
from .market import GeometricMeixnerModel, PeriodLaw, period_law
from .meixner import MeixnerParams, cdf_and_survival, char_function, law_breakpoints, law_support, pdf
from .quadrature import (
    DISTRIBUTION_CONFIG,
    PRICING_CONFIG,
    QuadConfig,
    gauss_legendre_rule,
    integrate_finite,
    integrate_intervals,
    integrate_semi_infinite,
)

__all__ = [
    "CliquetContract",
    "PriceReport",
    "phi_z1",
    "phi_z",
    "phi_z1_distribution_form",
    "expected_z1_quadrature",
    "expected_z1_dampened_fourier",
    "price_distribution_method",
    "price_fourier_method",
    "fourier_price_integrand",
    "floor_value",
]

# below this frequency the outer integrands are replaced by their x -> 0 limits
_PATCH = 1e-3


@dataclass(frozen=True)
class CliquetContract:
    """Notional ``K``, global guarantee ``g``, local cap ``c``, ``n`` resets, maturity ``T``."""

    notional_k: float
    guarantee_g: float
    local_cap_c: float
    resets_n: int
    maturity_t: float

    def __post_init__(self):
        for name in ("notional_k", "guarantee_g", "local_cap_c", "maturity_t"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        n = self.resets_n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise DomainError(f"resets_n must be an integer >= 1, got {n!r}")
        object.__setattr__(self, "resets_n", int(n))
        if not self.notional_k > 0:
            raise DomainError(f"notional_k must be positive, got {self.notional_k}")
        if self.local_cap_c < 0:
            raise DomainError(f"local_cap_c must be nonnegative, got {self.local_cap_c}")
        if not self.maturity_t > 0:
            raise DomainError(f"maturity_t must be positive, got {self.maturity_t}")

    @property
    def tau(self) -> float:
        return self.maturity_t / self.resets_n

    @property
    def rho(self) -> float:
        """Largest attainable ``sum Z_k``, ``n c - g``."""
        return self.resets_n * self.local_cap_c - self.guarantee_g

    @property
    def degenerate(self) -> bool:
        """``n c <= g``: the sum never exceeds zero and only the floor is paid."""
        return self.rho <= 0

    def to_dict(self) -> dict:
        return {
            "notional": self.notional_k,
            "guarantee": self.guarantee_g,
            "cap": self.local_cap_c,
            "resets": self.resets_n,
            "maturity": self.maturity_t,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "CliquetContract":
        keys = ("notional", "guarantee", "cap", "resets", "maturity")
        unknown = set(record) - set(keys)
        if unknown:
            raise DomainError(f"unknown contract keys: {sorted(unknown)}")
        missing = set(keys) - set(record)
        if missing:
            raise DomainError(f"missing contract keys: {sorted(missing)}")
        return cls(*(record[k] for k in keys))


@dataclass(frozen=True)
class PriceReport:
    price: float
    method: str
    e_z1: float
    integral_term: float
    error_estimate: float
    settings: QuadConfig
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("price", "e_z1", "integral_term", "error_estimate"):
            object.__setattr__(self, name, float(getattr(self, name)))
        clean = {k: float(v) if isinstance(v, np.floating) else v for k, v in self.details.items()}
        object.__setattr__(self, "details", clean)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["settings"] = asdict(self.settings)
        return out


def floor_value(model: GeometricMeixnerModel, contract: CliquetContract) -> float:
    """Guaranteed part ``K exp(-r T) (1 + g)``."""
    return contract.notional_k * math.exp(-model.r * contract.maturity_t) * (1.0 + contract.guarantee_g)


def _law(model: GeometricMeixnerModel, contract: CliquetContract) -> PeriodLaw:
    return period_law(model, contract.tau)


class _Z1Rule:
    """Fixed quadrature rule for expectations of functions of ``min(c, R)`` below the cap.

    Nodes ``u_j`` cover ``(-inf, log(1 + c))``; ``weights`` already contain the
    density.  The remaining mass ``1 - sum(weights)`` is the atom at the cap.
    """

    def __init__(self, p: MeixnerParams, cap: float, shift: float, xmax: float, cfg: QuadConfig):
        self.params = p
        self.cap = cap
        self.shift = shift
        self.xmax = xmax
        self.log_cap = math.log1p(cap)
        lo, hi = law_support(p, 1.0)
        top = min(self.log_cap, hi)
        if top <= lo:
            raise DomainError("the cap lies below the numerical support of the return law")
        edges = law_breakpoints(p, 1.0, lo=lo, hi=top)
        # check the panels resolve the density itself
        _, _, res = integrate_intervals(lambda u: pdf(p, 1.0, u), edges, cfg)
        if not res.converged:
            raise ConvergenceFailure(f"return-law quadrature did not converge ({res.error_estimate:.3g})")
        # split panels so the phase x e^u advances by at most pi per panel at x = xmax
        a, b = edges[:-1], edges[1:]
        pieces = np.maximum(1, np.ceil(xmax * (np.exp(b) - np.exp(a)) / math.pi)).astype(int)
        fine = [np.linspace(ai, bi, k + 1) for ai, bi, k in zip(a, b, pieces)]
        fa = np.concatenate([f[:-1] for f in fine])
        fb = np.concatenate([f[1:] for f in fine])
        x, w = gauss_legendre_rule(cfg.order)
        half = 0.5 * (fb - fa)
        nodes = (0.5 * (fa + fb))[:, None] + half[:, None] * x
        weights = half[:, None] * w * pdf(p, 1.0, nodes)
        self.nodes = nodes.ravel()
        self.weights = weights.ravel()
        self.below_mass = math.fsum(self.weights)
        self.mass_error = res.error_estimate
        # Z_1 values at the nodes and at the atom
        self.z_nodes = np.expm1(self.nodes) - shift
        self.z_atom = cap - shift
        # atom mass from the right tail, accurate even when tiny
        if self.log_cap < hi:
            _, s = cdf_and_survival(p, 1.0, np.array([self.log_cap]), cfg)
            self.atom = float(s[0])
        else:
            self.atom = 0.0
        # endpoint values of g(w) = f(log w) / w at w = 1 + c, for the large-x expansion
        if self.log_cap < hi:
            w1 = 1.0 + cap
            h = 1e-5 * w1
            g = lambda w: pdf(p, 1.0, math.log(w)) / w
            self.boundary_q = g(w1)
            self.boundary_dq = (g(w1 + h) - g(w1 - h)) / (2.0 * h)
        else:
            self.boundary_q = self.boundary_dq = 0.0

    def phi(self, x) -> np.ndarray:
        """Characteristic function of ``Z_1`` at real ``x`` (array)."""
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        if np.max(np.abs(flat), initial=0.0) > self.xmax * (1 + 1e-12):
            raise DomainError(f"rule built for |x| <= {self.xmax}, got {np.max(np.abs(flat))}")
        out = np.empty(flat.shape, dtype=complex)
        block = max(1, 4_000_000 // max(1, self.nodes.size))
        for s in range(0, flat.size, block):
            xs = flat[s : s + block]
            phase = xs[:, None] * self.z_nodes[None, :]
            cont = np.cos(phase) @ self.weights + 1j * (np.sin(phase) @ self.weights)
            out[s : s + block] = (1.0 - self.below_mass) * np.exp(1j * xs * self.z_atom) + cont
        out[flat == 0] = 1.0
        return out.reshape(x.shape)

    def moments(self):
        """``E[Z_1]`` and ``E[Z_1^2]`` under the rule."""
        atom = 1.0 - self.below_mass
        m1 = math.fsum(self.weights * self.z_nodes) + atom * self.z_atom
        m2 = math.fsum(self.weights * self.z_nodes**2) + atom * self.z_atom**2
        return m1, m2


@lru_cache(maxsize=32)
def _rule(p: MeixnerParams, cap: float, shift: float, xmax: float, cfg: QuadConfig) -> _Z1Rule:
    return _Z1Rule(p, cap, shift, xmax, cfg)


def _xmax_bucket(x: float) -> float:
    return float(2.0 ** math.ceil(math.log2(max(x, 1.0))))


def _rule_for(model, contract, xmax, cfg=DISTRIBUTION_CONFIG) -> _Z1Rule:
    law = _law(model, contract)
    shift = contract.guarantee_g / contract.resets_n
    return _rule(law.params, contract.local_cap_c, shift, _xmax_bucket(xmax), cfg)


def phi_z1(model: GeometricMeixnerModel, contract: CliquetContract, x):
    """Characteristic function of ``Z_1 = min(c, R) - g/n``.

    ``e^{-ixg/n} (e^{ixc} + int_{-inf}^{log(1+c)} [e^{ix(e^u - 1)} - e^{ixc}] f(u) du)``.
    """
    x_arr = np.asarray(x, dtype=float)
    rule = _rule_for(model, contract, float(np.max(np.abs(x_arr), initial=1.0)))
    val = rule.phi(x_arr)
    return complex(val) if val.ndim == 0 else val


def phi_z(model: GeometricMeixnerModel, contract: CliquetContract, x):
    """``phi_Z1(x)^n``, the characteristic function of ``sum_k Z_k``."""
    val = np.asarray(phi_z1(model, contract, x)) ** contract.resets_n
    return complex(val) if val.ndim == 0 else val


def expected_z1_quadrature(
    model: GeometricMeixnerModel, contract: CliquetContract, cfg: QuadConfig = DISTRIBUTION_CONFIG
) -> float:
    """``E[Z_1] = c - g/n + int_{-inf}^{log(1+c)} (e^u - 1 - c) f(u) du``.

    The integrand is nonpositive, so the result never exceeds ``c - g/n``.
    """
    return _expected_z1(model, contract, cfg)[0]


def _expected_z1(model, contract, cfg):
    p = _law(model, contract).params
    c = contract.local_cap_c
    top = math.log1p(c)
    lo, hi = law_support(p, 1.0)
    upper = c - contract.guarantee_g / contract.resets_n
    if top <= lo:
        return upper, 0.0
    edges = law_breakpoints(p, 1.0, lo=lo, hi=min(top, hi))
    _, _, res = integrate_intervals(lambda u: (np.expm1(u) - c) * pdf(p, 1.0, u), edges, cfg)
    if not res.converged:
        raise ConvergenceFailure(f"E[Z_1] quadrature did not converge ({res.error_estimate:.3g})")
    # the integrand is nonpositive; clip rounding noise at the bound
    return min(upper + float(res.value), upper), res.error_estimate


def expected_z1_dampened_fourier(
    model: GeometricMeixnerModel,
    contract: CliquetContract,
    damp: float,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
) -> float:
    """``E[Z_1]`` from the transform of the damped put ``(1 + c - e^u)^+``.

    ``c - g/n - (1/pi) int_0^inf Re[(1+c)^{1+d+iy} phi_Y(i d - y) / ((d+iy)(1+d+iy))] dy``
    with dampening ``d > 0``; ``phi_Y(i d - y)`` must lie in the continuation
    strip ``|alpha d - beta| < pi``.
    """
    if not damp > 0:
        raise DomainError(f"damp must be positive, got {damp}")
    law = _law(model, contract)
    p = law.params
    c = contract.local_cap_c
    char_function(p, 1j * damp, 1.0)  # raises BranchError outside the strip
    log_k = math.log1p(c)

    def integrand(y):
        s = damp + 1j * y
        val = np.exp((1.0 + s) * log_k) * char_function(p, 1j * damp - y, 1.0) / (s * (1.0 + s))
        return val.real

    # |phi_Y(i d - y)| <= e^{-d m} (cos(beta/2) / sinh(alpha y / 2))^{2 delta} with m the location
    amp = math.exp((1.0 + damp) * log_k - damp * p.mu)

    def tail(y_cut):
        return 0.0, amp * (math.cos(p.beta / 2.0) / math.sinh(p.alpha * y_cut / 2.0)) ** (2.0 * p.delta) / y_cut

    res = integrate_semi_infinite(integrand, 0.0, 1.0, cfg, tail=tail)
    if not res.converged:
        raise ConvergenceFailure(f"damped Fourier integral did not converge ({res.error_estimate:.3g})")
    return c - contract.guarantee_g / contract.resets_n - float(res.value) / math.pi


def phi_z1_distribution_form(
    model: GeometricMeixnerModel,
    contract: CliquetContract,
    x: float,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
) -> complex:
    """Characteristic function of ``Z_1`` from the law of ``e^{Y}`` split at 1 and ``1 + c``.

    ``e^{-ix(1+g/n)} (e^{ix(1+c)} Q(Y > log(1+c)) + int_{-inf}^0 e^{ix e^u} f du
    + int_0^{log(1+c)} e^{ix e^u} f du)``.  Independent of :func:`phi_z1`: adaptive
    quadrature per ``x`` and the survival function for the atom.
    """
    x = float(x)
    if x == 0.0:
        return 1.0 + 0j
    p = _law(model, contract).params
    c = contract.local_cap_c
    top = math.log1p(c)
    lo, hi = law_support(p, 1.0)

    def integrand(u):
        return np.exp(1j * x * np.exp(u)) * pdf(p, 1.0, u)

    total = 0j
    for a, b in ((lo, min(0.0, hi)), (max(0.0, lo), min(top, hi))):
        if b <= a:
            continue
        pts = law_breakpoints(p, 1.0, lo=a, hi=b)
        # at least one panel per half oscillation of e^{ix e^u}
        extra = np.log(np.linspace(math.exp(a), math.exp(b), int(abs(x) * (math.exp(b) - math.exp(a)) / math.pi) + 2))
        res = integrate_finite(integrand, a, b, cfg, points=np.concatenate([pts, extra]))
        if not res.converged:
            raise ConvergenceFailure(f"distribution-form quadrature did not converge ({res.error_estimate:.3g})")
        total += complex(res.value)
    if top < hi:
        _, s = cdf_and_survival(p, 1.0, np.array([top]), cfg)
        atom = float(s[0])
    else:
        atom = 0.0
    total += np.exp(1j * x * (1.0 + c)) * atom
    return complex(np.exp(-1j * x * (1.0 + contract.guarantee_g / contract.resets_n)) * total)


def _theta_minus_sin(theta):
    """``theta - sin(theta)`` without cancellation."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-2
    t = np.where(small, theta, 0.0)
    series = t**3 / 6.0 * (1.0 - t**2 / 20.0 * (1.0 - t**2 / 42.0))
    return np.where(small, series, theta - np.sin(theta))


def fourier_price_integrand(model: GeometricMeixnerModel, contract: CliquetContract, y):
    """``Re[(1 + i y rho - e^{i y rho}) / (2 pi y^2) (1 + int [e^{iy(e^u-1-c)} - 1] f du)^n]``.

    The bracket is ``E[e^{-iyV}]`` with ``V = n c - sum min(c, R_k)``; the limit
    at ``y -> 0`` is ``rho^2 / (4 pi)``.
    """
    y = np.asarray(y, dtype=float)
    rho = contract.rho
    safe = np.where(y == 0, 1.0, y)
    rule = _rule_for(model, contract, float(np.max(np.abs(y), initial=1.0)))
    psi_v = rule.phi(y) ** contract.resets_n * np.exp(-1j * y * rho)
    theta = safe * rho
    kernel = (2.0 * np.sin(theta / 2.0) ** 2 + 1j * _theta_minus_sin(theta)) / safe**2
    val = (kernel * psi_v).real / (2.0 * math.pi)
    val = np.where(y == 0, rho**2 / (4.0 * math.pi), val)
    return float(val) if val.ndim == 0 else val


class _Asymptotics:
    """Large-``x`` form of ``phi_Z``.

    Integrating by parts at the cap, ``phi_Z1(x) e^{-i a x} = p + q/(ix) - q'/(ix)^2 + ...``
    with ``a = c - g/n``, ``q = g(1 + c)`` and ``q' = g'(1 + c)`` for
    ``g(w) = f(log w) / w``.  Raising to the ``n``-th power and keeping terms to
    ``x^-2`` gives ``e^{i rho x} (p^n + L/(ix) - B/x^2)``.
    """

    def __init__(self, rule: _Z1Rule, n: int, rho: float):
        p, q, dq = rule.atom, rule.boundary_q, rule.boundary_dq
        self.n = n
        self.rho = rho
        self.pn = p**n
        self.lead = n * p ** (n - 1) * q
        pair = 0.5 * n * (n - 1) * p ** (n - 2) * q * q if n > 1 else 0.0
        self.second = pair - n * p ** (n - 1) * dq

    def phi_z(self, x):
        return np.exp(1j * self.rho * x) * (self.pn + self.lead / (1j * x) - self.second / x**2)

    def exp_tails(self, X, kmax=4):
        """``E_k = int_X^inf e^{i rho x} x^-k dx`` for ``k = 1..kmax`` (index 0 unused)."""
        si, ci = sici(self.rho * X)
        out = [0j, complex(-ci, math.pi / 2.0 - si)]
        phase = complex(math.cos(self.rho * X), math.sin(self.rho * X))
        for k in range(2, kmax + 1):
            out.append(phase / ((k - 1) * X ** (k - 1)) + 1j * self.rho / (k - 1) * out[-1])
        return out

    def distribution_tail(self, X):
        """``int_X^inf (1 - Re phi_Z(x)) / x^2 dx`` under the asymptotic form."""
        E = self.exp_tails(X)
        return 1.0 / X - (self.pn * E[2] - 1j * self.lead * E[3] - self.second * E[4]).real

    def transform_tail(self, X):
        """``int_X^inf Re[h(y) psi_V(y)] dy`` with ``psi_V = phi_Z e^{-i rho y}`` asymptotic."""
        E = self.exp_tails(X)
        flat = self.pn / X - self.second / (3.0 * X**3) + self.rho * self.lead / X
        return flat - (self.pn * E[2] - 1j * self.lead * E[3] - self.second * E[4]).real


def _truncation(rule_builder, asym_builder, bound, tol, x_start=16.0, x_cap=2.0**16):
    """Smallest ``X`` (power of 2) beyond which ``phi_Z`` follows its asymptotic form.

    ``bound(r, X)`` turns the largest sampled ``|phi_Z - asym|`` on ``[X, 2X]``
    into a bound on the neglected tail integral (the residual decays at least
    like ``x^-3``).  Returns ``(X, rule, asym, tail_error)``.
    """
    X = x_start
    while True:
        rule = rule_builder(2.0 * X)
        asym = asym_builder(rule)
        xs = np.linspace(X, 2.0 * X, 257)
        resid = float(np.max(np.abs(rule.phi(xs) ** asym.n - asym.phi_z(xs))))
        err = bound(resid, X)
        if err <= tol or X >= x_cap:
            return X, rule, asym, err
        X *= 2.0


def _outer_edges(x0, X, rule, n, shift=0.0):
    """Initial panels: geometric from ``x0`` plus one panel per period of the fastest oscillation.

    ``phi_Z1(x)^n e^{-ix shift}`` oscillates at most like ``e^{ix (n z - shift)}``
    over the values ``z`` of ``Z_1`` that carry non-negligible mass.
    """
    heavy = rule.weights > 1e-14 * float(np.max(rule.weights))
    z = rule.z_nodes[heavy]
    if rule.atom > 1e-14:
        z = np.append(z, rule.z_atom)
    freq = max(1.0, float(np.max(np.abs(n * z - shift))))
    geo = x0 * 2.0 ** np.arange(0, 64)
    geo = geo[geo < X]
    step = 2.0 * math.pi / freq
    return np.unique(np.concatenate([geo, np.arange(0.0, X, step)[1:], [x0, X]]))


def price_distribution_method(
    model: GeometricMeixnerModel,
    contract: CliquetContract,
    cfg: QuadConfig = PRICING_CONFIG,
) -> PriceReport:
    """``K e^{-rT} (1 + g + (n/2) E[Z_1] + (1/pi) int_0^inf (1 - Re phi_Z(x)) / x^2 dx)``."""
    n = contract.resets_n
    disc = contract.notional_k * math.exp(-model.r * contract.maturity_t)
    inner_cfg = DISTRIBUTION_CONFIG
    e_z1, e_err = _expected_z1(model, contract, inner_cfg)
    if contract.degenerate:
        return PriceReport(
            price=floor_value(model, contract),
            method="distribution",
            e_z1=e_z1,
            integral_term=0.0,
            error_estimate=0.0,
            settings=cfg,
            details={"degenerate": True, "rho": contract.rho},
        )
    rho = contract.rho
    X, rule, asym, tail_err = _truncation(
        lambda xm: _rule_for(model, contract, xm, inner_cfg),
        lambda r: _Asymptotics(r, n, rho),
        lambda r, X: 2.0 * r / X,
        cfg.abs_tol,
    )
    m1, m2 = rule.moments()
    limit = 0.5 * (n * (m2 - m1 * m1) + (n * m1) ** 2)

    def integrand(x):
        return (1.0 - (rule.phi(x) ** n).real) / (x * x)

    patch_err = abs(float(integrand(np.array([_PATCH]))[0]) - limit) * _PATCH / 3.0
    _, _, body = integrate_intervals(integrand, _outer_edges(_PATCH, X, rule, n), cfg)
    if not body.converged:
        raise ConvergenceFailure(f"price integral did not converge ({body.error_estimate:.3g})")
    tail = asym.distribution_tail(X)
    integral = limit * _PATCH + float(body.value) + tail
    err_integral = body.error_estimate + patch_err + tail_err
    value = 1.0 + contract.guarantee_g + 0.5 * n * e_z1 + integral / math.pi
    error = disc * (0.5 * n * e_err + err_integral / math.pi + n * rule.mass_error)
    return PriceReport(
        price=disc * value,
        method="distribution",
        e_z1=e_z1,
        integral_term=integral / math.pi,
        error_estimate=error,
        settings=cfg,
        details={
            "degenerate": False,
            "rho": rho,
            "truncation": X,
            "tail_term": tail / math.pi,
            "patch_term": limit * _PATCH / math.pi,
            "second_moment": 2.0 * limit,
            "cap_probability": rule.atom,
            "evaluations": body.evaluations,
        },
    )


def price_fourier_method(
    model: GeometricMeixnerModel,
    contract: CliquetContract,
    cfg: QuadConfig = PRICING_CONFIG,
) -> PriceReport:
    """Price from the transform of ``(rho - V)^+`` with ``V = n c - sum min(c, R_k)``.

    ``E[(rho - V)^+] = (1/pi) int_0^inf Re[h(y) E e^{-iyV}] dy + (rho/2) Q(V = 0)``
    with ``h(y) = (1 + i y rho - e^{i y rho}) / y^2``.  The real part is split
    into ``Re[(1 - e^{iy rho}) E e^{-iyV}] / y^2`` and ``-rho Im[E e^{-iyV}] / y``;
    both are absolutely integrable and are integrated together as the real and
    imaginary parts of one complex integrand.
    """
    n = contract.resets_n
    disc = contract.notional_k * math.exp(-model.r * contract.maturity_t)
    inner_cfg = DISTRIBUTION_CONFIG
    e_z1, _ = _expected_z1(model, contract, inner_cfg)
    if contract.degenerate:
        return PriceReport(
            price=floor_value(model, contract),
            method="fourier",
            e_z1=e_z1,
            integral_term=0.0,
            error_estimate=0.0,
            settings=cfg,
            details={"degenerate": True, "rho": contract.rho},
        )
    rho = contract.rho
    X, rule, asym, tail_err = _truncation(
        lambda xm: _rule_for(model, contract, xm, inner_cfg),
        lambda r: _Asymptotics(r, n, rho),
        lambda r, X: r * (2.0 / X + rho),
        cfg.abs_tol,
    )
    m1, _ = rule.moments()
    mean_v = rho - n * m1

    def psi_v(y):
        return rule.phi(y) ** n * np.exp(-1j * y * rho)

    edges = _outer_edges(_PATCH, X, rule, n, rho)
    lim_a, lim_b = 0.5 * rho * rho - rho * mean_v, rho * mean_v

    def both(y):
        # real part carries the oscillatory piece, imaginary part the drift piece
        ps = psi_v(y)
        theta = y * rho
        part_a = (2.0 * np.sin(theta / 2.0) ** 2 * ps - 1j * np.sin(theta) * ps).real / (y * y)
        part_b = -rho * ps.imag / y
        return part_a + 1j * part_b

    vals, errs, res = integrate_intervals(both, edges, cfg)
    if not res.converged:
        raise ConvergenceFailure(f"transform integral did not converge ({res.error_estimate:.3g})")
    at_patch = complex(both(np.array([_PATCH]))[0])
    total = complex(np.sum(vals))
    pieces = {
        "oscillatory": (lim_a * _PATCH + total.real, abs(at_patch.real - lim_a) * _PATCH / 3.0),
        "drift": (lim_b * _PATCH + total.imag, abs(at_patch.imag - lim_b) * _PATCH / 3.0),
    }
    body_err = res.error_estimate

    tail = asym.transform_tail(X)
    atom = rule.atom**n
    integral = pieces["oscillatory"][0] + pieces["drift"][0] + tail
    excess = integral / math.pi + 0.5 * rho * atom
    # the complex integrand is conjugate-symmetric, so the imaginary parts at +-y cancel
    ys = np.linspace(_PATCH, X, 257)

    def full(y):
        return (1.0 + 1j * y * rho - np.exp(1j * y * rho)) / y**2 * psi_v(y)

    imag_residual = float(np.max(np.abs((full(ys) + full(-ys)).imag)))
    error = disc * (
        (body_err + pieces["oscillatory"][1] + pieces["drift"][1] + tail_err) / math.pi
        + n * rule.mass_error
    )
    return PriceReport(
        price=disc * (1.0 + contract.guarantee_g + excess),
        method="fourier",
        e_z1=e_z1,
        integral_term=excess,
        error_estimate=error,
        settings=cfg,
        details={
            "degenerate": False,
            "rho": rho,
            "truncation": X,
            "oscillatory_part": pieces["oscillatory"][0] / math.pi,
            "drift_part": pieces["drift"][0] / math.pi,
            "tail_term": tail / math.pi,
            "atom_correction": 0.5 * rho * atom,
            "imag_residual": imag_residual,
            "evaluations": res.evaluations,
        },
    )
