"""Monte Carlo oracle: exact-law sampling of period log-returns and cliquet payoffs.

Draws are produced by inverse-CDF sampling.  The quantile function is a
monotone cubic (PCHIP) interpolant of ``x`` against ``logit F(x)`` on an
adaptively refined grid; the logit is linear in ``x`` in both exponential
tails, which keeps the interpolant accurate far out, and beyond the grid the
analytic exponential tails of the density are inverted in closed form.

Uniforms come as ``u = (k + 1/2) / 2^52`` with ``k`` a 52-bit integer, so that
``log u`` and ``log(1 - u)`` are both exact and the far right tail is as well
resolved as the left.  Work is split into fixed blocks; block ``b`` draws from
its own Philox substream keyed by ``(seed, b)``.  Every estimate is therefore
bit-for-bit identical for any number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .cliquet import CliquetContract, floor_value
from .errors import ConvergenceFailure, DomainError
from .market import GeometricMeixnerModel, PeriodLaw, period_law
from .meixner import law_breakpoints, law_support, pdf
from .quadrature import DISTRIBUTION_CONFIG, QuadConfig, integrate_intervals

__all__ = [
    "SamplerTable",
    "McEstimate",
    "build_sampler",
    "invert",
    "sample_y",
    "mc_expectation",
    "mc_expected_z1",
    "mc_price",
    "mc_price_batch",
]

_BITS = 52
_SPAN = float(2**_BITS)
# draws per block; fixed so that results do not depend on the worker count
BLOCK = 1 << 16


@dataclass(frozen=True)
class SamplerTable:
    """Quantile table of one period law.

    ``x`` and ``cdf`` are the grid; ``logit`` holds ``log F - log(1 - F)``
    computed from the left and right cumulative masses separately.
    ``tail_exponents`` are ``((beta + pi)/alpha, (beta - pi)/alpha)``: the
    density behaves like ``exp(e x)`` with the first exponent on the left and
    the second on the right.
    """

    law: PeriodLaw
    x: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)
    logit: np.ndarray = field(repr=False)
    tail_exponents: tuple
    log_left_mass: float
    log_right_mass: float
    max_inversion_error: float
    _quantile: PchipInterpolator = field(repr=False, compare=False)

    def __hash__(self):
        return hash((self.law, self.x.size, self.log_left_mass, self.log_right_mass))

    def __eq__(self, other):
        return self is other


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    paths: int
    seed: int

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "paths": self.paths, "seed": self.seed}


def _masses(p, xs, cfg):
    """``(F(xs), 1 - F(xs))`` for sorted ``xs`` inside the support.

    The panels reach 40 e-folds past :func:`law_support`, so that the mass
    beyond the support (about 1e-17) does not spoil ``F`` relative to its size
    near the ends of the grid.
    """
    lo, hi = law_support(p, 1.0)
    ext_lo = lo - 40.0 * p.alpha / (math.pi + p.beta)
    ext_hi = hi + 40.0 * p.alpha / (math.pi - p.beta)
    edges = np.unique(np.concatenate([[ext_lo, ext_hi], law_breakpoints(p, 1.0), xs]))
    values, _, res = integrate_intervals(lambda v: pdf(p, 1.0, v), edges, cfg)
    if not res.converged:
        raise ConvergenceFailure(f"cdf quadrature did not converge ({res.error_estimate:.3g})")
    left = np.concatenate([[0.0], np.cumsum(values)])
    right = np.concatenate([np.cumsum(values[::-1])[::-1], [0.0]])
    idx = np.searchsorted(edges, xs)
    return left[idx], right[idx]


def _logit_grid(p, xs, cfg):
    order = np.argsort(xs)
    F, S = np.empty(xs.size), np.empty(xs.size)
    F[order], S[order] = _masses(p, xs[order], cfg)
    return np.log(F) - np.log(S), F, S


def _increasing(lg):
    """Mask of finite points whose logit strictly exceeds every earlier kept one.

    Points closer together than the quadrature can resolve would give a flat
    or reversed step; they are dropped.
    """
    keep = np.isfinite(lg)
    top = -math.inf
    for i in np.flatnonzero(keep):
        if lg[i] > top:
            top = lg[i]
        else:
            keep[i] = False
    return keep


def build_sampler(
    law: PeriodLaw,
    resolution: int = 4096,
    tol: float = 1e-9,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
    max_rounds: int = 40,
) -> SamplerTable:
    """Quantile table for ``law`` with interpolation error in ``x`` below ``tol``.

    The grid starts from ``resolution`` uniform points plus the density's
    breakpoints and is bisected wherever the interpolant, evaluated at the
    exact logit of a midpoint, misses that midpoint by more than ``tol``.
    """
    if resolution < 256:
        raise DomainError(f"resolution must be at least 256, got {resolution}")
    p = law.params
    lo, hi = law_support(p, 1.0)
    xs = np.unique(np.concatenate([law_breakpoints(p, 1.0), np.linspace(lo, hi, resolution)]))
    xs = xs[(xs > lo) & (xs < hi)]
    worst = math.inf
    for _ in range(max_rounds):
        mids = 0.5 * (xs[:-1] + xs[1:])
        both = np.concatenate([xs, mids])
        lg, F, S = _logit_grid(p, both, cfg)
        lg_x, lg_m = lg[: xs.size], lg[xs.size :]
        keep = _increasing(lg_x)
        quantile = PchipInterpolator(lg_x[keep], xs[keep], extrapolate=False)
        inside = np.isfinite(lg_m) & (lg_m > lg_x[keep][0]) & (lg_m < lg_x[keep][-1])
        miss = np.zeros(mids.size)
        miss[inside] = np.abs(quantile(lg_m[inside]) - mids[inside])
        worst = float(np.max(miss))
        bad = miss > tol
        if not np.any(bad):
            break
        # neighbours too: uneven spacing degrades the interpolant's slopes next door
        bad[1:] |= bad[:-1].copy()
        bad[:-1] |= bad[1:].copy()
        xs = np.unique(np.concatenate([xs[keep], mids[bad]]))
    else:
        raise ConvergenceFailure(f"quantile table did not reach {tol:g} (worst miss {worst:.3g})")
    xs, lg = xs[keep], lg_x[keep]
    F, S = F[: keep.size][keep], S[: keep.size][keep]
    return SamplerTable(
        law=law,
        x=xs,
        cdf=F,
        logit=lg,
        tail_exponents=((p.beta + math.pi) / p.alpha, (p.beta - math.pi) / p.alpha),
        log_left_mass=float(math.log(F[0])),
        log_right_mass=float(math.log(S[-1])),
        max_inversion_error=worst,
        _quantile=PchipInterpolator(lg, xs, extrapolate=False),
    )


def _invert_logit(table: SamplerTable, lg: np.ndarray) -> np.ndarray:
    out = np.empty(lg.shape)
    first, last = table.logit[0], table.logit[-1]
    left = lg < first
    right = lg > last
    mid = ~(left | right)
    out[mid] = table._quantile(lg[mid])
    rate_left, rate_right = table.tail_exponents
    # F(x) ~ F(x0) exp(rate_left (x - x0)) below the grid, S(x) ~ S(x1) exp(rate_right (x - x1)) above
    log_p = -np.logaddexp(0.0, -lg[left])
    out[left] = table.x[0] + (log_p - table.log_left_mass) / rate_left
    log_q = -np.logaddexp(0.0, lg[right])
    out[right] = table.x[-1] + (log_q - table.log_right_mass) / rate_right
    return out


def invert(table: SamplerTable, prob):
    """Quantile ``F^{-1}(prob)`` for ``prob`` in ``(0, 1)``."""
    pr = np.asarray(prob, dtype=float)
    if np.any(~((pr > 0) & (pr < 1))):
        raise DomainError("probabilities must lie strictly between 0 and 1")
    val = _invert_logit(table, np.log(pr) - np.log1p(-pr))
    return float(val) if val.ndim == 0 else val


def _block_draws(table: SamplerTable, seed: int, block: int, size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))
    k = rng.integers(0, 2**_BITS, size=size, dtype=np.int64).astype(float)
    lg = np.log(k + 0.5) - np.log(_SPAN - k - 0.5)
    return _invert_logit(table, lg)


def _run_blocks(task: Callable[[int, int], object], sizes: Sequence[int], workers: int):
    """``[task(b, sizes[b]) for b]`` in block order, optionally on a thread pool."""
    if workers is None or workers < 1:
        raise DomainError(f"workers must be a positive integer, got {workers!r}")
    if workers == 1:
        return [task(b, s) for b, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(len(sizes)), sizes))


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise DomainError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)


def _check_count(count, name):
    if isinstance(count, bool) or not isinstance(count, (int, np.integer)) or count < 1:
        raise DomainError(f"{name} must be a positive integer, got {count!r}")
    return int(count)


def _split(total: int, block: int):
    full, rest = divmod(total, block)
    return [block] * full + ([rest] if rest else [])


def sample_y(table: SamplerTable, count: int, seed: int, workers: int = 1) -> np.ndarray:
    """``count`` i.i.d. draws from the period law, deterministic in ``(seed, count)``."""
    count = _check_count(count, "count")
    seed = _check_seed(seed)
    parts = _run_blocks(lambda b, s: _block_draws(table, seed, b, s), _split(count, BLOCK), workers)
    return np.concatenate(parts)


class _Moments:
    """Count, mean and centred sum of squares; merged in a fixed order."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self, values=None):
        if values is None:
            self.n, self.mean, self.m2 = 0, 0.0, 0.0
        else:
            self.n = values.size
            self.mean = float(np.mean(values))
            self.m2 = float(np.sum((values - self.mean) ** 2))

    def merge(self, other: "_Moments") -> "_Moments":
        if other.n == 0:
            return self
        n = self.n + other.n
        d = other.mean - self.mean
        self.mean += d * other.n / n
        self.m2 += other.m2 + d * d * self.n * other.n / n
        self.n = n
        return self

    def estimate(self, scale: float, paths: int, seed: int) -> McEstimate:
        var = self.m2 / (self.n - 1) if self.n > 1 else 0.0
        return McEstimate(scale * self.mean, scale * math.sqrt(var / self.n), paths, seed)


def _reduce(parts):
    acc = _Moments()
    for part in parts:
        acc.merge(part)
    return acc


@lru_cache(maxsize=16)
def _table(law: PeriodLaw, resolution: int) -> SamplerTable:
    return build_sampler(law, resolution)


def mc_expectation(
    table: SamplerTable, fn: Callable[[np.ndarray], np.ndarray], count: int, seed: int, workers: int = 1
) -> McEstimate:
    """Sample mean of ``fn(Y)`` with its standard error."""
    count = _check_count(count, "count")
    seed = _check_seed(seed)

    def task(b, s):
        return _Moments(np.asarray(fn(_block_draws(table, seed, b, s)), dtype=float))

    return _reduce(_run_blocks(task, _split(count, BLOCK), workers)).estimate(1.0, count, seed)


def mc_expected_z1(
    model: GeometricMeixnerModel,
    contract: CliquetContract,
    paths: int,
    seed: int,
    workers: int = 1,
    resolution: int = 4096,
) -> McEstimate:
    """Sample mean of ``Z_1 = min(c, e^Y - 1) - g/n``."""
    table = _table(period_law(model, contract.tau), resolution)
    c, shift = contract.local_cap_c, contract.guarantee_g / contract.resets_n
    return mc_expectation(table, lambda y: np.minimum(c, np.expm1(y)) - shift, paths, seed, workers)


def mc_price_batch(
    model: GeometricMeixnerModel,
    contracts: Sequence[CliquetContract],
    paths: int,
    seed: int,
    workers: int = 1,
    resolution: int = 4096,
) -> list:
    """Discounted mean payoffs of several contracts on shared return paths.

    All contracts must have the same resets and maturity; the same draws then
    serve every contract, so differences between the estimates are far less
    noisy than the estimates themselves.  Contracts with ``n c <= g`` return
    the floor with zero standard error.
    """
    paths = _check_count(paths, "paths")
    seed = _check_seed(seed)
    contracts = list(contracts)
    if not contracts:
        return []
    n, maturity = contracts[0].resets_n, contracts[0].maturity_t
    if any(k.resets_n != n or k.maturity_t != maturity for k in contracts):
        raise DomainError("contracts in a batch must share resets and maturity")
    live = [i for i, k in enumerate(contracts) if not k.degenerate]
    out: list = [None] * len(contracts)
    for i, k in enumerate(contracts):
        if k.degenerate:
            out[i] = McEstimate(floor_value(model, k), 0.0, paths, seed)
    if not live:
        return out
    table = _table(period_law(model, contracts[0].tau), resolution)
    caps = np.array([contracts[i].local_cap_c for i in live])
    shifts = np.array([contracts[i].guarantee_g / n for i in live])
    guarantees = np.array([contracts[i].guarantee_g for i in live])
    rows = max(1, BLOCK // n)

    def task(b, s):
        r = np.expm1(_block_draws(table, seed, b, s * n)).reshape(s, n)
        res = []
        for c, shift, g in zip(caps, shifts, guarantees):
            x = np.sum(np.minimum(c, r) - shift, axis=1)
            res.append(_Moments(1.0 + g + np.maximum(0.0, x)))
        return res

    parts = _run_blocks(task, _split(paths, rows), workers)
    disc = math.exp(-model.r * maturity)
    for j, i in enumerate(live):
        acc = _reduce(part[j] for part in parts)
        out[i] = acc.estimate(contracts[i].notional_k * disc, paths, seed)
    return out


def mc_price(
    model: GeometricMeixnerModel,
    contract: CliquetContract,
    paths: int,
    seed: int,
    workers: int = 1,
    resolution: int = 4096,
) -> McEstimate:
    """``K e^{-rT}`` times the sample mean of ``1 + g + max(0, sum_k Z_k)``."""
    return mc_price_batch(model, [contract], paths, seed, workers, resolution)[0]
