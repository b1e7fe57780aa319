"""Adaptive Gauss-Legendre quadrature on finite, semi-infinite and principal-value domains.

All integrands are vectorised: they receive a 1-d float array of nodes and return
an array of the same length (real or complex).  Every rule is open, so endpoint
singularities are never evaluated.

The error estimate of a panel is a multiple of the difference between an
``n``-point rule on the whole panel and the same rule on its two halves, plus a
rounding floor; the finer value is kept.
Refinement is global: the panels carrying the bulk of the error are bisected
until the summed estimate meets ``max(abs_tol, rel_tol * |value|)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ConvergenceFailure, DomainError, NonFiniteIntegrand

__all__ = [
    "QuadConfig",
    "QuadResult",
    "DISTRIBUTION_CONFIG",
    "PRICING_CONFIG",
    "integrate_finite",
    "integrate_intervals",
    "integrate_semi_infinite",
    "integrate_principal_value",
    "gauss_legendre_rule",
]

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and limits for one integration.

    ``truncation_tail_bound`` is the largest truncation error accepted when a
    semi-infinite integral is cut off; ``order`` is the Gauss-Legendre order of
    each panel rule.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 20000
    truncation_tail_bound: float = 1e-12
    order: int = 15

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if not self.truncation_tail_bound > 0:
            raise DomainError("truncation_tail_bound must be positive")
        if self.order < 2:
            raise DomainError("order must be at least 2")

    def tolerance(self, value) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))

    def with_tol(self, abs_tol: float, rel_tol: Optional[float] = None) -> "QuadConfig":
        return replace(self, abs_tol=abs_tol, rel_tol=self.rel_tol if rel_tol is None else rel_tol)


DISTRIBUTION_CONFIG = QuadConfig(abs_tol=1e-10, rel_tol=1e-9)
PRICING_CONFIG = QuadConfig(abs_tol=1e-8, rel_tol=1e-7)


@dataclass(frozen=True)
class QuadResult:
    value: complex | float
    error_estimate: float
    evaluations: int
    converged: bool


# halving gains a large factor on smooth panels but only ~2**(1 - p) next to
# an endpoint singularity like x**-p; end panels get the larger factor, which
# covers p up to about 0.7
_SAFETY = 2.0
_END_SAFETY = 4.5
# rounding floor relative to int |f| over the panel
_ROUNDOFF = 64.0 * np.finfo(float).eps

_RULES: dict[int, Tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point rule on ``[-1, 1]`` (cached)."""
    if n not in _RULES:
        _RULES[n] = np.polynomial.legendre.leggauss(n)
    return _RULES[n]


def _panel_pairs(f: Integrand, a: np.ndarray, b: np.ndarray, n: int):
    """Coarse and fine estimates for every panel ``[a_i, b_i]``."""
    x, w = gauss_legendre_rule(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    quarter = 0.5 * half
    # whole panel, left half, right half
    nodes = np.concatenate(
        [
            mid[:, None] + half[:, None] * x,
            (a + quarter)[:, None] + quarter[:, None] * x,
            (mid + quarter)[:, None] + quarter[:, None] * x,
        ],
        axis=1,
    )
    vals = np.asarray(f(nodes.ravel()))
    if vals.shape != (nodes.size,):
        vals = np.broadcast_to(vals, (nodes.size,))
    if not np.all(np.isfinite(vals)):
        bad = nodes.ravel()[~np.isfinite(vals)][0]
        raise NonFiniteIntegrand(f"integrand is not finite at x = {bad!r}")
    vals = vals.reshape(nodes.shape)
    coarse = half * (vals[:, :n] @ w)
    fine = quarter * (vals[:, n : 2 * n] @ w + vals[:, 2 * n :] @ w)
    mag = np.abs(quarter) * (np.abs(vals[:, n : 2 * n]) @ w + np.abs(vals[:, 2 * n :]) @ w)
    return coarse, fine, mag, nodes.size


def _panel_errors(coarse, fine, mag, at_end):
    safety = np.where(at_end, _END_SAFETY, _SAFETY)
    return safety * np.abs(fine - coarse) + _ROUNDOFF * mag


def integrate_intervals(
    f: Integrand,
    edges,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
    *,
    raise_on_failure: bool = False,
):
    """Integrate ``f`` over each consecutive interval of ``edges``.

    The error budget is shared between all intervals, so partial sums of the
    returned values (cumulative integrals) inherit the global tolerance.

    Returns
    -------
    values : ndarray
        One integral per interval.
    errors : ndarray
        Error estimate per interval.
    result : QuadResult
        Summary for the total over all intervals.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise DomainError("need at least two edges")
    if np.any(np.diff(edges) < 0):
        raise DomainError("edges must be nondecreasing")

    m = edges.size - 1
    a = edges[:-1].copy()
    b = edges[1:].copy()
    owner = np.arange(m)
    n = cfg.order

    lo_edge, hi_edge = edges[:-1], edges[1:]
    coarse, fine, mag, evals = _panel_pairs(f, a, b, n)
    err = _panel_errors(coarse, fine, mag, np.ones(m, dtype=bool))

    converged = False
    while True:
        total = fine.sum()
        tol = cfg.tolerance(total)
        total_err = err.sum()
        if total_err <= tol:
            converged = True
            break
        if a.size >= cfg.max_subdivisions + m:
            break
        # bisect the smallest set of panels that holds the excess error
        order = np.argsort(err)[::-1]
        cum = np.cumsum(err[order])
        count = int(np.searchsorted(cum, total_err - 0.5 * tol)) + 1
        count = min(count, cfg.max_subdivisions + m - a.size, order.size)
        split = order[:count]
        keep = np.ones(a.size, dtype=bool)
        keep[split] = False
        mid = 0.5 * (a[split] + b[split])
        if np.any((mid <= a[split]) | (mid >= b[split])):
            # panels can no longer be halved in floating point
            break
        na = np.concatenate([a[split], mid])
        nb = np.concatenate([mid, b[split]])
        nc, nf, nm, ne = _panel_pairs(f, na, nb, n)
        evals += ne
        new_owner = np.concatenate([owner[split], owner[split]])
        at_end = (na == lo_edge[new_owner]) | (nb == hi_edge[new_owner])
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        owner = np.concatenate([owner[keep], new_owner])
        fine = np.concatenate([fine[keep], nf])
        err = np.concatenate([err[keep], _panel_errors(nc, nf, nm, at_end)])

    values = np.zeros(m, dtype=fine.dtype)
    np.add.at(values, owner, fine)
    errors = np.zeros(m)
    np.add.at(errors, owner, err)
    total = values.sum()
    result = QuadResult(
        value=total if np.iscomplexobj(total) else float(total),
        error_estimate=float(err.sum()),
        evaluations=int(evals),
        converged=converged,
    )
    if raise_on_failure and not converged:
        raise ConvergenceFailure(
            f"quadrature did not converge: error {result.error_estimate:.3g} "
            f"after {a.size} panels"
        )
    return values, errors, result


def integrate_finite(
    f: Integrand,
    a: float,
    b: float,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
    *,
    points=None,
) -> QuadResult:
    """Adaptive integral of ``f`` over ``[a, b]``.

    ``points`` are optional interior breakpoints (peaks, kinks) that become
    initial panel edges.

    >>> round(integrate_finite(lambda x: x**2, 0.0, 1.0).value, 12)
    0.333333333333
    """
    if not a < b:
        raise DomainError(f"need a < b, got a={a!r}, b={b!r}")
    edges = [a, b]
    if points is not None:
        pts = np.asarray(points, dtype=float).ravel()
        edges = np.unique(np.concatenate([[a, b], pts[(pts > a) & (pts < b)]]))
    _, _, result = integrate_intervals(f, edges, cfg)
    return result


TailFn = Callable[[float], Tuple[float, float]]


def integrate_semi_infinite(
    f: Integrand,
    a: float,
    decay_hint: float = 1.0,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
    *,
    tail: Optional[TailFn] = None,
    points=None,
) -> QuadResult:
    """Integral of ``f`` over ``(a, inf)`` on panels of geometrically growing width.

    Panels are ``[a + h (2**k - 1), a + h (2**(k+1) - 1)]`` with ``h = decay_hint``.

    ``tail(X)`` may supply an asymptotic estimate of ``int_X^inf f`` together
    with a bound on the error of that estimate, ``(estimate, bound)``.  The
    panel loop stops once the bound is below ``cfg.truncation_tail_bound``;
    the estimate is added to the value and the bound to the error.  Without
    ``tail`` the loop stops when two consecutive panels contribute less than
    the tolerance, and the last panel magnitude is folded into the error.
    """
    if not decay_hint > 0:
        raise DomainError("decay_hint must be positive")
    h = float(decay_hint)
    panel_cfg = cfg.with_tol(cfg.abs_tol / 8)
    total = 0.0
    err = 0.0
    evals = 0
    quiet = 0
    left = float(a)
    width = h
    for _ in range(cfg.max_subdivisions):
        right = left + width
        res = integrate_finite(f, left, right, panel_cfg, points=points)
        evals += res.evaluations
        total = total + res.value
        err += res.error_estimate
        if not res.converged:
            raise ConvergenceFailure(
                f"panel [{left:g}, {right:g}] did not converge (error {res.error_estimate:.3g})"
            )
        if tail is not None:
            estimate, bound = tail(right)
            if bound <= cfg.truncation_tail_bound:
                value = total + estimate
                err += bound
                return QuadResult(value, err, evals, err <= cfg.tolerance(value) + bound)
        else:
            small = abs(res.value) <= cfg.tolerance(total) * 1e-2
            quiet = quiet + 1 if small else 0
            if quiet >= 2:
                err += abs(res.value)
                return QuadResult(total, err, evals, err <= cfg.tolerance(total))
        left = right
        width *= 2.0
    raise ConvergenceFailure("running tail estimate did not fall below tolerance")


def integrate_principal_value(
    f: Integrand,
    singularity: float,
    a: float,
    b: float,
    cfg: QuadConfig = DISTRIBUTION_CONFIG,
) -> QuadResult:
    """Cauchy principal value of ``int_a^b f`` around an interior ``singularity``.

    Nodes are paired at matched offsets ``s +- h`` so that an odd ``1/(x - s)``
    component cancels exactly; the remaining one-sided stretch is integrated
    normally.
    """
    s = float(singularity)
    if not (a < s < b):
        raise DomainError(f"singularity {s!r} not inside ({a!r}, {b!r})")
    d = min(s - a, b - s)

    def paired(hh):
        return f(s + hh) + f(s - hh)

    sym = integrate_finite(paired, 0.0, d, cfg)
    value, err, evals = sym.value, sym.error_estimate, sym.evaluations
    converged = sym.converged
    if s - d > a:
        rest = integrate_finite(f, a, s - d, cfg)
    elif s + d < b:
        rest = integrate_finite(f, s + d, b, cfg)
    else:
        rest = None
    if rest is not None:
        value = value + rest.value
        err += rest.error_estimate
        evals += rest.evaluations
        converged = converged and rest.converged
    return QuadResult(value, err, evals, converged)
