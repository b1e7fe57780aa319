"""Independent numerical oracles shared by the tests."""

import itertools
import math

import numpy as np

from meixner_cliquet import MeixnerParams, char_exponent

GRID = [
    (MeixnerParams(a, b, d, 0.0), t)
    for a, b, d in itertools.product([0.1, 0.5, 2.0], [-2.0, 0.0, 2.0], [0.1, 1.0, 5.0])
    for t in (1.0 / 12.0, 1.0)
]


def contour_cumulants(p, t, order=4, points=64):
    """Derivatives of the cumulant generating function ``K(s) = t psi(-i s)`` at 0.

    Cauchy's integral formula on a circle inside the analyticity strip; the
    trapezoidal rule on the circle converges geometrically.
    """
    radius = 0.5 * (math.pi - abs(p.beta)) / p.alpha
    theta = 2.0 * math.pi * np.arange(points) / points
    s = radius * np.exp(1j * theta)
    k = t * np.asarray(char_exponent(p, -1j * s))
    out = []
    for j in range(1, order + 1):
        coef = np.mean(k * np.exp(-1j * j * theta)) / radius**j
        out.append(math.factorial(j) * coef.real)
    return out


def standardized(kappa):
    k1, k2, k3, k4 = kappa
    return k1, k2, k3 / k2**1.5, 3.0 + k4 / k2**2
