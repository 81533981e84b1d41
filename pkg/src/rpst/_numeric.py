"""Small numerical helpers shared across modules."""

from __future__ import annotations

import math

import numpy as np
from scipy import special


def norm_sf(z):
    """Upper tail of the standard normal, accurate far into the tail."""
    return special.ndtr(-np.asarray(z, dtype=float))


def norm_cdf(z):
    return special.ndtr(np.asarray(z, dtype=float))


def erfinv(x: float) -> float:
    return float(special.erfinv(x))


def normal_laplace_sf(t, sigma: float, b: float):
    """P(N + L > t) for N ~ N(0, sigma^2) independent of L ~ Laplace(0, b).

    Closed form obtained by splitting L into +/- exponential parts and
    integrating the normal tail against each (exponentially modified normal).
    All exponentials are combined in log space, so very small ``b / sigma``
    and very large ``t`` do not overflow.
    """
    t = np.asarray(t, dtype=float)
    if sigma < 0 or b < 0:
        raise ValueError("sigma and b must be non-negative")
    if b == 0:
        if sigma == 0:
            return np.where(t < 0, 1.0, 0.0)
        return special.ndtr(-t / sigma)
    if sigma == 0:
        return np.where(t >= 0, 0.5 * np.exp(-t / b), 1.0 - 0.5 * np.exp(t / b))
    lam = 1.0 / b
    half_var = 0.5 * (lam * sigma) ** 2
    plus = np.exp(-lam * t + half_var + special.log_ndtr(t / sigma - lam * sigma))
    minus = np.exp(lam * t + half_var + special.log_ndtr(-t / sigma - lam * sigma))
    return special.ndtr(-t / sigma) + 0.5 * (plus - minus)


def two_sided_p(stat, sigma: float, noise_scale: float = 0.0):
    """Two-sided p-value of ``stat`` against N(0, sigma^2) convolved with Laplace(noise_scale)."""
    t = np.abs(np.asarray(stat, dtype=float))
    p = 2.0 * normal_laplace_sf(t, sigma, noise_scale)
    return np.clip(p, 0.0, 1.0)


def fsum(values) -> float:
    """Compensated sum of an iterable or array."""
    return math.fsum(np.asarray(values, dtype=float).ravel())
