"""Closed-form rank statistics, their null moments and sensitivity bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numeric import fsum
from .errors import DegenerateVariance, QTooLarge
from .ranks import RankedSample, SignedRankSample
from .transforms import TransformSpec, power_sums, psi_bar_q


@dataclass(frozen=True)
class StatisticValue:
    raw_sum: float
    mu1: float
    u1: float


@dataclass(frozen=True)
class SensitivityBound:
    gs_star: float
    top: float  # psi(n - Q)
    second: float  # psi(n - Q - 1)
    psi_bar: float


def u1_statistic(sample: RankedSample, psi: TransformSpec) -> StatisticValue:
    """Centered transformed rank sum of group 1."""
    n = sample.n
    raw = fsum(psi(sample.ranks[sample.group_flags]))
    s1, _ = power_sums(psi, n, sample.Q)
    mu1 = sample.n1 / n * s1
    return StatisticValue(raw, mu1, raw - mu1)


def null_variance(n1: float, n2: float, psi: TransformSpec, Q: int) -> float:
    """Null variance of U1 when group 1 is a random n1-subset of the n ranks.

    ``n1`` may be a plug-in estimate such as ``n/2 - d1*``. The pair sum is
    taken as ((sum psi)^2 - sum psi^2) / 2 so the cost is O(n).
    """
    n = n1 + n2
    if n < 2:
        raise ValueError("need n >= 2")
    n = int(round(n))
    s1, s2 = power_sums(psi, n, Q)
    frac = n1 / n
    pair_sum = (s1 * s1 - s2) / 2.0
    var = frac * (1.0 - frac) * s2 + 2.0 * frac * ((n1 - 1) / (n - 1) - frac) * pair_sum
    # cancellation can leave tiny negative residue when the true value is 0
    return max(var, 0.0)


def sensitivity_bound(psi: TransformSpec, n: int, Q: int) -> SensitivityBound:
    """GS* = max{psi(n-Q), psi(n-Q) + psi(n-Q-1) - psi_bar_Q}."""
    if n - Q < 2:
        raise QTooLarge(f"need n - Q >= 2, got n={n}, Q={Q}")
    top = psi(n - Q)
    second = psi(n - Q - 1)
    bar = psi_bar_q(psi, n, Q)
    return SensitivityBound(max(top, top + second - bar), top, second, bar)


def w1_statistic(sample: SignedRankSample, psi: TransformSpec) -> float:
    return fsum(sample.signs * psi(sample.modified_ranks))


def w1_sensitivity(psi: TransformSpec, n: int, Q: int) -> float:
    if n - Q < 1:
        raise QTooLarge(f"need n - Q >= 1, got n={n}, Q={Q}")
    return 2.0 * psi(n - Q)


def w1_null_variance(psi: TransformSpec, n: int, Q: int) -> float:
    return power_sums(psi, n, Q)[1]


def srswor_moments(values, k: int) -> tuple[float, float]:
    """Mean and variance of the sum of a size-k simple random sample without replacement."""
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if n == 0:
        return 0.0, 0.0
    s1 = fsum(x)
    s2 = fsum(x * x)
    mean = k / n * s1
    pair_sum = (s1 * s1 - s2) / 2.0
    pair_term = 2.0 * k * (k - 1) / (n * (n - 1)) * pair_sum if n > 1 else 0.0
    var = k / n * s2 + pair_term - mean * mean
    return mean, var


def pi_n_diagnostic(psi: TransformSpec, n1: int, n2: int, Q: int, eps_u: float) -> float:
    """Noise-to-signal ratio GS* / (sigma * eps_u) of the privatized statistic."""
    if eps_u <= 0:
        raise ValueError("eps_u must be positive")
    var = null_variance(n1, n2, psi, Q)
    if var <= 0:
        raise DegenerateVariance("null variance is zero")
    return sensitivity_bound(psi, n1 + n2, Q).gs_star / (math.sqrt(var) * eps_u)
