"""Laplace mechanism, private group-size disparity and budget composition."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

DEFAULT_SPLIT = 0.8
DEFAULT_DELTA = 1e-6


@dataclass(frozen=True)
class PrivacyBudget:
    """Budget for the statistic (eps_u) and the group-size disparity (eps_d)."""

    eps_u: float
    eps_d: float
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not (self.eps_u > 0 and self.eps_d > 0):
            raise ValueError("eps_u and eps_d must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @classmethod
    def split(cls, eps: float, fraction: float = DEFAULT_SPLIT, delta: float = DEFAULT_DELTA):
        """Give ``fraction`` of ``eps`` to the statistic and the rest to the disparity."""
        if not 0 < fraction < 1:
            raise ValueError("split fraction must lie in (0, 1)")
        return cls(eps * fraction, eps * (1 - fraction), delta)

    @property
    def total(self) -> tuple[float, float]:
        return compose([(self.eps_u, 0.0), (self.eps_d, self.delta)])


@dataclass(frozen=True)
class GroupSizeEstimate:
    d1_star: float
    n1_tilde: float
    n2_tilde: float
    d1_tilde: float


def laplace_from_uniform(u, scale: float = 1.0):
    """Inverse CDF of Laplace(0, scale) at u in (0, 1)."""
    c = np.asarray(u, dtype=float) - 0.5
    out = -scale * np.sign(c) * np.log1p(-2.0 * np.abs(c))
    return float(out) if out.ndim == 0 else out


def _uniform_open(rng, size=None):
    u = rng.random(size)
    # rng.random() is on [0, 1); 0 maps to an infinite draw
    if size is None:
        while u == 0.0:
            u = rng.random()
        return u
    u = np.asarray(u, dtype=float)
    while np.any(u == 0.0):
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    return u


def laplace_sample(scale: float, rng, size=None):
    """Laplace(0, scale) draw(s) from one uniform variate each.

    ``scale == 0`` (an infinite budget) returns exact zeros without
    consuming the stream.
    """
    if scale < 0 or math.isnan(scale):
        raise ValueError("scale must be non-negative")
    if scale == 0:
        return 0.0 if size is None else np.zeros(size)
    return laplace_from_uniform(_uniform_open(rng, size), scale)


def privatize(stat: float, gs_star: float, eps: float, rng) -> tuple[float, float]:
    """Laplace mechanism: returns (stat + noise, noise scale gs_star / eps)."""
    if gs_star <= 0 or eps <= 0:
        raise ValueError("gs_star and eps must be positive")
    scale = gs_star / eps
    return stat + laplace_sample(scale, rng), scale


def private_group_disparity(n1: int, n: int, eps_d: float, delta: float, rng) -> GroupSizeEstimate:
    """Conservative private estimate of |n1 - n/2|.

    With probability at least 1 - delta the estimate does not exceed the
    true disparity, so the plug-in null variance is not underestimated.
    The result is clamped so that n1_tilde >= 1.
    """
    if not 1 <= n1 <= n - 1:
        raise ValueError(f"need 1 <= n1 <= n - 1, got n1={n1}, n={n}")
    if eps_d <= 0 or not 0 < delta < 1:
        raise ValueError("need eps_d > 0 and 0 < delta < 1")
    d1 = abs(n1 - n / 2)
    d1_tilde = d1 + laplace_sample(1.0 / eps_d, rng)
    d1_star = max(math.ceil(d1_tilde + math.log(2 * delta) / eps_d), 0)
    if n % 2 == 1:
        d1_star = 0.5 if d1_star == 0 else d1_star - 0.5
    d1_star = min(d1_star, n / 2 - 1)
    n1_tilde = n / 2 - d1_star
    return GroupSizeEstimate(float(d1_star), n1_tilde, n - n1_tilde, float(d1_tilde))


def compose(budgets: Iterable[tuple[float, float]]) -> tuple[float, float]:
    """Basic composition: epsilons and deltas add."""
    eps_total = 0.0
    delta_total = 0.0
    for eps, delta in budgets:
        if eps <= 0 or delta < 0:
            raise ValueError("need eps > 0 and delta >= 0")
        eps_total += eps
        delta_total += delta
    return eps_total, delta_total
