"""End-to-end private scale (RPST) and paired (RPSR) tests, plus the classical Siegel-Tukey test.

The private statistic is U1 + Laplace(GS*/eps_U). By default its p-value
is computed against N(0, sigma~^2) convolved with that same Laplace
distribution (``reference="normal_laplace"``). The noise scale is public,
so this costs no privacy, and it keeps the test at its nominal level when
the noise is comparable to sigma~ (small n, small eps). The pure normal
reference (``reference="normal"``) is the large-n limit and is kept for
comparison.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ._numeric import erfinv, two_sided_p
from .errors import AlphaOutOfRange, DegenerateVariance, QTooLarge, TiesWithoutJitter
from .privacy import GroupSizeEstimate, PrivacyBudget, laplace_sample, private_group_disparity
from .ranks import as_modification, rank_data, siegel_tukey_rank_values, signed_rank_data
from .stats import (
    null_variance,
    sensitivity_bound,
    u1_statistic,
    w1_null_variance,
    w1_sensitivity,
    w1_statistic,
)
from .transforms import TransformSpec

REFERENCES = ("normal_laplace", "normal")


@dataclass(frozen=True)
class PrivateTestResult:
    test: str
    statistic_private: float
    noise_scale: float
    sigma_tilde: float
    z_score: float
    p_value: float
    reference: str
    psi: str
    q: float | None
    Q: int
    n: int
    eps_u: float
    eps_d: float | None
    delta: float | None
    eps_total: float
    delta_total: float
    group_estimate: GroupSizeEstimate | None = None

    def reject(self, alpha: float = 0.05) -> bool:
        return self.p_value <= alpha

    def to_dict(self) -> dict:
        return asdict(self)


def _p_value(stat: float, sigma: float, noise_scale: float, reference: str) -> float:
    if reference == "normal":
        return float(two_sided_p(stat, sigma))
    if reference == "normal_laplace":
        return float(two_sided_p(stat, sigma, noise_scale))
    raise ValueError(f"unknown reference {reference!r}; expected one of {REFERENCES}")


def _median_center(x: np.ndarray) -> np.ndarray:
    return x - np.median(x)


def rpst_test(
    group1,
    group2,
    psi: TransformSpec,
    budget: PrivacyBudget,
    rng,
    q: float | None = None,
    Q: int | None = None,
    tie_jitter: float | None = None,
    reference: str = "normal_laplace",
    center: bool = False,
    scheme: str = "alternate",
) -> PrivateTestResult:
    """Private two-sample scale test.

    Draws from ``rng`` in a fixed order: tie jitter (if needed), the
    statistic's Laplace noise, then the disparity noise.

    ``center`` subtracts each group's sample median first. It is not
    private and is meant for simulations where location is known to agree.
    A group of odd size then holds an exact 0, so two odd-sized groups tie
    and need ``tie_jitter``.
    """
    x = np.asarray(group1, dtype=float).ravel()
    y = np.asarray(group2, dtype=float).ravel()
    if center:
        x, y = _median_center(x), _median_center(y)
    mod = as_modification(q, Q)
    sample = rank_data(x, y, mod, tie_jitter=tie_jitter, rng=rng, scheme=scheme)
    n = sample.n
    if n - sample.Q < 2:
        raise QTooLarge(f"need n - Q >= 2, got n={n}, Q={sample.Q}")

    u1 = u1_statistic(sample, psi).u1
    bound = sensitivity_bound(psi, n, sample.Q)
    scale = bound.gs_star / budget.eps_u
    u_tilde = u1 + laplace_sample(scale, rng)

    est = private_group_disparity(sample.n1, n, budget.eps_d, budget.delta, rng)
    var = null_variance(est.n1_tilde, est.n2_tilde, psi, sample.Q)
    if var <= 0:
        raise DegenerateVariance("plug-in null variance is zero")
    sigma = math.sqrt(var)

    eps_total, delta_total = budget.total
    return PrivateTestResult(
        test="rpst",
        statistic_private=float(u_tilde),
        noise_scale=scale,
        sigma_tilde=sigma,
        z_score=abs(u_tilde) / sigma,
        p_value=_p_value(u_tilde, sigma, scale, reference),
        reference=reference,
        psi=psi.name,
        q=q,
        Q=sample.Q,
        n=n,
        eps_u=budget.eps_u,
        eps_d=budget.eps_d,
        delta=budget.delta,
        eps_total=eps_total,
        delta_total=delta_total,
        group_estimate=est,
    )


def rpsr_test(
    pairs,
    psi: TransformSpec,
    eps: float,
    rng,
    q: float | None = None,
    Q: int | None = None,
    tie_jitter: float | None = None,
    reference: str = "normal_laplace",
) -> PrivateTestResult:
    """Private paired test on the signed, percentile-modified, transformed ranks of y - x.

    The whole budget ``eps`` goes to the statistic; no group sizes are needed.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    sample = signed_rank_data(pairs, as_modification(q, Q), tie_jitter=tie_jitter, rng=rng)
    n = sample.n
    if n < 2:
        raise ValueError("need at least two pairs")
    w1 = w1_statistic(sample, psi)
    scale = w1_sensitivity(psi, n, sample.Q) / eps
    w_tilde = w1 + laplace_sample(scale, rng)
    sigma = math.sqrt(w1_null_variance(psi, n, sample.Q))
    return PrivateTestResult(
        test="rpsr",
        statistic_private=float(w_tilde),
        noise_scale=scale,
        sigma_tilde=sigma,
        z_score=abs(w_tilde) / sigma,
        p_value=_p_value(w_tilde, sigma, scale, reference),
        reference=reference,
        psi=psi.name,
        q=q,
        Q=sample.Q,
        n=n,
        eps_u=eps,
        eps_d=None,
        delta=None,
        eps_total=eps,
        delta_total=0.0,
    )


@dataclass(frozen=True)
class ClassicResult:
    statistic: float
    critical_value: float
    reject: bool
    rank_sum_1: float
    rank_sum_2: float
    m: int
    n: int


def alpha_window(n: int) -> tuple[float, float]:
    """Open interval of alpha over which the half-normal critical value is monotone in m."""
    return 1.0 - math.erf(math.sqrt(1.5 * (n - 1))), 0.5


def half_normal_critical(m: float, n: int, alpha: float) -> float:
    """Lower alpha-quantile of the min-form Siegel-Tukey / Mann-Whitney statistic."""
    if not 0 <= m <= n / 2:
        raise ValueError(f"need 0 <= m <= n/2, got m={m}, n={n}")
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 0.5)")
    mn = m * (n - m)
    return mn / 2 - math.sqrt(mn * (n + 1) / 12) * math.sqrt(2) * erfinv(1 - alpha)


def classic_siegel_tukey(group1, group2, alpha: float = 0.05) -> ClassicResult:
    """Non-private Siegel-Tukey test; rejects when U falls below the half-normal critical value."""
    x = np.asarray(group1, dtype=float).ravel()
    y = np.asarray(group2, dtype=float).ravel()
    n1, n2 = x.size, y.size
    if n1 < 1 or n2 < 1:
        raise ValueError("both groups need at least one observation")
    n = n1 + n2
    lo, hi = alpha_window(n)
    if not lo < alpha < hi:
        raise AlphaOutOfRange(f"alpha must lie in ({lo:.3g}, {hi}) for n={n}")
    values = np.concatenate([x, y])
    order = np.argsort(values, kind="stable")
    if np.any(np.diff(values[order]) == 0):
        raise TiesWithoutJitter("classical Siegel-Tukey needs distinct values")
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = siegel_tukey_rank_values(n)
    r1 = float(ranks[:n1].sum())
    r2 = float(ranks[n1:].sum())
    u = min(r1 - n1 * (n1 + 1) / 2, r2 - n2 * (n2 + 1) / 2)
    m = min(n1, n2)
    crit = half_normal_critical(m, n, alpha)
    return ClassicResult(u, crit, u < crit, r1, r2, m, n)
