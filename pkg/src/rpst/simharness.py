"""Monte Carlo size/power studies for the private rank tests.

Every replication draws from its own stream, derived from the cell seed and
the replication index (``SeedSequence(seed, spawn_key=(i,))`` feeding a
Philox counter generator). Results therefore do not depend on how
replications are split across workers.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import stats as sps

from .privacy import DEFAULT_DELTA, DEFAULT_SPLIT, PrivacyBudget
from .procedures import classic_siegel_tukey, rpsr_test, rpst_test
from .ranks import center_outward_rank_values
from .stats import null_variance
from .transforms import TransformSpec, retained_values

log = logging.getLogger(__name__)

FAMILIES = ("normal", "exponential", "lomax", "student_t")
TEST_KINDS = ("rpst", "rpsr", "classic")
DEFAULT_LOMAX_SHAPE = 2.5
DEFAULT_COPULA_RHO = 0.5
DEFAULT_T_DF = 3.0


def replication_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def derive_seed(master: int, index: int) -> int:
    """64-bit seed for sweep cell ``index`` under ``master``."""
    state = np.random.SeedSequence(master, spawn_key=(index,)).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def inverse_cdf(family: str, u, shape: float | None = None):
    """Quantile function used for the inverse-CDF samplers."""
    u = np.asarray(u, dtype=float)
    if family == "exponential":
        return -np.log1p(-u)
    if family == "lomax":
        a = DEFAULT_LOMAX_SHAPE if shape is None else shape
        return np.expm1(-np.log1p(-u) / a)
    if family == "normal":
        return sps.norm.ppf(u)
    if family == "student_t":
        return sps.t.ppf(u, DEFAULT_T_DF if shape is None else shape)
    raise ValueError(f"unknown family {family!r}")


def sample_population(
    family: str,
    location: float,
    scale: float,
    size: int,
    rng: np.random.Generator,
    shape: float | None = None,
) -> np.ndarray:
    """i.i.d. draws of ``location + scale * X`` with X from the base family.

    ``shape`` is the Lomax tail index or the Student-t degrees of freedom.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    if family == "normal":
        base = rng.standard_normal(size)
    elif family in ("exponential", "lomax"):
        base = inverse_cdf(family, rng.random(size), shape)
    elif family == "student_t":
        base = rng.standard_t(DEFAULT_T_DF if shape is None else shape, size)
    else:
        raise ValueError(f"unknown family {family!r}")
    return location + scale * base


def gaussian_copula_pairs(
    n: int,
    rho: float,
    effect: float,
    margin: str,
    rng: np.random.Generator,
    shape: float | None = None,
) -> np.ndarray:
    """(n, 2) array of (x, y) pairs with Gaussian-copula dependence; ``effect`` shifts y."""
    if not -1 < rho < 1:
        raise ValueError("rho must lie in (-1, 1)")
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + math.sqrt(1 - rho * rho) * rng.standard_normal(n)
    if margin == "normal":
        x, y = z1, z2
    else:
        u = sps.norm.cdf(np.stack([z1, z2]))
        x, y = inverse_cdf(margin, u, shape)
    return np.column_stack([x, y + effect])


@dataclass(frozen=True)
class SimConfig:
    family: str = "normal"
    theta: float = 1.0
    n: int = 100
    n1: int | None = None  # defaults to n // 2
    q: float = 0.0
    psi: TransformSpec = field(default_factory=lambda: TransformSpec("identity"))
    eps: float = 1.0
    split: float = DEFAULT_SPLIT
    delta: float = DEFAULT_DELTA
    alpha: float = 0.05
    reps: int = 500
    seed: int = 0
    test: str = "rpst"
    copula_rho: float = DEFAULT_COPULA_RHO
    shape: float | None = None
    reference: str = "normal_laplace"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.test not in TEST_KINDS:
            raise ValueError(f"unknown test kind {self.test!r}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.test == "rpsr":
            if not self.theta >= 0:
                raise ValueError("paired effect must be non-negative")
        elif not self.theta > 0:
            raise ValueError("theta must be positive")
        if not 1 <= self.group1_size <= self.n - 1:
            raise ValueError(f"need 1 <= n1 <= n - 1, got n1={self.n1}, n={self.n}")
        if not 0 <= self.q < 1:
            raise ValueError("q must lie in [0,1)")

    @property
    def group1_size(self) -> int:
        return self.n // 2 if self.n1 is None else self.n1

    @property
    def budget(self) -> PrivacyBudget:
        return PrivacyBudget.split(self.eps, self.split, self.delta)

    @property
    def shape_used(self) -> float | None:
        if self.shape is not None:
            return self.shape
        return {"lomax": DEFAULT_LOMAX_SHAPE, "student_t": DEFAULT_T_DF}.get(self.family)


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    rejection_rate: float
    mc_standard_error: float
    reps: int
    seconds: float
    error: str | None = None


def run_replication(config: SimConfig, index: int) -> bool:
    """One simulated dataset and test decision."""
    rng = replication_rng(config.seed, index)
    shape = config.shape_used
    if config.test == "rpsr":
        pairs = gaussian_copula_pairs(config.n, config.copula_rho, config.theta, config.family, rng, shape)
        res = rpsr_test(pairs, config.psi, config.eps, rng, q=config.q, reference=config.reference)
        return res.p_value <= config.alpha
    n1 = config.group1_size
    x = sample_population(config.family, 0.0, 1.0, n1, rng, shape)
    y = sample_population(config.family, 0.0, config.theta, config.n - n1, rng, shape)
    if config.test == "classic":
        return classic_siegel_tukey(x, y, config.alpha).reject
    res = rpst_test(x, y, config.psi, config.budget, rng, q=config.q, reference=config.reference)
    return res.p_value <= config.alpha


def _run_chunk(args) -> list[bool]:
    config, start, stop = args
    return [run_replication(config, i) for i in range(start, stop)]


def _chunks(reps: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(reps / (4 * workers)))
    return [(s, min(s + size, reps)) for s in range(0, reps, size)]


def estimate_size_power(config: SimConfig, workers: int = 1, pool: ProcessPoolExecutor | None = None) -> SimResult:
    """Rejection rate of the configured test over ``config.reps`` replications."""
    start = time.perf_counter()
    if pool is not None:
        jobs = [(config, a, b) for a, b in _chunks(config.reps, max(workers, 1))]
        decisions = [d for part in pool.map(_run_chunk, jobs) for d in part]
    elif workers <= 1:
        decisions = [run_replication(config, i) for i in range(config.reps)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as own:
            return estimate_size_power(config, workers, own)
    rate = sum(decisions) / config.reps
    se = math.sqrt(rate * (1 - rate) / config.reps)
    return SimResult(config, rate, se, config.reps, time.perf_counter() - start)


@dataclass(frozen=True)
class BetaEstimate:
    value: float
    standard_error: float
    reps: int


def estimate_beta_n(
    family: str,
    n: int,
    n1: int,
    psi: TransformSpec,
    Q: int,
    theta: float,
    reps: int,
    seed: int,
    shape: float | None = None,
) -> BetaEstimate:
    """Monte Carlo estimate of the standardized mean shift of U1 under a scale alternative.

    Group 1 has scale 1 and group 2 scale ``theta``. The estimate is
    (mean group-1 transformed rank sum - n1/n * sum psi) / sigma(n1, n2, psi, Q).
    """
    sigma = math.sqrt(null_variance(n1, n - n1, psi, Q))
    rank_psi = np.asarray(psi(center_outward_rank_values(n, Q)), dtype=float)
    mu1 = n1 / n * math.fsum(retained_values(psi, n, Q))
    sums = np.empty(reps)
    for i in range(reps):
        rng = replication_rng(seed, i)
        x = sample_population(family, 0.0, 1.0, n1, rng, shape)
        y = sample_population(family, 0.0, theta, n - n1, rng, shape)
        pos = np.argsort(np.concatenate([x, y]), kind="stable")
        in_g1 = pos < n1  # sorted position -> group flag
        sums[i] = rank_psi[in_g1].sum()
    centered = (sums - mu1) / sigma
    se = float(centered.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan
    return BetaEstimate(float(centered.mean()), se, reps)


def sweep(configs, workers: int = 1) -> list[SimResult]:
    """Run every cell in order; a failing cell is recorded and the sweep continues."""
    configs = list(configs)
    if not configs:
        raise ValueError("empty sweep grid")
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    results = []
    try:
        for cfg in configs:
            try:
                results.append(estimate_size_power(cfg, workers, pool))
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                log.warning("cell failed: %s", exc)
                results.append(SimResult(cfg, math.nan, math.nan, cfg.reps, 0.0, f"{type(exc).__name__}: {exc}"))
    finally:
        if pool is not None:
            pool.shutdown()
    return results


def expand_grid(base: SimConfig, **axes) -> list[SimConfig]:
    """Cartesian product of ``axes`` applied on top of ``base``."""
    keys = list(axes)
    return [replace(base, **dict(zip(keys, combo))) for combo in itertools.product(*axes.values())]


CSV_COLUMNS = (
    "family", "theta", "n", "n1", "q", "psi", "eps", "split", "delta", "alpha",
    "reps", "reject_rate", "mc_se", "seconds",
    # appended metadata
    "test", "shape", "copula_rho", "reference", "seed", "error",
)


def result_row(res: SimResult) -> dict:
    """Flat row keyed by ``CSV_COLUMNS``."""
    cfg = res.config
    return {
        "family": cfg.family,
        "theta": cfg.theta,
        "n": cfg.n,
        "n1": cfg.group1_size,
        "q": cfg.q,
        "psi": cfg.psi.name,
        "eps": cfg.eps,
        "split": cfg.split,
        "delta": cfg.delta,
        "alpha": cfg.alpha,
        "reps": res.reps,
        "reject_rate": res.rejection_rate,
        "mc_se": res.mc_standard_error,
        "seconds": res.seconds,
        "test": cfg.test,
        "shape": "" if cfg.shape_used is None else cfg.shape_used,
        "copula_rho": cfg.copula_rho if cfg.test == "rpsr" else "",
        "reference": cfg.reference if cfg.test != "classic" else "",
        "seed": cfg.seed,
        "error": res.error or "",
    }


def config_dict(cfg: SimConfig) -> dict:
    out = asdict(cfg)
    out["psi"] = cfg.psi.name
    out["shape"] = cfg.shape_used
    return out
