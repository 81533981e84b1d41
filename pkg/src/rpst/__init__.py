"""Differentially private rank tests for scale (RPST) and paired data (RPSR)."""

from .errors import (
    AlphaOutOfRange,
    DegenerateSequence,
    DegenerateVariance,
    InvalidTransform,
    JitterTooLarge,
    QTooLarge,
    RPSTError,
    TiesWithoutJitter,
    TooLarge,
    ZeroDifference,
)
from .privacy import (
    GroupSizeEstimate,
    PrivacyBudget,
    compose,
    laplace_sample,
    private_group_disparity,
    privatize,
)
from .procedures import (
    ClassicResult,
    PrivateTestResult,
    classic_siegel_tukey,
    half_normal_critical,
    rpsr_test,
    rpst_test,
)
from .ranks import ModificationSpec, RankedSample, SignedRankSample, rank_data, signed_rank_data
from .simharness import SimConfig, SimResult, estimate_beta_n, estimate_size_power, sweep
from .stats import (
    null_variance,
    pi_n_diagnostic,
    sensitivity_bound,
    srswor_moments,
    u1_statistic,
    w1_null_variance,
    w1_sensitivity,
    w1_statistic,
)
from .transforms import TransformSpec, standard_transforms

__version__ = "0.1.0"
