"""Center-outward percentile-modified ranks and signed ranks.

Ranks are assigned from the extremes inward. With ``Q`` central points
zeroed, the lowest observation receives ``n - Q``, the highest ``n - Q - 1``
and so on, alternating one point at a time (``scheme="alternate"``). The
``"pairwise"`` scheme takes one point from the bottom, then two from the
top, two from the bottom, ... as in the classical Siegel-Tukey ordering.
Both schemes give the same multiset of ranks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import JitterTooLarge, TiesWithoutJitter, ZeroDifference

SCHEMES = ("alternate", "pairwise")


@dataclass(frozen=True)
class ModificationSpec:
    """How many central ranks to zero: either a proportion ``q`` or a count ``Q``."""

    q: float | None = None
    Q: int | None = None

    def __post_init__(self):
        if (self.q is None) == (self.Q is None):
            raise ValueError("give exactly one of q or Q")
        if self.q is not None and not 0.0 <= self.q < 1.0:
            raise ValueError(f"q must lie in [0,1), got {self.q}")
        if self.Q is not None and self.Q < 0:
            raise ValueError(f"Q must be non-negative, got {self.Q}")

    def count(self, n: int) -> int:
        if self.Q is not None:
            if self.Q > n:
                raise ValueError(f"Q={self.Q} exceeds n={n}")
            return int(self.Q)
        return int(math.floor(n * self.q))


def as_modification(q: float | None = None, Q: int | None = None) -> ModificationSpec:
    if q is None and Q is None:
        return ModificationSpec(Q=0)
    return ModificationSpec(q=q, Q=Q)


def take_order(n: int, scheme: str = "alternate") -> np.ndarray:
    """Sorted positions in the order they are ranked, extremes first."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    lo, hi = 0, n - 1
    order = []
    if scheme == "alternate":
        from_low = True
        while lo <= hi:
            if from_low:
                order.append(lo)
                lo += 1
            else:
                order.append(hi)
                hi -= 1
            from_low = not from_low
    else:
        if n:
            order.append(lo)
            lo += 1
        from_low = False
        while lo <= hi:
            for _ in range(2):
                if lo > hi:
                    break
                if from_low:
                    order.append(lo)
                    lo += 1
                else:
                    order.append(hi)
                    hi -= 1
            from_low = not from_low
    return np.asarray(order, dtype=np.int64)


def center_outward_rank_values(n: int, Q: int, scheme: str = "alternate") -> np.ndarray:
    """Rank value held by each sorted position (lowest to highest)."""
    if not 0 <= Q <= n:
        raise ValueError(f"need 0 <= Q <= n, got Q={Q}, n={n}")
    values = np.zeros(n, dtype=np.int64)
    m = n - Q
    order = take_order(n, scheme)
    values[order[:m]] = np.arange(m, 0, -1)
    return values


def siegel_tukey_rank_values(n: int) -> np.ndarray:
    """Classical Siegel-Tukey ranks by sorted position: 1 lowest, 2-3 highest, 4-5 next lowest..."""
    values = np.zeros(n, dtype=np.int64)
    values[take_order(n, "pairwise")] = np.arange(1, n + 1)
    return values


@dataclass(frozen=True)
class RankedSample:
    values: np.ndarray
    group_flags: np.ndarray  # True for group 1
    ranks: np.ndarray
    n1: int
    n2: int
    Q: int

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    def swapped(self) -> "RankedSample":
        """Same ranks with the group labels exchanged."""
        return RankedSample(self.values, ~self.group_flags, self.ranks, self.n2, self.n1, self.Q)


@dataclass(frozen=True)
class SignedRankSample:
    abs_diffs: np.ndarray
    signs: np.ndarray
    ranks: np.ndarray
    modified_ranks: np.ndarray
    Q: int

    @property
    def n(self) -> int:
        return int(self.ranks.size)


def _min_gap(values: np.ndarray) -> float:
    distinct = np.unique(values)
    if distinct.size < 2:
        return math.inf
    return float(np.min(np.diff(distinct)))


def _break_ties(values: np.ndarray, tie_jitter: float, rng, gap_values: np.ndarray | None = None):
    if tie_jitter <= 0:
        raise ValueError("tie_jitter must be positive")
    if rng is None:
        raise ValueError("tie_jitter needs a random stream")
    gap = _min_gap(values if gap_values is None else gap_values)
    if not tie_jitter < gap / 2:
        raise JitterTooLarge(f"jitter {tie_jitter} must be below half the minimum gap {gap}")
    return values + rng.uniform(-tie_jitter, tie_jitter, size=values.shape)


def rank_data(
    group1,
    group2,
    mod: ModificationSpec | None = None,
    tie_jitter: float | None = None,
    rng=None,
    scheme: str = "alternate",
) -> RankedSample:
    """Rank the pooled sample center-outward and map ranks back to input order."""
    x = np.asarray(group1, dtype=float).ravel()
    y = np.asarray(group2, dtype=float).ravel()
    if x.size < 1 or y.size < 1:
        raise ValueError("both groups need at least one observation")
    values = np.concatenate([x, y])
    if not np.all(np.isfinite(values)):
        raise ValueError("observations must be finite")
    n = values.size
    Q = (mod or ModificationSpec(Q=0)).count(n)

    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    if np.any(sorted_vals[1:] == sorted_vals[:-1]):
        if tie_jitter is None:
            raise TiesWithoutJitter("pooled sample contains tied values; set tie_jitter")
        work = _break_ties(values, tie_jitter, rng)
        order = np.argsort(work, kind="stable")

    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = center_outward_rank_values(n, Q, scheme)
    flags = np.zeros(n, dtype=bool)
    flags[: x.size] = True
    return RankedSample(values, flags, ranks, x.size, y.size, Q)


def signed_rank_data(
    pairs,
    mod: ModificationSpec | None = None,
    tie_jitter: float | None = None,
    rng=None,
) -> SignedRankSample:
    """Signs and linear ranks of |y - x|, plus the percentile-modified ranks.

    ``pairs`` is an (n, 2) array-like of (x, y) rows.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise ValueError("pairs must be a non-empty (n, 2) array of (x, y)")
    diffs = arr[:, 1] - arr[:, 0]
    if not np.all(np.isfinite(diffs)):
        raise ValueError("observations must be finite")
    n = diffs.size
    Q = (mod or ModificationSpec(Q=0)).count(n)

    abs_d = np.abs(diffs)
    has_zero = bool(np.any(abs_d == 0))
    has_ties = np.unique(abs_d).size < n
    if has_zero or has_ties:
        if tie_jitter is None:
            if has_zero:
                raise ZeroDifference("some pairs have y == x; set tie_jitter")
            raise TiesWithoutJitter("tied absolute differences; set tie_jitter")
        # 0 joins the gap set so jitter cannot flip the sign of a nonzero difference
        diffs = _break_ties(diffs, tie_jitter, rng, gap_values=np.append(abs_d, 0.0))
        abs_d = np.abs(diffs)

    ranks = np.empty(n, dtype=np.int64)
    ranks[np.argsort(abs_d, kind="stable")] = np.arange(1, n + 1)
    signs = np.where(diffs > 0, 1, -1).astype(np.int64)
    modified = np.maximum(ranks - Q, 0)
    return SignedRankSample(abs_d, signs, ranks, modified, Q)
