"""Brute-force ground truth for the closed forms in :mod:`rpst.stats`.

Everything here enumerates. Rank values are computed from a direct
position formula rather than through :mod:`rpst.ranks`, so the two paths
stay independent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import TooLarge
from .transforms import TransformSpec

SUBSET_CAP = 10**6
SENSITIVITY_MAX_N = 8
SIGN_MAX_N = 16


@dataclass(frozen=True)
class Distribution:
    """Finite distribution: sorted support and matching probabilities."""

    support: np.ndarray
    probs: np.ndarray

    def mean(self) -> float:
        return math.fsum(self.support * self.probs)

    def variance(self) -> float:
        mu = self.mean()
        return math.fsum((self.support - mu) ** 2 * self.probs)

    def reflected(self) -> "Distribution":
        return Distribution(-self.support[::-1], self.probs[::-1])


def _collapse(values: np.ndarray, total: int, rtol: float = 1e-12) -> Distribution:
    """Merge values equal up to rounding; probabilities are exact counts / total."""
    values = np.sort(values)
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    support, counts = [], []
    for v in values:
        if support and abs(v - support[-1]) <= rtol * scale:
            counts[-1] += 1
        else:
            support.append(float(v))
            counts.append(1)
    probs = [float(Fraction(c, total)) for c in counts]
    return Distribution(np.asarray(support), np.asarray(probs))


def rank_value_at(pos: int, n: int, Q: int) -> int:
    """Center-outward rank of sorted position ``pos`` (0-based), one-at-a-time alternation.

    The k-th lowest point (k = 0, 1, ...) gets n - Q - 2k and the k-th
    highest gets n - Q - 1 - 2k; non-positive values are zeroed ranks.
    """
    k_low = pos
    k_high = n - 1 - pos
    r = n - Q - 2 * k_low if k_low <= k_high else n - Q - 1 - 2 * k_high
    return max(r, 0)


def _psi_table(psi: TransformSpec, n: int, Q: int) -> np.ndarray:
    """psi of the rank held by each sorted position."""
    return np.array([psi(rank_value_at(p, n, Q)) for p in range(n)], dtype=float)


def exact_u1_null(n: int, n1: int, Q: int, psi: TransformSpec, cap: int = SUBSET_CAP) -> Distribution:
    """Exact null distribution of U1 over all n1-subsets of positions."""
    if not 1 <= n1 <= n - 1:
        raise ValueError("need 1 <= n1 <= n - 1")
    count = math.comb(n, n1)
    if count > cap:
        raise TooLarge(f"C({n},{n1}) = {count} exceeds cap {cap}")
    table = _psi_table(psi, n, Q)
    mu1 = n1 / n * math.fsum(table)
    idx = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), n1)),
        dtype=np.int64,
        count=count * n1,
    ).reshape(count, n1)
    sums = table[idx].sum(axis=1) - mu1
    return _collapse(sums, count)


def exact_rank_sum_null(rank_values, n1: int, cap: int = SUBSET_CAP) -> dict[float, Fraction]:
    """Exact distribution of the group-1 rank sum when group 1 is a random n1-subset."""
    ranks = list(rank_values)
    n = len(ranks)
    total = math.comb(n, n1)
    if total > cap:
        raise TooLarge(f"C({n},{n1}) = {total} exceeds cap {cap}")
    counts: dict[float, int] = {}
    for combo in itertools.combinations(ranks, n1):
        s = sum(combo)
        counts[s] = counts.get(s, 0) + 1
    return {k: Fraction(v, total) for k, v in sorted(counts.items())}


def _u1_from_labels(labels: tuple[int, ...], table: np.ndarray, total: float) -> float:
    n1 = sum(labels)
    raw = math.fsum(t for t, g in zip(table, labels) if g)
    return raw - n1 / len(labels) * total


def _check_grid(grid: np.ndarray, n: int):
    pts = np.arange(1, n + 1)
    if not (grid.min() < 1 and grid.max() > n):
        raise ValueError("grid needs points below and above the base data")
    for a, b in zip(pts[:-1], pts[1:]):
        if not np.any((grid > a) & (grid < b)):
            raise ValueError(f"grid has no point strictly between {a} and {b}")


def exhaustive_u1_sensitivity(n1: int, n2: int, Q: int, psi: TransformSpec, grid=None) -> float:
    """Largest |U1(x) - U1(x')| over neighbouring datasets.

    Base datasets are the values 1..n with every assignment of n1 points to
    group 1. A neighbour replaces one observation by a grid value in either
    group (so group sizes may shift by one), keeping both groups non-empty.
    Only the interleaving of values matters to ranks, so the default grid
    of midpoints plus the two exterior points is exhaustive.
    """
    n = n1 + n2
    if n > SENSITIVITY_MAX_N:
        raise TooLarge(f"n={n} exceeds {SENSITIVITY_MAX_N}")
    if n1 < 1 or n2 < 1:
        raise ValueError("both groups need at least one observation")
    grid = np.arange(0.5, n + 1, 1.0) if grid is None else np.asarray(grid, dtype=float)
    _check_grid(grid, n)

    table = _psi_table(psi, n, Q)
    total = math.fsum(table)
    base_values = np.arange(1, n + 1, dtype=float)
    worst = 0.0
    for members in itertools.combinations(range(n), n1):
        labels = [0] * n
        for i in members:
            labels[i] = 1
        u = _u1_from_labels(tuple(labels), table, total)
        for drop in range(n):
            kept_vals = np.delete(base_values, drop)
            kept_labels = labels[:drop] + labels[drop + 1 :]
            for v in grid:
                if np.any(kept_vals == v):
                    continue
                slot = int(np.searchsorted(kept_vals, v))
                for g in (0, 1):
                    new = tuple(kept_labels[:slot] + [g] + kept_labels[slot:])
                    k = sum(new)
                    if k == 0 or k == n:
                        continue
                    worst = max(worst, abs(_u1_from_labels(new, table, total) - u))
    return worst


def _sign_matrix(n: int) -> np.ndarray:
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    return np.where(bits == 1, 1.0, -1.0)


def exact_w1_null(n: int, Q: int, psi: TransformSpec) -> Distribution:
    """Exact null distribution of W1 under independent fair signs."""
    if n > SIGN_MAX_N:
        raise TooLarge(f"n={n} exceeds {SIGN_MAX_N}")
    weights = np.array([psi(max(r - Q, 0)) for r in range(1, n + 1)], dtype=float)
    sums = _sign_matrix(n) @ weights
    return _collapse(sums, 2**n)


def exhaustive_w1_sensitivity(n: int, Q: int, psi: TransformSpec) -> float:
    """Largest |W1 change| when one pair is replaced, over all sign patterns and rank moves."""
    if n > SENSITIVITY_MAX_N:
        raise TooLarge(f"n={n} exceeds {SENSITIVITY_MAX_N}")
    weights = np.array([psi(max(r - Q, 0)) for r in range(1, n + 1)], dtype=float)
    worst = 0.0
    for signs in itertools.product((-1, 1), repeat=n):
        w = math.fsum(s * wt for s, wt in zip(signs, weights))
        for drop in range(n):
            rest = signs[:drop] + signs[drop + 1 :]
            for slot in range(n):
                for s in (-1, 1):
                    new = rest[:slot] + (s,) + rest[slot:]
                    w_new = math.fsum(t * wt for t, wt in zip(new, weights))
                    worst = max(worst, abs(w_new - w))
    return worst


def enumerate_srswor(values, k: int) -> tuple[float, float]:
    """Mean and variance of the size-k SRSWOR sum by listing every subset."""
    x = list(values)
    sums = [math.fsum(c) for c in itertools.combinations(x, k)]
    mean = math.fsum(sums) / len(sums)
    var = math.fsum((s - mean) ** 2 for s in sums) / len(sums)
    return mean, var
