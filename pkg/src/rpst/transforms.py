"""Rank transformations psi and the scalar summaries built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from ._numeric import fsum
from .errors import DegenerateSequence, InvalidTransform

FAMILIES = ("arctan", "log1p", "power", "identity", "square", "custom")

# grid 0..GRID_MAX used to check psi(0) = 0, monotonicity and non-negativity
GRID_MAX = 1024


@dataclass(frozen=True)
class TransformSpec:
    """A rank transformation from a named family.

    ``power`` takes an exponent ``k > 0``; ``sqrt`` and ``square`` are
    spelled as their own names when parsed. ``custom`` wraps an arbitrary
    vectorised callable and is validated the same way as the built-ins.
    """

    family: str
    k: float | None = None
    func: Callable | None = field(default=None, repr=False)
    label: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidTransform(f"unknown transform family {self.family!r}")
        if self.family == "power":
            if self.k is None or not math.isfinite(self.k) or self.k <= 0:
                raise InvalidTransform(f"power exponent must be positive, got {self.k!r}")
        if self.family == "custom" and self.func is None:
            raise InvalidTransform("custom transform needs a callable")
        self._validate()

    def _validate(self):
        grid = np.arange(GRID_MAX + 1, dtype=float)
        with np.errstate(all="ignore"):
            vals = np.asarray(self._eval(grid), dtype=float)
        if vals[0] != 0.0:
            raise InvalidTransform(f"psi(0) must be 0, got {vals[0]!r} for {self.name}")
        if not np.all(np.isfinite(vals)):
            raise InvalidTransform(f"{self.name} is not finite on 0..{GRID_MAX}")
        if np.any(vals < 0):
            raise InvalidTransform(f"{self.name} is negative on 0..{GRID_MAX}")
        if np.any(np.diff(vals) <= 0):
            raise InvalidTransform(f"{self.name} is not strictly increasing on 0..{GRID_MAX}")

    def _eval(self, r):
        fam = self.family
        if fam == "arctan":
            return np.arctan(r)
        if fam == "log1p":
            return np.log1p(r)
        if fam == "identity":
            return r * 1.0
        if fam == "square":
            return r * r
        if fam == "power":
            return np.power(r, self.k)
        return self.func(r)

    def __call__(self, r):
        """Evaluate psi elementwise; ranks must be non-negative."""
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0):
            raise ValueError("ranks must be non-negative")
        out = np.asarray(self._eval(arr), dtype=float)
        # psi(0) is exactly 0 even for callables with rounding near the origin
        out = np.where(arr == 0, 0.0, out)
        return float(out) if out.ndim == 0 else out

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.family == "power":
            if self.k == 0.5:
                return "sqrt"
            return f"power:{self.k:g}"
        return self.family

    def __str__(self):
        return self.name

    @classmethod
    def parse(cls, text: str) -> "TransformSpec":
        """Parse the names used on the command line and in sweep configs."""
        text = text.strip()
        if text == "sqrt":
            return cls("power", 0.5)
        if text.startswith("power:"):
            try:
                k = float(text.split(":", 1)[1])
            except ValueError:
                raise InvalidTransform(f"bad power exponent in {text!r}") from None
            return cls("power", k)
        if text in ("arctan", "log1p", "identity", "square"):
            return cls(text)
        raise InvalidTransform(f"unknown transform {text!r}")

    @classmethod
    def custom(cls, func: Callable, label: str = "custom") -> "TransformSpec":
        return cls("custom", func=func, label=label)


STANDARD_TRANSFORMS = ("arctan", "log1p", "sqrt", "identity", "square")


def standard_transforms() -> list[TransformSpec]:
    """The five built-in transformations, weakest to strongest growth."""
    return [TransformSpec.parse(name) for name in STANDARD_TRANSFORMS]


def apply(psi: TransformSpec, r: int) -> float:
    if r < 0:
        raise ValueError("rank must be non-negative")
    return float(psi(r))


@lru_cache(maxsize=512)
def _retained(psi: TransformSpec, m: int) -> np.ndarray:
    vals = psi(np.arange(1, m + 1, dtype=float)) if m > 0 else np.zeros(0)
    vals = np.asarray(vals, dtype=float)
    vals.setflags(write=False)
    return vals


def retained_values(psi: TransformSpec, n: int, Q: int) -> np.ndarray:
    """psi(1), ..., psi(n - Q) as a read-only array."""
    if not 0 <= Q <= n:
        raise ValueError(f"need 0 <= Q <= n, got Q={Q}, n={n}")
    return _retained(psi, n - Q)


@lru_cache(maxsize=512)
def _power_sums(psi: TransformSpec, m: int) -> tuple[float, float]:
    vals = _retained(psi, m)
    return fsum(vals), fsum(vals * vals)


def power_sums(psi: TransformSpec, n: int, Q: int) -> tuple[float, float]:
    """(sum psi(i), sum psi(i)^2) over i = 1..n-Q, compensated and cached."""
    if not 0 <= Q <= n:
        raise ValueError(f"need 0 <= Q <= n, got Q={Q}, n={n}")
    return _power_sums(psi, n - Q)


def psi_bar_q(psi: TransformSpec, n: int, Q: int) -> float:
    """Mean transformed rank over all n observations, zeroed ranks included."""
    s1, _ = power_sums(psi, n, Q)
    return s1 / n


def condition_ratio(psi: TransformSpec, n: int, Q: int, r: int) -> float:
    """mu_r / mu_2^(r/2) over the retained values psi(1..n-Q).

    Central moments use divisor n - Q. Large values flag transformations
    whose normal approximation will be poor at this sample size.
    """
    if r <= 2:
        raise ValueError("moment order must exceed 2")
    if n - Q < 2:
        raise ValueError("need at least two retained ranks")
    vals = retained_values(psi, n, Q)
    dev = vals - fsum(vals) / vals.size
    mu2 = fsum(dev**2) / vals.size
    if mu2 <= 0:
        raise DegenerateSequence("retained transformed ranks are constant")
    mur = fsum(dev**r) / vals.size
    return mur / mu2 ** (r / 2)
