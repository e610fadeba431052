from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

from ..errors import InvalidInterval


def _down(f: Fraction) -> float:
    v = float(f)
    return math.nextafter(v, -math.inf) if Fraction(v) > f else v


def _up(f: Fraction) -> float:
    v = float(f)
    return math.nextafter(v, math.inf) if Fraction(v) < f else v


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box with exact rational bounds.

    ``lower``/``upper`` are float views rounded outward, so float analysis on
    them over-approximates the exact box.
    """
    lo: Tuple[Fraction, ...]
    hi: Tuple[Fraction, ...]

    def __post_init__(self):
        lo = tuple(Fraction(v) for v in self.lo)
        hi = tuple(Fraction(v) for v in self.hi)
        if len(lo) != len(hi):
            raise InvalidInterval("lower and upper bounds differ in length")
        for i, (a, b) in enumerate(zip(lo, hi)):
            if a > b:
                raise InvalidInterval(f"dimension {i}: lower bound {a} exceeds upper bound {b}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_floats(cls, lo: Sequence[float], hi: Sequence[float]) -> "Box":
        for v in list(lo) + list(hi):
            if not math.isfinite(v):
                raise InvalidInterval("box bounds must be finite")
        return cls(tuple(Fraction(float(v)) for v in lo), tuple(Fraction(float(v)) for v in hi))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([_down(v) for v in self.lo])

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([_up(v) for v in self.hi])

    @cached_property
    def inner_lower(self) -> np.ndarray:
        """Float bounds rounded inward; points between them lie in the exact box."""
        v = np.array([_up(a) for a in self.lo])
        return np.minimum(v, self.inner_upper_raw)

    @cached_property
    def inner_upper_raw(self) -> np.ndarray:
        return np.array([_down(b) for b in self.hi])

    @property
    def inner_upper(self) -> np.ndarray:
        return np.maximum(self.inner_upper_raw, self.inner_lower)

    @property
    def widths(self) -> np.ndarray:
        return np.array([float(b - a) for a, b in zip(self.lo, self.hi)])

    @property
    def center(self) -> np.ndarray:
        return np.array([float((a + b) / 2) for a, b in zip(self.lo, self.hi)])

    def measure(self) -> Fraction:
        out = Fraction(1)
        for a, b in zip(self.lo, self.hi):
            out *= b - a
        return out

    def contains(self, x) -> bool:
        """Exact membership test of a float vector."""
        return all(a <= Fraction(float(v)) <= b for a, b, v in zip(self.lo, self.hi, x))

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def split(self, dim: int, parts: int = 2) -> list["Box"]:
        a, b = self.lo[dim], self.hi[dim]
        cuts = [a + (b - a) * Fraction(k, parts) for k in range(parts + 1)]
        out = []
        for k in range(parts):
            lo = list(self.lo)
            hi = list(self.hi)
            lo[dim], hi[dim] = cuts[k], cuts[k + 1]
            out.append(Box(tuple(lo), tuple(hi)))
        return out

    def corners(self):
        n = self.dim
        lo, hi = self.inner_lower, self.inner_upper
        for mask in range(1 << n):
            yield np.array([hi[i] if mask >> i & 1 else lo[i] for i in range(n)])

    def __str__(self):
        return " x ".join(f"[{float(a):g}, {float(b):g}]" for a, b in zip(self.lo, self.hi))
