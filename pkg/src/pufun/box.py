"""Axis-aligned intervals and hyperrectangles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError

# relative slack used for closed-box membership tests
MEMBERSHIP_RTOL = 1e-14


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
            raise InvalidArgumentError(f"invalid interval [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_unit(self, x):
        """Affine map from ``[lo, hi]`` onto ``[-1, 1]``."""
        return 2.0 * (np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo) - 1.0

    def from_unit(self, s):
        s = np.asarray(s, dtype=float)
        return 0.5 * (self.hi + self.lo) + 0.5 * (self.hi - self.lo) * s


def as_interval(obj) -> Interval:
    if isinstance(obj, Interval):
        return obj
    lo, hi = obj
    return Interval(lo, hi)


@dataclass(frozen=True)
class Box:
    """Closed hyperrectangle ``prod_j [lo_j, hi_j]``.

    Used both for zones (the nonoverlapping pieces of a bisection) and for
    the overlapping patch domains built around them.
    """

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or len(lo) == 0:
            raise InvalidArgumentError("box bounds must be nonempty and equal length")
        for a, b in zip(lo, hi):
            Interval(a, b)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_intervals(cls, intervals: Iterable) -> "Box":
        ivs = [as_interval(iv) for iv in intervals]
        return cls(tuple(iv.lo for iv in ivs), tuple(iv.hi for iv in ivs))

    @classmethod
    def cube(cls, d: int, lo: float = -1.0, hi: float = 1.0) -> "Box":
        return cls((lo,) * d, (hi,) * d)

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def intervals(self) -> tuple:
        return tuple(Interval(a, b) for a, b in zip(self.lo, self.hi))

    def interval(self, j: int) -> Interval:
        return Interval(self.lo[j], self.hi[j])

    @property
    def widths(self) -> np.ndarray:
        return np.subtract(self.hi, self.lo)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * np.add(self.hi, self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def replace(self, j: int, lo: float, hi: float) -> "Box":
        new_lo, new_hi = list(self.lo), list(self.hi)
        new_lo[j], new_hi[j] = lo, hi
        return Box(tuple(new_lo), tuple(new_hi))

    def contains(self, points, rtol: float = MEMBERSHIP_RTOL) -> np.ndarray:
        """Closed membership mask for an ``(P, d)`` array (or a single point)."""
        x = np.asarray(points, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        slack = rtol * self.widths
        inside = np.all((x >= np.subtract(self.lo, slack)) & (x <= np.add(self.hi, slack)), axis=1)
        return bool(inside[0]) if single else inside

    def contains_box(self, other: "Box", rtol: float = MEMBERSHIP_RTOL) -> bool:
        slack = rtol * self.widths
        return bool(
            np.all(np.asarray(other.lo) >= np.subtract(self.lo, slack))
            and np.all(np.asarray(other.hi) <= np.add(self.hi, slack))
        )

    def hull(self, other: "Box") -> "Box":
        return Box(
            tuple(min(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(max(a, b) for a, b in zip(self.hi, other.hi)),
        )

    def intersects(self, other: "Box") -> bool:
        """True when the interiors overlap."""
        return all(a < d and c < b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def to_unit(self, points) -> np.ndarray:
        """Map ``(P, d)`` points affinely onto ``[-1, 1]^d``."""
        x = np.asarray(points, dtype=float)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return 2.0 * (x - lo) / (hi - lo) - 1.0

    def as_list(self) -> list:
        return [[a, b] for a, b in zip(self.lo, self.hi)]

    @classmethod
    def from_list(cls, pairs: Sequence[Sequence[float]]) -> "Box":
        return cls.from_intervals(pairs)

    def __repr__(self) -> str:
        return "Box(" + " x ".join(f"[{a:.6g}, {b:.6g}]" for a, b in zip(self.lo, self.hi)) + ")"
