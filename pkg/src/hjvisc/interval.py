"""Closed bounded real intervals.

An :class:`Interval` is the value type of every interval-valued function in
this package: a pair ``[lo, hi]`` of finite reals with ``lo <= hi``.  A point
interval (``lo == hi``) identifies a real number.  General interval
arithmetic is deliberately out of scope; only the handful of operations the
function algebra needs live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed bounded interval [lo, hi], lo <= hi, both finite."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo = float(self.lo)
        hi = float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval bounds must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"degenerate interval: lo={lo} > hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, v: float) -> Interval:
        """Point interval [v, v]."""
        return cls(v, v)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def width(self) -> float:
        """hi - lo; zero exactly for point intervals."""
        return self.hi - self.lo

    def contains(self, inner: Interval) -> bool:
        """Inclusion inner ⊆ self (reflexive partial order)."""
        return self.lo <= inner.lo and inner.hi <= self.hi

    def contains_value(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def hull(self, other: Interval) -> Interval:
        """Smallest interval containing both operands."""
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def to_json(self) -> float | list[float]:
        """Point intervals serialize as a bare number, others as [lo, hi]."""
        if self.is_point:
            return self.lo
        return [self.lo, self.hi]

    @classmethod
    def from_json(cls, data: object) -> Interval:
        if isinstance(data, (int, float)) and not isinstance(data, bool):
            return cls.point(float(data))
        if isinstance(data, (list, tuple)) and len(data) == 2:
            return cls(float(data[0]), float(data[1]))
        raise ValueError(f"expected number or [lo, hi] pair, got {data!r}")

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def width(v: Interval) -> float:
    return v.width()


def contains(outer: Interval, inner: Interval) -> bool:
    return outer.contains(inner)


def hull(a: Interval, b: Interval) -> Interval:
    return a.hull(b)
