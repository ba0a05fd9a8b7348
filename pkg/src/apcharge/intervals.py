"""Finite unions of half-open intervals [a, b) with exact endpoints."""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple

Interval = Tuple[Fraction, Fraction]


def _canon(pieces: Iterable[Tuple]) -> Tuple[Interval, ...]:
    out = []
    frac = lambda x: x if type(x) is Fraction else Fraction(x)
    for a, b in sorted((frac(a), frac(b)) for a, b in pieces):
        if b <= a:
            continue
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint, sorted, non-adjacent half-open intervals."""

    pieces: Tuple[Interval, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pieces", _canon(self.pieces))

    @classmethod
    def of(cls, *pieces) -> "IntervalSet":
        return cls(tuple(pieces))

    @classmethod
    def from_sorted(cls, pieces: Iterable[Interval]) -> "IntervalSet":
        """Pieces with Fraction endpoints, sorted by left end and not overlapping; touching ones merge."""
        out = []
        for a, b in pieces:
            if b <= a:
                continue
            if out and a <= out[-1][1]:
                out[-1] = (out[-1][0], max(out[-1][1], b))
            else:
                out.append((a, b))
        return cls._trusted(out)

    @classmethod
    def _trusted(cls, pieces: Tuple[Interval, ...]) -> "IntervalSet":
        """Wrap pieces already sorted, disjoint, non-adjacent and with Fraction endpoints."""
        out = object.__new__(cls)
        object.__setattr__(out, "pieces", tuple(pieces))
        return out

    def __bool__(self):
        return bool(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    def __len__(self):
        return len(self.pieces)

    def measure(self) -> Fraction:
        m = self.__dict__.get("_measure")
        if m is None:
            m = sum((b - a for a, b in self.pieces), Fraction(0))
            object.__setattr__(self, "_measure", m)
        return m

    def contains(self, x) -> bool:
        return any(a <= x < b for a, b in self.pieces)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.pieces + other.pieces)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out, i, j = [], 0, 0
        A, B = self.pieces, other.pieces
        while i < len(A) and j < len(B):
            lo, hi = max(A[i][0], B[j][0]), min(A[i][1], B[j][1])
            if lo < hi:
                out.append((lo, hi))
            if A[i][1] <= B[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet._trusted(out)

    def complement_in(self, lo, hi) -> "IntervalSet":
        lo, hi = Fraction(lo), Fraction(hi)
        out, cur = [], lo
        for a, b in self.clip(lo, hi):
            if cur < a:
                out.append((cur, a))
            cur = b
        if cur < hi:
            out.append((cur, hi))
        return IntervalSet._trusted(out)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        if not self.pieces:
            return self
        lo, hi = self.pieces[0][0], self.pieces[-1][1]
        return self.intersection(other.complement_in(lo, hi))

    def clip(self, lo, hi) -> "IntervalSet":
        if type(lo) is not Fraction:
            lo = Fraction(lo)
        if type(hi) is not Fraction:
            hi = Fraction(hi)
        P = self.pieces
        if not P or (lo <= P[0][0] and P[-1][1] <= hi):
            return self
        i = bisect.bisect_right(P, lo, key=lambda t: t[1])
        j = bisect.bisect_left(P, hi, key=lambda t: t[0])
        out = list(P[i:j])
        if out:
            if out[0][0] < lo:
                out[0] = (lo, out[0][1])
            if out[-1][1] > hi:
                out[-1] = (out[-1][0], hi)
        return IntervalSet._trusted(out)

    def shift(self, h) -> "IntervalSet":
        h = Fraction(h)
        return IntervalSet._trusted(tuple((a + h, b + h) for a, b in self.pieces))

    def hull(self):
        return (self.pieces[0][0], self.pieces[-1][1]) if self.pieces else None

    def format(self) -> str:
        return "".join(f"[{_num(a)},{_num(b)})" for a, b in self.pieces)


def _num(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else str(x)
