"""The density charge gamma on its computable carrier.

Sets are q-periodic unions of half-open intervals, perturbed on a bounded
region.  For these the window averages lambda(E n [-t, t]) / 2t converge, and
gamma(E) is the trace measure over the period.  Anything else would need a
Banach limit, which is not constructive, so combinations that leave the
carrier raise instead of returning a number.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import GridTooCoarse, IncommensurablePeriods, InvalidParameter
from .intervals import IntervalSet
from .quadrature import adaptive_gk, panels_for
from .rational import MAX_DEN, recognize

DEFAULT_GRID = 4096
DEFAULT_TOL = 1e-9


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class PeriodicSet:
    period: Fraction
    trace: IntervalSet = field(default_factory=IntervalSet)

    def __post_init__(self):
        q = _frac(self.period)
        if q <= 0:
            raise InvalidParameter(f"period must be positive, got {self.period}")
        tr = self.trace if isinstance(self.trace, IntervalSet) else IntervalSet(tuple(self.trace))
        for a, b in tr:
            if a < 0 or b > q:
                raise InvalidParameter(f"trace interval [{a},{b}) leaves [0,{q})")
        object.__setattr__(self, "period", q)
        object.__setattr__(self, "trace", tr)

    @property
    def trace_measure(self) -> Fraction:
        return self.trace.measure()

    @property
    def trivial(self) -> bool:
        """Empty or full trace: the set is periodic with every period."""
        return self.trace_measure in (0, self.period)

    def contains(self, x) -> bool:
        x = _frac(x)
        return self.trace.contains(x - self.period * math.floor(x / self.period))

    def window(self, lo, hi) -> IntervalSet:
        q = self.period
        lo, hi = _frac(lo), _frac(hi)
        pieces = []
        for k in range(lo // q, -(-hi // q)):
            s = k * q
            pieces.extend((a + s, b + s) for a, b in self.trace.clip(lo - s, hi - s))
        # tiles arrive in order; neighbours touch when the trace reaches both 0 and q
        return IntervalSet.from_sorted(pieces).clip(lo, hi)

    def window_on(self, region: IntervalSet) -> IntervalSet:
        """The set intersected with a bounded ``region``."""
        pieces = []
        for a, b in region:
            pieces.extend(self.window(a, b))
        return IntervalSet.from_sorted(pieces)

    def measure_from_zero(self, x) -> Fraction:
        """Signed measure of the set between 0 and x."""
        q, x = self.period, _frac(x)
        k = x // q
        r = x - k * q
        return k * self.trace_measure + self.trace.clip(0, r).measure()


    def retile(self, T: Fraction) -> "PeriodicSet":
        """Same set described with period T (a multiple of the period, or any T if trivial)."""
        if self.trivial:
            return PeriodicSet(T, IntervalSet(((0, T),)) if self.trace_measure else IntervalSet())
        return PeriodicSet(T, self.window(0, T))


@dataclass(frozen=True)
class DensitySet:
    """E = (periodic u plus) minus ``minus``, stored with plus outside and minus inside the periodic part."""

    periodic: PeriodicSet
    plus: IntervalSet = field(default_factory=IntervalSet)
    minus: IntervalSet = field(default_factory=IntervalSet)

    def __post_init__(self):
        plus = self.plus if isinstance(self.plus, IntervalSet) else IntervalSet(tuple(self.plus))
        minus = self.minus if isinstance(self.minus, IntervalSet) else IntervalSet(tuple(self.minus))
        support = plus.union(minus)
        if support:
            per = self.periodic.window_on(support)
            plus = plus.difference(minus).difference(per)
            minus = minus.intersection(per)
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    @classmethod
    def bounded(cls, *pieces) -> "DensitySet":
        return cls(PeriodicSet(1), IntervalSet(tuple(pieces)))

    @classmethod
    def whole_line(cls) -> "DensitySet":
        return cls(PeriodicSet(1, IntervalSet(((0, 1),))))

    @classmethod
    def empty(cls) -> "DensitySet":
        return cls(PeriodicSet(1))

    @property
    def period(self) -> Fraction:
        return self.periodic.period

    @property
    def perturbation_length(self) -> Fraction:
        return self.plus.measure() + self.minus.measure()

    def contains(self, x) -> bool:
        x = _frac(x)
        if self.minus.contains(x):
            return False
        return self.plus.contains(x) or self.periodic.contains(x)

    def window(self, lo, hi) -> IntervalSet:
        return self.periodic.window(lo, hi).union(self.plus.clip(lo, hi)).difference(self.minus)

    def window_on(self, region: IntervalSet) -> IntervalSet:
        return self.periodic.window_on(region).union(self.plus.intersection(region)).difference(self.minus)

    def window_measure(self, tau) -> Fraction:
        """lambda(E n [-tau, tau)), exactly."""
        tau = _frac(tau)
        per = self.periodic.measure_from_zero(tau) - self.periodic.measure_from_zero(-tau)
        return per + _measure_in(self.plus, tau) - _measure_in(self.minus, tau)

    def format(self) -> str:
        parts = [f"period={_fmt(self.period)}", f"trace={self.periodic.trace.format()}"]
        if self.plus:
            parts.append(f"plus={self.plus.format()}")
        if self.minus:
            parts.append(f"minus={self.minus.format()}")
        return ";".join(parts)


def _measure_in(S: IntervalSet, tau: Fraction) -> Fraction:
    if not S or (-tau <= S.pieces[0][0] and S.pieces[-1][1] <= tau):
        return S.measure()
    return S.clip(-tau, tau).measure()


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else str(x)


def gamma_eval(E: DensitySet) -> Fraction:
    """gamma(E) = trace measure / period; bounded perturbations are density-null."""
    return E.periodic.trace_measure / E.period


def common_multiple(p: Fraction, q: Fraction) -> Tuple[Fraction, Fraction]:
    """(T, snapped q) with T a common multiple of p and q; raises if p/q is not rational."""
    ratio = recognize(p / q, MAX_DEN)
    if ratio is None:
        raise IncommensurablePeriods(f"periods {float(p)!r} and {float(q)!r} have no common multiple "
                                     f"with denominator <= {MAX_DEN}; gamma of the combination "
                                     f"would need a Banach limit")
    # p / q = a / b  =>  T = b p = a q
    T = p * ratio.denominator
    return T, T / ratio.numerator


_OPS = {"union": "union", "∪": "union", "|": "union",
        "intersection": "intersection", "∩": "intersection", "&": "intersection",
        "complement": "complement", "∁": "complement", "~": "complement",
        "difference": "difference", "∖": "difference", "-": "difference"}


def set_algebra(E: DensitySet, F: Optional[DensitySet] = None, op: str = "union") -> DensitySet:
    kind = _OPS.get(op)
    if kind is None:
        raise InvalidParameter(f"unknown set operation {op!r}")
    if kind == "complement":
        tr = E.periodic.trace.complement_in(0, E.period)
        return DensitySet(PeriodicSet(E.period, tr), E.minus, E.plus)
    if F is None:
        raise InvalidParameter(f"{kind} needs two sets")
    if kind == "difference":
        return set_algebra(E, set_algebra(F, op="complement"), "intersection")
    pe, pf = E.periodic, F.periodic
    if pe.trivial and not pf.trivial:
        T = pf.period
    elif pf.trivial:
        T = pe.period
    else:
        T, snapped = common_multiple(pe.period, pf.period)
        pf = PeriodicSet(snapped, IntervalSet(tuple((a * snapped / pf.period, b * snapped / pf.period)
                                                    for a, b in pf.trace))) if snapped != pf.period else pf
    te, tf = pe.retile(T).trace, pf.retile(T).trace
    combine = (lambda A, B: A.union(B)) if kind == "union" else (lambda A, B: A.intersection(B))
    result = PeriodicSet(T, combine(te, tf))
    # off the perturbations both operands are periodic, so the result is too
    support = IntervalSet(E.plus.pieces + E.minus.pieces + F.plus.pieces + F.minus.pieces)
    if not support:
        return DensitySet(result)
    pe_s, pf_s = pe.window_on(support), pf.window_on(support)
    Pw = combine(pe_s, pf_s)
    Gw = combine(pe_s.union(E.plus.intersection(support)).difference(E.minus),
                 pf_s.union(F.plus.intersection(support)).difference(F.minus))
    # Gw \ Pw lies off the periodic part and Pw \ Gw inside it: already canonical
    out = object.__new__(DensitySet)
    for name, value in (("periodic", result), ("plus", Gw.difference(Pw)), ("minus", Pw.difference(Gw))):
        object.__setattr__(out, name, value)
    return out


def shift(E: DensitySet, h) -> DensitySet:
    """The translate E + h: the trace rotates within the period."""
    h = _frac(h)
    q = E.period
    r = h - q * math.floor(h / q)
    moved = E.periodic.trace.shift(r)
    wrapped = IntervalSet(tuple((a - q, b - q) for a, b in moved))
    trace = moved.union(wrapped).clip(0, q)
    return DensitySet(PeriodicSet(q, trace), E.plus.shift(h), E.minus.shift(h))


@dataclass(frozen=True)
class DensityProfile:
    samples: Tuple[Tuple[Fraction, Fraction], ...]
    estimate: Fraction
    residual: float
    error_bound: float


def density_profile(E: DensitySet, tau0=1, doublings: int = 10) -> DensityProfile:
    """Window averages lambda(E n [-tau_j, tau_j]) / 2 tau_j at tau_j = tau0 * 2^j.

    ``error_bound`` bounds |estimate - gamma(E)|: a partial period moves the
    periodic count by at most gamma (1 - gamma) q at each end, and the
    perturbations by their total length.
    """
    tau0 = _frac(tau0)
    if tau0 <= 0 or doublings < 0:
        raise InvalidParameter("tau0 must be positive and doublings nonnegative")
    samples = []
    for j in range(doublings + 1):
        tau = tau0 * 2 ** j
        samples.append((tau, E.window_measure(tau) / (2 * tau)))
    last = samples[-1][1]
    residual = float(abs(last - samples[-2][1])) if len(samples) > 1 else math.inf
    g = gamma_eval(E)
    bound = (g * (1 - g) * E.period + E.perturbation_length / 2) / samples[-1][0]
    return DensityProfile(tuple(samples), last, residual, float(bound))


# -- periodic functions -----------------------------------------------------

def periodic_distribution_levels(f: Callable[[np.ndarray], np.ndarray], period: float,
                                 levels: Sequence[float], grid: int = DEFAULT_GRID,
                                 tol: float = DEFAULT_TOL, start: float = 0.0) -> np.ndarray:
    """lambda({|f| > s} n [start, start + period)) / period for each level s.

    Crossings of |f| = s are bracketed on a uniform grid and bisected to width
    tol; each contributes at most tol/2 of error.
    """
    s = np.asarray(levels, dtype=float).reshape(-1)
    x = np.linspace(start, start + period, grid + 1)
    y = np.abs(np.asarray(f(x)))
    pos = y[None, :] > s[:, None]
    h = period / grid
    total = pos[:, :-1].sum(axis=1) * h
    cross = pos[:, :-1] != pos[:, 1:]
    counts = cross.sum(axis=1)
    if counts.size and counts.max() > grid // 4:
        raise GridTooCoarse(f"{int(counts.max())} crossings on a grid of {grid} cells; refine the grid")
    li, ci = np.nonzero(cross)
    if li.size:
        lo, hi = x[ci].copy(), x[ci + 1].copy()
        left = pos[li, ci]
        while np.max(hi - lo) > tol:
            mid = (lo + hi) / 2
            same = (np.abs(np.asarray(f(mid))) > s[li]) == left
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        c = (lo + hi) / 2
        # replace the left-sign cell contribution by the split one
        corr = np.where(left, c - x[ci], x[ci + 1] - c) - np.where(left, h, 0.0)
        np.add.at(total, li, corr)
    return total / period


def periodic_distribution(f, period: float, s: float, grid: int = DEFAULT_GRID, tol: float = DEFAULT_TOL) -> float:
    """gamma_f(s) = lambda({|f| > s} n [0, q)) / q for a q-periodic f."""
    return float(periodic_distribution_levels(f, period, [s], grid, tol)[0])


def periodic_integral(f, period: float, anchor: float = 0.0, tol: float = DEFAULT_TOL,
                      max_freq: Optional[float] = None) -> float:
    """(1 / 2q) int_{a-q}^{a+q} f, the gamma-integral of a q-periodic f."""
    q = float(period)
    n = panels_for(2 * q, max_freq) if max_freq is not None else 64
    return adaptive_gk(f, anchor - q, anchor + q, tol * 2 * q, n) / (2 * q)


# -- text format --------------------------------------------------------------

_INTERVAL = re.compile(r"\[\s*([^,\[\])]+?)\s*,\s*([^,\[\])]+?)\s*\)")


def _parse_intervals(text: str) -> IntervalSet:
    text = text.strip()
    if not text:
        return IntervalSet()
    found = _INTERVAL.findall(text)
    if _INTERVAL.sub("", text).strip():
        raise InvalidParameter(f"cannot parse intervals {text!r}; expected [a,b)[c,d)...")
    return IntervalSet(tuple((_frac(a), _frac(b)) for a, b in found))


def parse_density_set(parsed: str) -> DensitySet:
    """``period=<q>;trace=[a,b)...;plus=[..];minus=[..]`` (all keys optional)."""
    fields = {}
    for part in filter(None, (p.strip() for p in parsed.split(";"))):
        key, sep, val = part.partition("=")
        key = key.strip().lower()
        if not sep or key not in ("period", "trace", "plus", "minus") or key in fields:
            raise InvalidParameter(f"bad set field {part!r}")
        fields[key] = val
    try:
        period = _frac(fields.get("period", "1"))
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidParameter(f"bad period {fields.get('period')!r}") from exc
    return DensitySet(PeriodicSet(period, _parse_intervals(fields.get("trace", ""))),
                      _parse_intervals(fields.get("plus", "")), _parse_intervals(fields.get("minus", "")))
