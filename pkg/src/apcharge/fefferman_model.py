"""Concrete measure-space model for the finite/co-finite charge.

The model space is N u {inf}: point n carries mass w_n and the extra point
``inf`` carries the mass V - sum(w_n) that the charge assigns to co-finite
sets but no finite set sees.  Countable additivity holds there by
construction, so Cauchy-in-charge sequences of simple functions have genuine
limits, and their norms can be compared with the charge-side values.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from . import charge_core as cc
from . import tm_spaces as tm
from .charge_core import Charge, FiniteCofinite, SimpleFunction, StepDistribution
from .errors import InvalidParameter, NotCauchy, TailNotConvergent, TruncationBoundExceedsTol
from .lorentz import LorentzParams, lorentz_norm_from_distribution


@dataclass(frozen=True)
class CofiniteModelSpace:
    weights: object
    total: object

    @classmethod
    def from_charge(cls, mu: Charge) -> "CofiniteModelSpace":
        if not isinstance(mu.field, FiniteCofinite):
            raise InvalidParameter("the model is built for finite/co-finite charges")
        return cls(mu.point_weights, mu.total_mass)

    def __post_init__(self):
        if self.infinity_mass < 0:
            raise InvalidParameter("point weights exceed the total mass")

    @property
    def series_sum(self):
        s = getattr(self.weights, "series_sum", None)
        if s is None:
            raise TruncationBoundExceedsTol("weights provide no closed-form series sum")
        return s

    @property
    def infinity_mass(self):
        return self.total - self.series_sum

    def weight(self, n: int):
        return self.weights.weight(n)

    def measure(self, points: Iterable[int] = (), rest_of_n: bool = False, infinity: bool = False):
        """Mass of a listed set of points, optionally with all unlisted points and/or inf."""
        pts = sorted(set(points))
        listed = sum((self.weight(n) for n in pts), 0)
        out = listed
        if rest_of_n:
            out += self.series_sum - listed
        if infinity:
            out += self.infinity_mass
        return out


@dataclass(frozen=True)
class ModelFunction:
    """Function on N u {inf}: ``exceptions`` on listed points, ``tail_value`` elsewhere on N."""

    exceptions: Tuple[Tuple[int, float], ...] = ()
    tail_value: object = 0
    infinity_value: object = 0

    def __post_init__(self):
        ex = dict(self.exceptions)
        if len(ex) != len(self.exceptions):
            raise InvalidParameter("duplicate exception points")
        canon = tuple(sorted((n, v) for n, v in ex.items() if v != self.tail_value))
        object.__setattr__(self, "exceptions", canon)

    def __call__(self, n):
        if n == math.inf:
            return self.infinity_value
        return dict(self.exceptions).get(n, self.tail_value)

    def combine(self, other: "ModelFunction", fn: Callable) -> "ModelFunction":
        pts = sorted({n for n, _ in self.exceptions} | {n for n, _ in other.exceptions})
        return ModelFunction(tuple((n, fn(self(n), other(n))) for n in pts),
                             fn(self.tail_value, other.tail_value),
                             fn(self.infinity_value, other.infinity_value))

    def values(self) -> List:
        return [v for _, v in self.exceptions] + [self.tail_value, self.infinity_value]


def embed_simple(f: SimpleFunction) -> ModelFunction:
    """Image of a simple function: points keep their values, inf takes the co-finite value."""
    if not isinstance(f.field, FiniteCofinite):
        raise InvalidParameter("embed_simple expects a function on finite/co-finite sets")
    tail = 0
    for v, E in f.terms:
        if E.cofinite:
            tail = v
    listed = sorted(set().union(*(E.points for _, E in f.terms))) if f.terms else []
    return ModelFunction(tuple((n, f(n)) for n in listed), tail, tail)


def embed_sequence(seq: tm.SimpleFunctionSequence, tol: float = tm.DEFAULT_TOL,
                   delta: Optional[float] = None) -> ModelFunction:
    """Limit in the model measure, read off at the horizon.

    Points up to N take f_N(n).  Points beyond N take the common value of f_N
    on (N/2, N] when it is constant there, otherwise the co-finite value of
    f_N; these points carry at most the tail mass beyond N.  The point inf
    takes the co-finite value of f_N, which must be settled on the ladder
    because inf carries positive mass.
    """
    diag = tm.is_cauchy(seq, tol if delta is None else delta, tol)
    if not diag.converged:
        raise NotCauchy(f"sequence is not Cauchy at the horizon (residual {diag.residual:.3g})")
    n, N = seq.ladder()
    hi, lo = embed_simple(seq[N]), embed_simple(seq[n])
    if abs(hi.infinity_value - lo.infinity_value) > tol:
        raise TailNotConvergent(f"co-finite values {lo.infinity_value!r} -> {hi.infinity_value!r} "
                                f"do not settle within tol {tol:.3g}")
    f_N = seq[N]
    frontier = {f_N(k) for k in range(n + 1, N + 1)}
    beyond = frontier.pop() if len(frontier) == 1 else hi.tail_value
    return ModelFunction(tuple((k, f_N(k)) for k in range(1, N + 1)), beyond, hi.infinity_value)


def _mass_pairs(space: CofiniteModelSpace, g: ModelFunction):
    pts = [n for n, _ in g.exceptions]
    pairs = [(v, space.weight(n)) for n, v in g.exceptions]
    pairs.append((g.tail_value, space.series_sum - sum((space.weight(n) for n in pts), 0)))
    pairs.append((g.infinity_value, space.infinity_mass))
    return [(v, m) for v, m in pairs if m != 0]


def model_distribution(space: CofiniteModelSpace, g: ModelFunction) -> StepDistribution:
    mass: Dict = {}
    for v, m in _mass_pairs(space, g):
        if v != 0:
            mass[abs(v)] = mass.get(abs(v), 0) + m
    levels = sorted(mass)
    return StepDistribution(tuple(levels), tuple(sum((mass[a] for a in levels[i:]), 0)
                                                 for i in range(len(levels))))


def parse_space(space: str):
    """'integral', 'tmdot', 'L<p>' or 'L<p>,<q>' (p, q numbers or 'inf')."""
    s = space.replace(" ", "")
    if s in ("integral", "tmdot"):
        return (s,)
    m = re.fullmatch(r"L(inf|[0-9.]+)(?:,(inf|[0-9.]+))?", s)
    if not m:
        raise InvalidParameter(f"unknown space {space!r}")
    p = float(m.group(1))
    if m.group(2) is None:
        return ("Lp", p)
    return ("Lpq", p, float(m.group(2)))


def model_norm(space: CofiniteModelSpace, g: ModelFunction, kind: str) -> float:
    """Exact norm or integral of a model function; ``kind`` as in :func:`parse_space`."""
    parsed = parse_space(kind)
    pairs = _mass_pairs(space, g)
    if parsed[0] == "integral":
        return float(sum((v * m for v, m in pairs), 0))
    d = model_distribution(space, g)
    if parsed[0] == "tmdot":
        best = d.right_end
        for a, _, c in d.pieces():
            best = min(best, max(a, c))
        return float(min(1, best))
    if parsed[0] == "Lp":
        p = parsed[1]
        if math.isinf(p):
            return float(d.right_end)
        return float(sum((abs(v) ** p * m for v, m in pairs), 0)) ** (1 / p)
    return lorentz_norm_from_distribution(d, LorentzParams(parsed[1], parsed[2]))


def charge_side_norm(seq: tm.SimpleFunctionSequence, kind: str, tol: float) -> tm.LimitDiagnostic:
    parsed = parse_space(kind)
    if parsed[0] == "integral":
        return tm.integrate_sequence(seq, tol)
    if parsed[0] == "tmdot":
        return tm.tmdot_norm(seq, tol)
    if parsed[0] == "Lp":
        return tm.ldot_p_norm(seq, parsed[1], tol)
    return tm.ldot_pq_norm(seq, LorentzParams(parsed[1], parsed[2]), tol)


@dataclass(frozen=True)
class IsometryRow:
    space: str
    charge_value: float
    model_value: float
    discrepancy: float
    residual: float

    @property
    def ok(self) -> bool:
        return self.discrepancy <= self.residual + 1e-9


@dataclass(frozen=True)
class IsometryReport:
    rows: Tuple[IsometryRow, ...]
    multiplication_error: float
    order_preserved: bool

    @property
    def max_discrepancy(self) -> float:
        return max((r.discrepancy for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows) and self.multiplication_error <= 1e-12 and self.order_preserved

    def to_json(self):
        return {"rows": [r.__dict__ for r in self.rows],
                "multiplication_error": self.multiplication_error,
                "order_preserved": self.order_preserved,
                "max_discrepancy": self.max_discrepancy,
                "passed": self.passed}


DEFAULT_SPACES = ("integral", "tmdot", "L1", "L2", "L2,1", "L3,inf")


def verify_isometry(seq: tm.SimpleFunctionSequence, spaces: Sequence[str] = DEFAULT_SPACES,
                    tol: float = tm.DEFAULT_TOL) -> IsometryReport:
    space = CofiniteModelSpace.from_charge(seq.charge)
    g = embed_sequence(seq, tol)
    rows = []
    for kind in spaces:
        diag = charge_side_norm(seq, kind, tol)
        mv = model_norm(space, g, kind)
        rows.append(IsometryRow(kind, diag.estimate, mv, abs(diag.estimate - mv), diag.residual))
    square = embed_sequence(seq.combine(seq, "*"), tol)
    product = g.combine(g, lambda a, b: a * b)
    mult_err = max(float(abs(a - b)) for a, b in zip(_on_grid(square, seq.horizon), _on_grid(product, seq.horizon)))
    order_ok = (not tm.order_geq_zero(seq, tol)) or min(g.values()) >= -tol
    return IsometryReport(tuple(rows), mult_err, bool(order_ok))


def _on_grid(g: ModelFunction, horizon: int):
    return [g(n) for n in range(1, horizon + 2)] + [g.tail_value, g.infinity_value]
