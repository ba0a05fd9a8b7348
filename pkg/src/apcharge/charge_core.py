"""Fields of sets, charges, simple functions and their distributions.

Two carriers are provided: the power set of a finite list of atoms, and the
field of finite and co-finite subsets of the positive integers.  Weights may
be ``Fraction`` instances, in which case every integral and distribution in
this module is computed exactly.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Real
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import InvalidParameter

Number = Union[int, Fraction, float]

DEFAULT_TOL = 1e-12


# ---------------------------------------------------------------------------
# sets and fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SetExpr:
    """A finite set of points, or (``cofinite=True``) the universe minus them."""

    points: Tuple[Any, ...] = ()
    cofinite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(set(self.points))))

    @cached_property
    def _lookup(self) -> frozenset:
        return frozenset(self.points)

    def contains(self, x) -> bool:
        return (x in self._lookup) != self.cofinite

    def __repr__(self):
        body = "{" + ", ".join(map(str, self.points)) + "}"
        return f"SetExpr(N \\ {body})" if self.cofinite else f"SetExpr({body})"


def finite(*points) -> SetExpr:
    return SetExpr(points)


def cofinite(*points) -> SetExpr:
    return SetExpr(points, cofinite=True)


class FieldOfSets(ABC):
    """Boolean operations over one carrier.  Implementations are immutable."""

    @abstractmethod
    def universe(self) -> SetExpr: ...

    @abstractmethod
    def complement(self, E: SetExpr) -> SetExpr: ...

    @abstractmethod
    def union(self, E: SetExpr, F: SetExpr) -> SetExpr: ...

    @abstractmethod
    def is_member(self, E: SetExpr) -> bool: ...

    @abstractmethod
    def cells(self, sets: Iterable[SetExpr]) -> List[Tuple[Any, SetExpr]]:
        """Partition the universe into cells on which every given set is constant.

        Returns ``(representative point, cell)`` pairs.
        """

    def empty(self) -> SetExpr:
        return SetExpr()

    def intersection(self, E: SetExpr, F: SetExpr) -> SetExpr:
        return self.complement(self.union(self.complement(E), self.complement(F)))

    def difference(self, E: SetExpr, F: SetExpr) -> SetExpr:
        return self.intersection(E, self.complement(F))

    def is_empty(self, E: SetExpr) -> bool:
        return E == self.empty()

    def disjoint(self, E: SetExpr, F: SetExpr) -> bool:
        return self.is_empty(self.intersection(E, F))

    def pairwise_disjoint(self, sets: Sequence[SetExpr]) -> bool:
        return all(self.disjoint(sets[i], sets[j]) for i in range(len(sets)) for j in range(i + 1, len(sets)))

    def union_all(self, sets: Iterable[SetExpr]) -> SetExpr:
        out = self.empty()
        for E in sets:
            out = self.union(out, E)
        return out


@dataclass(frozen=True)
class FinitePowerSet(FieldOfSets):
    atoms: Tuple[Any, ...]

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if len(set(atoms)) != len(atoms):
            raise InvalidParameter("atoms must be distinct")
        object.__setattr__(self, "atoms", tuple(sorted(atoms)))

    def _check(self, E: SetExpr) -> SetExpr:
        if not self.is_member(E):
            raise InvalidParameter(f"{E!r} is not a subset of the atoms")
        if E.cofinite:
            return SetExpr(set(self.atoms) - set(E.points))
        return E

    def is_member(self, E: SetExpr) -> bool:
        return set(E.points) <= set(self.atoms)

    def universe(self) -> SetExpr:
        return SetExpr(self.atoms)

    def complement(self, E: SetExpr) -> SetExpr:
        E = self._check(E)
        return SetExpr(set(self.atoms) - set(E.points))

    def union(self, E: SetExpr, F: SetExpr) -> SetExpr:
        E, F = self._check(E), self._check(F)
        return SetExpr(set(E.points) | set(F.points))

    def intersection(self, E: SetExpr, F: SetExpr) -> SetExpr:
        E, F = self._check(E), self._check(F)
        return SetExpr(set(E.points) & set(F.points))

    def pairwise_disjoint(self, sets: Sequence[SetExpr]) -> bool:
        seen: set = set()
        for E in sets:
            pts = self._check(E).points
            if not seen.isdisjoint(pts):
                return False
            seen.update(pts)
        return True

    def cells(self, sets=()):
        return [(a, SetExpr((a,))) for a in self.atoms]


@dataclass(frozen=True)
class FiniteCofinite(FieldOfSets):
    """Finite and co-finite subsets of {1, 2, 3, ...}."""

    def is_member(self, E: SetExpr) -> bool:
        return all(isinstance(n, int) and n >= 1 for n in E.points)

    def universe(self) -> SetExpr:
        return SetExpr((), cofinite=True)

    def complement(self, E: SetExpr) -> SetExpr:
        return SetExpr(E.points, cofinite=not E.cofinite)

    def union(self, E: SetExpr, F: SetExpr) -> SetExpr:
        A, B = set(E.points), set(F.points)
        if E.cofinite and F.cofinite:
            return SetExpr(A & B, cofinite=True)
        if E.cofinite:
            return SetExpr(A - B, cofinite=True)
        if F.cofinite:
            return SetExpr(B - A, cofinite=True)
        return SetExpr(A | B)

    def intersection(self, E: SetExpr, F: SetExpr) -> SetExpr:
        A, B = set(E.points), set(F.points)
        if E.cofinite and F.cofinite:
            return SetExpr(A | B, cofinite=True)
        if E.cofinite:
            return SetExpr(B - A)
        if F.cofinite:
            return SetExpr(A - B)
        return SetExpr(A & B)

    def pairwise_disjoint(self, sets: Sequence[SetExpr]) -> bool:
        # two co-finite sets always meet; a finite set misses N \ A iff it lies in A
        seen: set = set()
        cof = [E for E in sets if E.cofinite]
        for E in sets:
            if not E.cofinite:
                if not seen.isdisjoint(E.points):
                    return False
                seen.update(E.points)
        if len(cof) > 1:
            return False
        return not cof or seen <= cof[0]._lookup

    def cells(self, sets=()):
        listed = sorted(set().union(*(E.points for E in sets))) if sets else []
        out = [(n, SetExpr((n,))) for n in listed]
        out.append((listed[-1] + 1 if listed else 1, SetExpr(listed, cofinite=True)))
        return out


# ---------------------------------------------------------------------------
# charges
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometricWeights:
    """Point weights w_n = scale * ratio**n, n >= 1."""

    scale: Number = 1
    ratio: Number = Fraction(1, 2)

    def __post_init__(self):
        if not 0 < self.ratio < 1 or self.scale < 0:
            raise InvalidParameter("need scale >= 0 and 0 < ratio < 1")

    def weight(self, n: int) -> Number:
        return self.scale * self.ratio ** n

    @property
    def series_sum(self) -> Number:
        return self.scale * self.ratio / (1 - self.ratio)

    def tail(self, n: int) -> Number:
        """Sum of w_k over k > n."""
        return self.scale * self.ratio ** (n + 1) / (1 - self.ratio)

    def to_json(self):
        return {"kind": "geometric", "scale": _num_to_json(self.scale), "ratio": _num_to_json(self.ratio)}


@dataclass(frozen=True)
class FiniteWeights:
    """Weights w_1..w_K given explicitly; w_n = 0 for n > K."""

    values: Tuple[Number, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if any(v < 0 for v in self.values):
            raise InvalidParameter("weights must be nonnegative")

    def weight(self, n: int) -> Number:
        return self.values[n - 1] if 1 <= n <= len(self.values) else 0

    @property
    def series_sum(self) -> Number:
        return sum(self.values, 0)

    def tail(self, n: int) -> Number:
        return sum(self.values[max(n, 0):], 0)

    def to_json(self):
        return {"kind": "finite", "values": [_num_to_json(v) for v in self.values]}


@dataclass(frozen=True)
class Charge:
    """A finitely additive, finite, nonnegative set function on a field."""

    field: FieldOfSets
    atom_weights: Optional[Tuple[Tuple[Any, Number], ...]] = None
    point_weights: Optional[Union[GeometricWeights, FiniteWeights]] = None
    total_mass: Number = 0

    @classmethod
    def power_set(cls, weights: Mapping[Any, Number]) -> "Charge":
        if any(w < 0 for w in weights.values()):
            raise InvalidParameter("weights must be nonnegative")
        fld = FinitePowerSet(tuple(weights))
        items = tuple((a, weights[a]) for a in fld.atoms)
        return cls(fld, atom_weights=items, total_mass=sum(weights.values(), 0))

    @classmethod
    def finite_cofinite(cls, weights=None, total_mass: Number = 5) -> "Charge":
        weights = GeometricWeights() if weights is None else weights
        if total_mass < weights.series_sum:
            raise InvalidParameter("total mass must dominate the sum of point weights")
        return cls(FiniteCofinite(), point_weights=weights, total_mass=total_mass)

    @cached_property
    def _atom_lookup(self) -> Dict[Any, Number]:
        return dict(self.atom_weights or ())

    def weight(self, x) -> Number:
        if self.point_weights is not None:
            return self.point_weights.weight(x)
        return self._atom_lookup[x]

    def measure(self, E: SetExpr) -> Number:
        if not self.field.is_member(E):
            raise InvalidParameter(f"{E!r} is not in the field")
        listed = sum((self.weight(x) for x in E.points), 0)
        if E.cofinite:
            return self.total_mass - listed
        return listed

    __call__ = measure

    def to_json(self) -> Dict[str, Any]:
        if self.point_weights is not None:
            return {"variant": "finite_cofinite", "weights": self.point_weights.to_json(),
                    "total_mass": _num_to_json(self.total_mass)}
        return {"variant": "finite_power_set",
                "atom_weights": {str(a): _num_to_json(w) for a, w in self.atom_weights},
                "total_mass": _num_to_json(self.total_mass)}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "Charge":
        variant = obj.get("variant")
        if variant == "finite_power_set":
            weights = {_atom_from_json(k): _num_from_json(v) for k, v in obj["atom_weights"].items()}
            return cls.power_set(weights)
        if variant == "finite_cofinite":
            w = obj["weights"]
            if w["kind"] == "geometric":
                pw = GeometricWeights(_num_from_json(w["scale"]), _num_from_json(w["ratio"]))
            elif w["kind"] == "finite":
                pw = FiniteWeights(tuple(_num_from_json(v) for v in w["values"]))
            else:
                raise InvalidParameter(f"unknown weight kind {w['kind']!r}")
            return cls.finite_cofinite(pw, _num_from_json(obj["total_mass"]))
        raise InvalidParameter(f"unknown charge variant {variant!r}")


def halving_charge(total_mass: Number = 5) -> Charge:
    """mu({n}) = 2**-n on finite/co-finite subsets of N, mu(N) = total_mass."""
    return Charge.finite_cofinite(GeometricWeights(1, Fraction(1, 2)), total_mass)


def _num_to_json(x):
    if isinstance(x, Fraction):
        return str(x)
    return x


def _num_from_json(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def _atom_from_json(key: str):
    try:
        return int(key)
    except ValueError:
        return key


def outer_charge(mu: Charge, E: SetExpr) -> Number:
    """Infimum of mu(F) over field sets F containing E.

    Every representable set is a member of the field, so the infimum is
    attained at F = E.
    """
    return mu.measure(E)


# ---------------------------------------------------------------------------
# simple functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimpleFunction:
    """Finite sum of value * indicator terms over pairwise disjoint sets.

    The stored form is canonical: one term per distinct nonzero value, no
    empty sets, terms sorted by value.
    """

    field: FieldOfSets
    terms: Tuple[Tuple[Number, SetExpr], ...] = ()

    def __post_init__(self):
        terms = [(v, E) for v, E in self.terms]
        for v, E in terms:
            if not self.field.is_member(E):
                raise InvalidParameter(f"{E!r} is not in the field")
        if not self.field.pairwise_disjoint([E for _, E in terms]):
            raise InvalidParameter("level sets must be pairwise disjoint")
        merged: Dict[Number, SetExpr] = {}
        for v, E in terms:
            if v == 0 or self.field.is_empty(E):
                continue
            merged[v] = self.field.union(merged[v], E) if v in merged else E
        object.__setattr__(self, "terms", tuple(sorted(merged.items(), key=lambda t: t[0])))

    @classmethod
    def zero(cls, fld: FieldOfSets) -> "SimpleFunction":
        return cls(fld, ())

    @property
    def values(self) -> Tuple[Number, ...]:
        return tuple(v for v, _ in self.terms)

    def support(self) -> SetExpr:
        return self.field.union_all(E for _, E in self.terms)

    def value_at(self, x) -> Number:
        for v, E in self.terms:
            if E.contains(x):
                return v
        return 0

    __call__ = value_at

    def map(self, fn: Callable[[Number], Number]) -> "SimpleFunction":
        """Pointwise ``fn(f)``; ``fn(0)`` is assigned off the support."""
        terms = [(fn(v), E) for v, E in self.terms]
        z = fn(0)
        if z != 0:
            terms.append((z, self.field.complement(self.support())))
        return SimpleFunction(self.field, tuple(terms))

    def __neg__(self):
        return self.map(lambda v: -v)

    def __abs__(self):
        return self.map(abs)

    def __add__(self, other):
        return lattice_and_arith(self, other, "+")

    def __sub__(self, other):
        return lattice_and_arith(self, other, "-")

    def __mul__(self, other):
        if isinstance(other, SimpleFunction):
            return lattice_and_arith(self, other, "*")
        return self.map(lambda v: v * other)

    __rmul__ = __mul__

    def positive_part(self) -> "SimpleFunction":
        return self.map(lambda v: v if v > 0 else 0)

    def negative_part(self) -> "SimpleFunction":
        return self.map(lambda v: -v if v < 0 else 0)

    def level_set(self, predicate: Callable[[Number], bool]) -> SetExpr:
        """Union of level sets whose value satisfies ``predicate`` (value 0 excluded)."""
        return self.field.union_all(E for v, E in self.terms if predicate(v))


def indicator(fld: FieldOfSets, E: SetExpr, value: Number = 1) -> SimpleFunction:
    return SimpleFunction(fld, ((value, E),))


_OPS: Dict[str, Callable[[Number, Number], Number]] = {
    "max": max, "min": min,
    "add": lambda a, b: a + b, "sub": lambda a, b: a - b, "mul": lambda a, b: a * b,
    "abs": lambda a, b: abs(a),
}
_OP_ALIASES = {"∨": "max", "∧": "min", "+": "add", "-": "sub", "−": "sub",
               "*": "mul", "·": "mul", "|·|": "abs"}


def lattice_and_arith(f: SimpleFunction, g: Optional[SimpleFunction], op: str) -> SimpleFunction:
    """Pointwise max/min/+/-/*/abs of simple functions on their common refinement."""
    name = _OP_ALIASES.get(op, op)
    if name not in _OPS:
        raise InvalidParameter(f"unknown operation {op!r}")
    if g is None:
        g = SimpleFunction.zero(f.field)
    if f.field != g.field:
        raise InvalidParameter("functions live on different fields")
    fn = _OPS[name]
    sets = [E for _, E in f.terms] + [E for _, E in g.terms]
    terms = [(fn(f.value_at(x), g.value_at(x)), cell) for x, cell in f.field.cells(sets)]
    return SimpleFunction(f.field, tuple(terms))


def integrate_simple(mu: Charge, f: SimpleFunction) -> Number:
    return sum((v * mu.measure(E) for v, E in f.terms), 0)


def is_null(mu: Charge, f: SimpleFunction) -> bool:
    return all(mu.measure(E) == 0 for _, E in f.terms)


# ---------------------------------------------------------------------------
# step distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepDistribution:
    """Right-continuous nonincreasing step function on [0, inf).

    Takes ``values[i]`` on ``[breakpoints[i-1], breakpoints[i])`` with an
    implicit leading breakpoint 0, and 0 beyond the last breakpoint.  Equal
    neighbouring steps are merged and trailing zero steps dropped.
    """

    breakpoints: Tuple[Number, ...] = ()
    values: Tuple[Number, ...] = ()

    def __post_init__(self):
        ts, cs = tuple(self.breakpoints), tuple(self.values)
        if len(ts) != len(cs):
            raise InvalidParameter("breakpoints and values differ in length")
        prev_t, prev_c = 0, math.inf
        for t, c in zip(ts, cs):
            if not t > prev_t:
                raise InvalidParameter("breakpoints must be positive and strictly increasing")
            if c < 0 or c > prev_c:
                raise InvalidParameter("values must be nonnegative and nonincreasing")
            prev_t, prev_c = t, c
        bt: List[Number] = []
        bc: List[Number] = []
        for t, c in zip(ts, cs):
            if bc and bc[-1] == c:
                bt[-1] = t
            else:
                bt.append(t)
                bc.append(c)
        while bc and bc[-1] == 0:
            bt.pop()
            bc.pop()
        object.__setattr__(self, "breakpoints", tuple(bt))
        object.__setattr__(self, "values", tuple(bc))

    def __call__(self, t: Number) -> Number:
        for b, c in zip(self.breakpoints, self.values):
            if t < b:
                return c
        return 0

    def __len__(self):
        return len(self.values)

    @property
    def right_end(self) -> Number:
        return self.breakpoints[-1] if self.breakpoints else 0

    def pieces(self):
        """Yield ``(left, right, value)`` for every step."""
        left = 0
        for t, c in zip(self.breakpoints, self.values):
            yield left, t, c
            left = t

    def total_integral(self) -> Number:
        return sum(((b - a) * c for a, b, c in self.pieces()), 0)


def merged_pieces(d1: StepDistribution, d2: StepDistribution, lower: Number = 0):
    """Yield ``(a, b, d1 value, d2 value)`` on the common refinement above ``lower``."""
    cuts = sorted(set(d1.breakpoints) | set(d2.breakpoints) | {0})
    for a, b in zip(cuts, cuts[1:]):
        if b <= lower:
            continue
        a = max(a, lower)
        yield a, b, d1(a), d2(a)


def _power(x: Number, r: Number) -> Number:
    if r == 1:
        return x
    return float(x) ** r if x else 0.0


def _moment(a: Number, b: Number, q: Number) -> Number:
    """Integral of t**(q-1) over [a, b]."""
    if q == 1:
        return b - a
    return (float(b) ** q - float(a) ** q) / q


def abs_diff_integral(d1: StepDistribution, d2: StepDistribution,
                      r: Number = 1, q: Number = 1, lower: Number = 0) -> Number:
    """Closed form of int_lower^inf |d1(t)**r - d2(t)**r| t**(q-1) dt."""
    parts = [abs(_power(c1, r) - _power(c2, r)) * _moment(a, b, q)
             for a, b, c1, c2 in merged_pieces(d1, d2, lower)]
    if any(isinstance(x, float) for x in parts):
        return math.fsum(parts)
    return sum(parts, 0)


def distribution_simple(mu: Charge, f: SimpleFunction) -> StepDistribution:
    """t -> mu({|f| > t}) as a step function; breakpoints are the values of |f|."""
    mass: Dict[Number, Number] = {}
    for v, E in f.terms:
        a = abs(v)
        mass[a] = mass.get(a, 0) + mu.measure(E)
    levels = sorted(mass)
    values = []
    for i in range(len(levels)):
        values.append(sum((mass[a] for a in levels[i:]), 0))
    return StepDistribution(tuple(levels), tuple(values))


def f_metric_norm(mu: Charge, f: SimpleFunction) -> Number:
    """min(1, inf_{a>0} max(a, mu*({|f| > a}))) by a scan over the steps."""
    d = distribution_simple(mu, f)
    best = d.right_end
    for a, _, c in d.pieces():
        best = min(best, max(a, c))
    return min(1, best)


# ---------------------------------------------------------------------------
# layer-cake identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: Number
    rhs: Number
    relation: str  # "=" or "<="
    holds: bool
    applicable: bool = True


@dataclass(frozen=True)
class LayerCakeReport:
    checks: Tuple[IdentityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.checks if c.applicable)

    def __getitem__(self, name: str) -> IdentityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _check(name, lhs, rhs, relation, tol, applicable=True) -> IdentityCheck:
    if relation == "=":
        holds = abs(lhs - rhs) <= tol
    else:
        holds = lhs <= rhs + tol
    return IdentityCheck(name, lhs, rhs, relation, bool(holds), applicable)


def layer_cake_check(mu: Charge, f: SimpleFunction, g: SimpleFunction,
                     delta: Number = 0, tol: float = DEFAULT_TOL) -> LayerCakeReport:
    """Evaluate both sides of the layer-cake identity and its three companions.

    ``layer_cake``: int |f| = int_0^inf mu_f.
    ``lattice``: int |f - g| = int_0^inf |mu_{f v g} - mu_{f ^ g}| (same-sign f, g only).
    ``contraction``: int_0^inf |mu_f - mu_g| <= int ||f| - |g||.
    ``tail``: int_delta^inf |mu_f - mu_g| <= int over {|f|>delta} u {|g|>delta} of ||f| - |g||.
    """
    dist = lambda h: distribution_simple(mu, h)
    df, dg = dist(f), dist(g)
    checks = [_check("layer_cake", integrate_simple(mu, abs(f)), df.total_integral(), "=", tol)]

    same_sign = all(v >= 0 for v in f.values + g.values) or all(v <= 0 for v in f.values + g.values)
    if same_sign:
        lhs = integrate_simple(mu, abs(f - g))
        rhs = abs_diff_integral(dist(lattice_and_arith(f, g, "max")), dist(lattice_and_arith(f, g, "min")))
        checks.append(_check("lattice", lhs, rhs, "=", tol))
    else:
        checks.append(IdentityCheck("lattice", math.nan, math.nan, "=", True, applicable=False))

    gap = abs(abs(f) - abs(g))
    checks.append(_check("contraction", abs_diff_integral(df, dg), integrate_simple(mu, gap), "<=", tol))

    A = f.field.union(f.level_set(lambda v: abs(v) > delta), g.level_set(lambda v: abs(v) > delta))
    rhs = integrate_simple(mu, gap * indicator(f.field, A))
    checks.append(_check("tail", abs_diff_integral(df, dg, lower=delta), rhs, "<=", tol))
    return LayerCakeReport(tuple(checks))
