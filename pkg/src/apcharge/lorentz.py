"""Decreasing rearrangements and Lorentz (quasi-)norms.

Everything here is closed form: distributions are step functions, so the
defining integrals reduce to finite sums of antiderivatives of t**(q-1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

from .charge_core import StepDistribution, abs_diff_integral, merged_pieces
from .errors import InvalidParameter

INF = math.inf


@dataclass(frozen=True)
class LorentzParams:
    p: float
    q: float = INF

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise InvalidParameter(f"p must be a positive real, got {self.p!r}")
        if not self.q > 0:
            raise InvalidParameter(f"q must be positive or inf, got {self.q!r}")

    @property
    def p_conjugate(self) -> float:
        return conjugate_exponent(self.p)


def conjugate_exponent(p: float) -> float:
    """p' with 1/p + 1/p' = 1; defined for p >= 1 (1' = inf)."""
    if p < 1:
        raise InvalidParameter("conjugate exponent needs p >= 1")
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


@dataclass(frozen=True)
class RearrangedSeq:
    values: Tuple[float, ...]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


def rearrange_seq(a: Iterable[complex]) -> RearrangedSeq:
    return RearrangedSeq(tuple(sorted((abs(x) for x in a), reverse=True)))


def seq_lorentz_norm(a: Sequence[complex], params: LorentzParams) -> float:
    """(sum_n [n^(1/p) a*_n]^q / n)^(1/q), or sup_n n^(1/p) a*_n when q = inf."""
    p, q = params.p, params.q
    star = rearrange_seq(a).values
    if not star or star[0] == 0:
        return 0.0
    top = star[0]
    if math.isinf(q):
        return top * max(n ** (1 / p) * x / top for n, x in enumerate(star, 1))
    s = math.fsum(n ** (q / p - 1) * (x / top) ** q for n, x in enumerate(star, 1) if x)
    return top * s ** (1 / q)


def lorentz_norm_from_distribution(d: StepDistribution, params: LorentzParams) -> float:
    """(p int_0^inf mu(s)^(q/p) s^(q-1) ds)^(1/q); sup_t t mu(t)^(1/p) for q = inf."""
    p, q = params.p, params.q
    if not len(d):
        return 0.0
    if math.isinf(q):
        return max(float(t) * float(c) ** (1 / p) for t, c in zip(d.breakpoints, d.values))
    s = math.fsum(float(c) ** (q / p) * (float(b) ** q - float(a) ** q) for a, b, c in d.pieces())
    return (p / q * s) ** (1 / q)


def rearrangement_from_distribution(d: StepDistribution) -> StepDistribution:
    """f*(s) = inf{t : mu_f(t) <= s} as a step function on [0, inf).

    Takes t_i on [c_{i+1}, c_i) where mu_f = c_i on [t_{i-1}, t_i).  The map is
    an involution on canonical step functions: the Lebesgue distribution of
    f* is mu_f again.
    """
    cs = list(d.values)
    ts = list(d.breakpoints)
    return StepDistribution(tuple(reversed(cs)), tuple(reversed(ts)))


lebesgue_distribution = rearrangement_from_distribution


def lorentz_norm_from_rearrangement(fstar: StepDistribution, params: LorentzParams) -> float:
    """(int_0^inf [s^(1/p) f*(s)]^q ds/s)^(1/q), sup_s s^(1/p) f*(s) for q = inf."""
    p, q = params.p, params.q
    if not len(fstar):
        return 0.0
    if math.isinf(q):
        return max(float(b) ** (1 / p) * float(v) for _, b, v in fstar.pieces())
    r = q / p
    s = math.fsum(float(v) ** q * (float(b) ** r - float(a) ** r) for a, b, v in fstar.pieces())
    return (s / r) ** (1 / q)


def power_distribution(d: StepDistribution, r: float) -> StepDistribution:
    """Distribution of |f|^r given that of f: t -> mu_f(t^(1/r))."""
    return StepDistribution(tuple(float(t) ** r for t in d.breakpoints), d.values)


def lorentz_norm_via_power(d: StepDistribution, params: LorentzParams) -> float:
    """((p/q) int_0^inf mu_{|f|^q}(t)^(q/p) dt)^(1/q); finite q only."""
    p, q = params.p, params.q
    if math.isinf(q):
        raise InvalidParameter("the power route needs finite q")
    dq = power_distribution(d, q)
    s = math.fsum(float(c) ** (q / p) * (float(b) - float(a)) for a, b, c in dq.pieces())
    return (p / q * s) ** (1 / q)


def lorentz_gap(d1: StepDistribution, d2: StepDistribution, params: LorentzParams) -> float:
    """int_0^inf |mu_1^(q/p) - mu_2^(q/p)| t^(q-1) dt, or sup_t t |mu_1^(1/p) - mu_2^(1/p)|."""
    p, q = params.p, params.q
    if math.isinf(q):
        best = 0.0
        for _, b, c1, c2 in merged_pieces(d1, d2):
            best = max(best, float(b) * abs(float(c1) ** (1 / p) - float(c2) ** (1 / p)))
        return best
    return float(abs_diff_integral(d1, d2, r=q / p, q=q))


def lorentz_gap_via_power(d1: StepDistribution, d2: StepDistribution, params: LorentzParams) -> float:
    """(1/q) int_0^inf |mu_{|f|^q}^(q/p) - mu_{|g|^q}^(q/p)| dt."""
    p, q = params.p, params.q
    e1, e2 = power_distribution(d1, q), power_distribution(d2, q)
    return float(abs_diff_integral(e1, e2, r=q / p, q=1)) / q
