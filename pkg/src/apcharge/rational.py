"""Rational recognition of real ratios via continued-fraction best approximants."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional

MAX_DEN = 10 ** 6
TOL = 1e-9
# err * den^2 must be this small for the approximant to count as the value
# rather than as the generic best approximation every real number has.
SIGNIFICANCE = 1e-3


def recognize(x, max_den: int = MAX_DEN, tol: float = TOL) -> Optional[Fraction]:
    """The rational p/q (q <= max_den) that x is, up to rounding, or None."""
    fx = Fraction(x)
    if fx.denominator <= max_den:
        return fx
    cand = fx.limit_denominator(max_den)
    err = abs(float(fx - cand))
    if err <= tol and err * cand.denominator ** 2 <= SIGNIFICANCE:
        return cand
    return None


def lcm_all(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out
