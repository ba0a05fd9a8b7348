"""Sequences of simple functions as finite-horizon stand-ins for completion elements.

Every limit is certified on the two-point ladder (N_max // 2, N_max) and the
gap between the two rungs is reported as the residual.  Nothing here claims an
exact limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

from . import charge_core as cc
from .charge_core import Charge, SimpleFunction
from .errors import HorizonTooSmall, NotCauchy, NotCauchyL1, NotCauchyLorentz, NotCauchyLp
from .lorentz import LorentzParams, lorentz_gap, lorentz_norm_from_distribution

DEFAULT_TOL = 1e-6
DEFAULT_HORIZON = 64
MIN_HORIZON = 4


@dataclass(frozen=True)
class LimitDiagnostic:
    estimate: float
    residual: float
    indices_used: Tuple[int, int]
    converged: bool
    tolerance: float = DEFAULT_TOL


class SimpleFunctionSequence:
    """``generator(n)`` for 1 <= n <= horizon, over a fixed charge.

    Generators must be pure; terms are memoized.
    """

    def __init__(self, generator: Callable[[int], SimpleFunction], charge: Charge,
                 horizon: int = DEFAULT_HORIZON):
        self.generator = generator
        self.charge = charge
        self.horizon = int(horizon)
        self._term = lru_cache(maxsize=None)(generator)

    def __getitem__(self, n: int) -> SimpleFunction:
        if not 1 <= n <= self.horizon:
            raise IndexError(n)
        return self._term(n)

    def ladder(self) -> Tuple[int, int]:
        if self.horizon < MIN_HORIZON:
            raise HorizonTooSmall(f"horizon {self.horizon} < {MIN_HORIZON}")
        return self.horizon // 2, self.horizon

    def map(self, fn: Callable[[SimpleFunction], SimpleFunction]) -> "SimpleFunctionSequence":
        return SimpleFunctionSequence(lambda n: fn(self[n]), self.charge, self.horizon)

    def combine(self, other: "SimpleFunctionSequence", op: str) -> "SimpleFunctionSequence":
        """Termwise lattice or arithmetic combination."""
        return SimpleFunctionSequence(lambda n: cc.lattice_and_arith(self[n], other[n], op),
                                      self.charge, min(self.horizon, other.horizon))

    def with_horizon(self, horizon: int) -> "SimpleFunctionSequence":
        return SimpleFunctionSequence(self.generator, self.charge, horizon)

    @classmethod
    def constant(cls, f: SimpleFunction, charge: Charge, horizon: int = DEFAULT_HORIZON):
        return cls(lambda n: f, charge, horizon)


def _diag(estimate, residual, idx, tol) -> LimitDiagnostic:
    return LimitDiagnostic(float(estimate), float(residual), idx, bool(residual <= tol), tol)


def is_cauchy(seq: SimpleFunctionSequence, delta: float, tol: float = DEFAULT_TOL) -> LimitDiagnostic:
    """mu*({|f_m - f_n| > delta}) on the ladder."""
    n, m = seq.ladder()
    gap = seq[m] - seq[n]
    residual = seq.charge.measure(gap.level_set(lambda v: abs(v) > delta))
    return _diag(residual, residual, (n, m), tol)


def converges_to(seq: SimpleFunctionSequence, f: SimpleFunction, delta: float,
                 tol: float = DEFAULT_TOL) -> LimitDiagnostic:
    """mu*({|f - f_N| > delta}) at N = horizon."""
    n, m = seq.ladder()
    gap = f - seq[m]
    residual = seq.charge.measure(gap.level_set(lambda v: abs(v) > delta))
    return _diag(residual, residual, (n, m), tol)


def _require_cauchy(seq, tol, delta=None):
    diag = is_cauchy(seq, tol if delta is None else delta, tol)
    if not diag.converged:
        raise NotCauchy(f"sequence is not Cauchy in outer charge at the horizon "
                        f"(residual {diag.residual:.3g} > tol {tol:.3g})")
    return diag


def tmdot_norm(seq: SimpleFunctionSequence, tol: float = DEFAULT_TOL) -> LimitDiagnostic:
    n, m = seq.ladder()
    hi = cc.f_metric_norm(seq.charge, seq[m])
    lo = cc.f_metric_norm(seq.charge, seq[n])
    return _diag(hi, abs(hi - lo), (n, m), tol)


def order_geq_zero(seq: SimpleFunctionSequence, tol: float = DEFAULT_TOL) -> bool:
    """True when the negative parts vanish in the F-norm along the ladder."""
    n, m = seq.ladder()
    hi = cc.f_metric_norm(seq.charge, seq[m].negative_part())
    lo = cc.f_metric_norm(seq.charge, seq[n].negative_part())
    return bool(hi <= tol and hi <= lo)


def integrate_sequence(seq: SimpleFunctionSequence, tol: float = DEFAULT_TOL,
                       delta: Optional[float] = None) -> LimitDiagnostic:
    """lim int f_n dmu, certified by the L1 Cauchy gap int |f_N - f_{N/2}|."""
    _require_cauchy(seq, tol, delta)
    n, m = seq.ladder()
    residual = cc.integrate_simple(seq.charge, abs(seq[m] - seq[n]))
    if residual > tol:
        raise NotCauchyL1(f"L1 Cauchy residual {float(residual):.3g} exceeds tol {tol:.3g}")
    return _diag(cc.integrate_simple(seq.charge, seq[m]), residual, (n, m), tol)


def _abs_pow(f: SimpleFunction, p: float) -> SimpleFunction:
    return f.map(lambda v: abs(v) ** p)


def ldot_p_norm(seq: SimpleFunctionSequence, p: float, tol: float = DEFAULT_TOL,
                delta: Optional[float] = None) -> LimitDiagnostic:
    """lim ||f_n||_p for p < inf; the smallest level C with mu(|f_N| > C) <= tol for p = inf."""
    _require_cauchy(seq, tol, delta)
    n, m = seq.ladder()
    mu = seq.charge
    if math.isinf(p):
        def ess_bound(f):
            d = cc.distribution_simple(mu, f)
            for level in (0,) + d.breakpoints:
                if d(level) <= tol:
                    return float(level)
            return float(d.right_end)
        hi, lo = ess_bound(seq[m]), ess_bound(seq[n])
        return _diag(hi, abs(hi - lo), (n, m), tol)
    fm, fn = _abs_pow(seq[m], p), _abs_pow(seq[n], p)
    residual = cc.integrate_simple(mu, abs(fm - fn))
    if residual > tol:
        raise NotCauchyLp(f"L^{p} Cauchy residual {float(residual):.3g} exceeds tol {tol:.3g}")
    return _diag(float(cc.integrate_simple(mu, fm)) ** (1 / p), residual, (n, m), tol)


def ldot_pq_norm(seq: SimpleFunctionSequence, params: LorentzParams, tol: float = DEFAULT_TOL,
                 delta: Optional[float] = None) -> LimitDiagnostic:
    _require_cauchy(seq, tol, delta)
    n, m = seq.ladder()
    dm = cc.distribution_simple(seq.charge, seq[m])
    dn = cc.distribution_simple(seq.charge, seq[n])
    residual = lorentz_gap(dm, dn, params)
    if not residual <= tol:
        raise NotCauchyLorentz(f"Lorentz Cauchy residual {residual:.3g} exceeds tol {tol:.3g}")
    return _diag(lorentz_norm_from_distribution(dm, params), residual, (n, m), tol)


def equivalent(seq: SimpleFunctionSequence, other: SimpleFunctionSequence,
               tol: float = DEFAULT_TOL) -> bool:
    """||f_N - g_N||_F <= tol, the finite-horizon form of equivalence of representatives."""
    N = min(seq.horizon, other.horizon)
    return bool(cc.f_metric_norm(seq.charge, seq[N] - other[N]) <= tol)
