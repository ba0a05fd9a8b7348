"""Randomized checks of Bessel, Hausdorff-Young, Paley and Lorentz-Paley on polynomials.

Constant-one inequalities count violations.  Where the constant is not known
(Paley and its Lorentz version) the ratio lhs/rhs is only recorded and
summarized; no bound is asserted.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ap_poly import (EPS_FREQ, TrigPolynomial, abs_pow_mean, fourier_coefficient, lorentz_gamma_norm)
from .errors import ApChargeError, InvalidParameter
from .lorentz import LorentzParams, conjugate_exponent, seq_lorentz_norm

RESTRICTION = "trigonometric polynomials only; general B^q_ap elements are not evaluated"
SKIP_BELOW = 1e-12
CONSTANT_ONE = ("bessel", "hausdorff_young", "l1_bound")
EMPIRICAL = ("paley", "lorentz_paley")
INEQUALITIES = CONSTANT_ONE + EMPIRICAL

# (1/2pi) int_0^{2pi} |2 cos x|^{3/2} dx, then ^(2/3): mpmath quad at 30 digits, computed once
PALEY_SPOT_RHS_ORACLE = 1.3529987270358831


@dataclass(frozen=True)
class TrialRecord:
    seed: Optional[int]
    poly: str
    lhs: float
    rhs: float
    ratio: float
    residual: float
    violated: bool = False
    skipped: bool = False
    error: Optional[str] = None


def _record(seed, P, lhs, rhs, residual, violated=False) -> TrialRecord:
    lhs, rhs = float(lhs), float(rhs)
    if rhs < SKIP_BELOW:
        return TrialRecord(seed, P.format(), lhs, rhs, math.nan, float(residual), False, True)
    return TrialRecord(seed, P.format(), lhs, rhs, lhs / rhs, float(residual), bool(violated))


def _norm_with_residual(P: TrigPolynomial, q: float, tol: float) -> Tuple[float, float]:
    """(||P||_{B^q}, uncertainty), the latter propagated through m -> m^(1/q)."""
    est = abs_pow_mean(P, q, min(tol, 1e-10))
    m = max(float(est.value.real), 0.0)
    r = est.residual
    val = m ** (1 / q)
    return val, ((m + r) ** (1 / q) - val) if r else 0.0


def coefficient_moduli(P: TrigPolynomial) -> List[float]:
    return [abs(a) for a in P.coeffs]


def check_bessel(P: TrigPolynomial, tol: float = 1e-9, seed=None) -> TrialRecord:
    lhs = math.fsum(x * x for x in coefficient_moduli(P))
    est = abs_pow_mean(P, 2, min(tol, 1e-10))
    rhs, r = float(est.value.real), est.residual
    violated = lhs > rhs + tol + r or abs(lhs - rhs) > tol + r
    return _record(seed, P, lhs, rhs, r, violated)


def check_hausdorff_young(P: TrigPolynomial, q: float, tol: float = 1e-6, seed=None) -> TrialRecord:
    if not 1 <= q <= 2:
        raise InvalidParameter(f"Hausdorff-Young needs 1 <= q <= 2, got {q}")
    qp = conjugate_exponent(q)
    a = coefficient_moduli(P)
    if math.isinf(qp):
        lhs = max(a, default=0.0)
    else:
        lhs = seq_lorentz_norm(a, LorentzParams(qp, qp))
    rhs, r = _norm_with_residual(P, q, tol)
    return _record(seed, P, lhs, rhs, r, lhs > rhs * (1 + tol) + r)


def check_paley(P: TrigPolynomial, q: float, tol: float = 1e-6, seed=None) -> TrialRecord:
    if not 1 < q <= 2:
        raise InvalidParameter(f"Paley needs 1 < q <= 2, got {q}")
    lhs = seq_lorentz_norm(coefficient_moduli(P), LorentzParams(conjugate_exponent(q), q))
    rhs, r = _norm_with_residual(P, q, tol)
    return _record(seed, P, lhs, rhs, r)


def check_l1_bound(P: TrigPolynomial, eta: float, tol: float = 1e-9, seed=None) -> TrialRecord:
    lhs = abs(fourier_coefficient(P, eta))
    rhs, r = _norm_with_residual(P, 1, tol)
    return _record(seed, P, lhs, rhs, r, lhs > rhs + r + tol)


def check_lorentz_paley(P: TrigPolynomial, p: float, q: float, tol: float = 1e-6, seed=None) -> TrialRecord:
    if not 1 < p < 2 or not q > 0:
        raise InvalidParameter(f"Lorentz-Paley needs 1 < p < 2 and q > 0, got p={p}, q={q}")
    lhs = seq_lorentz_norm(coefficient_moduli(P), LorentzParams(conjugate_exponent(p), q))
    rhs = lorentz_gamma_norm(P, LorentzParams(p, q))
    return _record(seed, P, lhs, rhs, 0.0)


# -- generation ---------------------------------------------------------------

def gen_random_poly(seed: int, n_terms: int = 4, freq_range: Tuple[float, float] = (-16, 16),
                    coeff_bound: float = 1.0, mode: str = "integer-lattice",
                    min_gap: Optional[float] = None, fixed_modulus: Optional[float] = None) -> TrigPolynomial:
    """Deterministic in ``seed``; coefficients uniform on the disk of radius ``coeff_bound``."""
    if n_terms < 0:
        raise InvalidParameter("n_terms must be nonnegative")
    rng = np.random.default_rng(seed)
    lo, hi = freq_range
    if mode == "integer-lattice":
        pool = np.arange(math.ceil(lo), math.floor(hi) + 1)
        if n_terms > pool.size:
            raise InvalidParameter(f"cannot draw {n_terms} distinct integers from {freq_range}")
        freqs = [float(x) for x in rng.choice(pool, size=n_terms, replace=False)]
    elif mode == "generic-real":
        gap = 10 * EPS_FREQ if min_gap is None else float(min_gap)
        freqs: List[float] = []
        for _ in range(10000 * max(n_terms, 1)):
            if len(freqs) == n_terms:
                break
            x = float(rng.uniform(lo, hi))
            if all(abs(x - y) > gap for y in freqs):
                freqs.append(x)
        if len(freqs) < n_terms:
            raise InvalidParameter(f"cannot place {n_terms} frequencies {gap} apart in {freq_range}")
    else:
        raise InvalidParameter(f"unknown generator mode {mode!r}")
    if fixed_modulus is not None:
        mod = np.full(n_terms, float(fixed_modulus))
    else:
        mod = coeff_bound * np.sqrt(rng.uniform(0, 1, n_terms))
    phase = rng.uniform(0, 2 * math.pi, n_terms)
    return TrigPolynomial(tuple(freqs), tuple(complex(m * math.cos(t), m * math.sin(t)) for m, t in zip(mod, phase)))


# -- campaigns ----------------------------------------------------------------

@dataclass
class CampaignConfig:
    inequality: str
    q: Optional[float] = None
    p: Optional[float] = None
    eta: Optional[float] = None
    trials: int = 100
    base_seed: int = 0
    tol: float = 1e-6
    n_terms: Optional[int] = None
    max_terms: int = 8
    freq_range: Tuple[float, float] = (-16, 16)
    coeff_bound: float = 1.0
    mode: str = "integer-lattice"
    min_gap: Optional[float] = None
    keep_records: bool = True

    def __post_init__(self):
        if self.inequality not in INEQUALITIES:
            raise InvalidParameter(f"unknown inequality {self.inequality!r}; choose from {INEQUALITIES}")
        if int(self.trials) < 1:
            raise InvalidParameter("trials must be >= 1")
        if self.inequality in ("hausdorff_young", "paley", "lorentz_paley") and self.q is None:
            raise InvalidParameter(f"{self.inequality} needs q")
        if self.inequality == "lorentz_paley" and self.p is None:
            raise InvalidParameter("lorentz_paley needs p")
        self.freq_range = tuple(self.freq_range)

    @classmethod
    def from_dict(cls, d: Dict) -> "CampaignConfig":
        d = dict(d)
        params = d.pop("parameters", None) or d.pop("params", None) or {}
        gen = d.pop("generator", None) or {}
        merged = {**gen, **params, **d}
        known = {f for f in cls.__dataclass_fields__}
        extra = set(merged) - known
        if extra:
            raise InvalidParameter(f"unknown campaign keys {sorted(extra)}")
        return cls(**merged)


@dataclass
class InequalityReport:
    name: str
    params: Dict
    trials: int
    skipped: int
    violations: int
    max_ratio: float
    mean_ratio: float
    empirical_constant: float
    base_seed: int
    last_quartile_max: float
    failures: int
    passed: bool
    restriction: str = RESTRICTION
    spot_check: Optional[Dict] = None
    failure_messages: List[str] = field(default_factory=list)
    records: Optional[List[TrialRecord]] = None

    def to_json(self) -> Dict:
        out = {k: _jsonable(v) for k, v in asdict(self).items() if k != "records"}
        if self.records is not None:
            out["records"] = [_jsonable(asdict(r)) for r in self.records]
        return out


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _from_jsonable(v):
    if v in ("inf", "-inf", "nan"):
        return float(v)
    if isinstance(v, dict):
        return {k: _from_jsonable(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_from_jsonable(x) for x in v]
    return v


def report_from_json(obj: Dict) -> InequalityReport:
    d = _from_jsonable(dict(obj))
    recs = d.pop("records", None)
    rep = InequalityReport(**d)
    if recs is not None:
        rep.records = [TrialRecord(**r) for r in recs]
    return rep


def _trial(cfg: CampaignConfig, i: int) -> TrialRecord:
    seed = cfg.base_seed + i
    try:
        n = cfg.n_terms
        if n is None:
            n = int(np.random.default_rng([seed, 1]).integers(1, cfg.max_terms + 1))
        P = gen_random_poly(seed, n, cfg.freq_range, cfg.coeff_bound, cfg.mode, cfg.min_gap)
        name = cfg.inequality
        if name == "bessel":
            return check_bessel(P, cfg.tol, seed)
        if name == "hausdorff_young":
            return check_hausdorff_young(P, cfg.q, cfg.tol, seed)
        if name == "paley":
            return check_paley(P, cfg.q, cfg.tol, seed)
        if name == "l1_bound":
            eta = cfg.eta if cfg.eta is not None else (P.freqs[0] if len(P) else 0.0)
            return check_l1_bound(P, eta, cfg.tol, seed)
        return check_lorentz_paley(P, cfg.p, cfg.q, cfg.tol, seed)
    except ApChargeError as exc:
        return TrialRecord(seed, "", math.nan, math.nan, math.nan, math.nan, error=f"{type(exc).__name__}: {exc}")


def _threads() -> int:
    env = os.environ.get("APCHARGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidParameter(f"APCHARGE_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def paley_spot_check(tol: float = 1e-9) -> Dict:
    """2 cos x at q = 1.5: closed-form lhs, computed rhs, and the frozen quadrature oracle."""
    P = TrigPolynomial((-1.0, 1.0), (1, 1))
    rec = check_paley(P, 1.5, tol)
    closed = (1 + 2 ** 0.5 / 2) ** (2 / 3)
    oracle_ratio = closed / PALEY_SPOT_RHS_ORACLE
    return {"poly": P.format(), "q": 1.5, "lhs": rec.lhs, "lhs_closed_form": closed, "rhs": rec.rhs,
            "rhs_oracle": PALEY_SPOT_RHS_ORACLE, "ratio": rec.ratio, "oracle_ratio": oracle_ratio,
            "agrees": abs(rec.ratio - oracle_ratio) <= 1e-6 and abs(rec.lhs - closed) <= 1e-12}


def run_campaign(config) -> InequalityReport:
    cfg = config if isinstance(config, CampaignConfig) else CampaignConfig.from_dict(config)
    n = int(cfg.trials)
    workers = min(_threads(), n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda i: _trial(cfg, i), range(n)))
    else:
        records = [_trial(cfg, i) for i in range(n)]
    errors = [r for r in records if r.error]
    skipped = [r for r in records if r.skipped]
    good = [r for r in records if not r.error and not r.skipped]
    ratios = [r.ratio for r in good]
    max_ratio = max(ratios, default=math.nan)
    mean_ratio = math.fsum(ratios) / len(ratios) if ratios else math.nan
    tail = [r.ratio for r in good if r.seed - cfg.base_seed >= n - max(1, n // 4)]
    last_q = max(tail, default=math.nan)
    violations = sum(r.violated for r in good)
    if cfg.inequality in CONSTANT_ONE:
        passed = violations == 0 and not errors
    else:
        stable = (not tail) or last_q <= max_ratio
        passed = not errors and all(math.isfinite(x) for x in ratios) and stable
    q = cfg.q
    if cfg.inequality == "lorentz_paley":
        p_name, qp = cfg.p, conjugate_exponent(cfg.p)
    elif q is not None and q >= 1:
        p_name, qp = cfg.p, conjugate_exponent(q)
    else:
        p_name, qp = cfg.p, None
    params = {"p": p_name, "q": q, "q_prime": qp}
    if cfg.eta is not None:
        params["eta"] = cfg.eta
    return InequalityReport(
        name=cfg.inequality, params=params, trials=n, skipped=len(skipped), violations=violations,
        max_ratio=max_ratio, mean_ratio=mean_ratio, empirical_constant=max_ratio, base_seed=cfg.base_seed,
        last_quartile_max=last_q, failures=len(errors), passed=bool(passed),
        spot_check=paley_spot_check() if cfg.inequality == "paley" else None,
        failure_messages=[f"seed {r.seed}: {r.error}" for r in errors],
        records=records if cfg.keep_records else None)


CSV_COLUMNS = ("seed", "lhs", "rhs", "ratio", "residual")


def records_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.seed] + [repr(float(getattr(r, c))) for c in CSV_COLUMNS[1:]])
    return buf.getvalue()
