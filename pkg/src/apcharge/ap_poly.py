"""Almost-periodic trigonometric polynomials sum_k a_k exp(i eta_k x).

Means, coefficients and Besicovitch norms take the single-period path when
the frequencies are commensurable and fall back to windowed means on a
doubling ladder otherwise.  Windowed results always carry a residual.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import rational
from .density_charge import periodic_distribution_levels
from .errors import (AmbiguousFrequency, IncommensurableUnsupported, InvalidParameter,
                     NotConverging)
from .lorentz import LorentzParams
from .quadrature import adaptive_gk, panels_for

EPS_FREQ = 1e-12
TAU0 = 64.0
DOUBLINGS = 8
LEVELS = 512
# beyond this many oscillations per common period the windowed path is cheaper
MAX_PERIOD_CYCLES = 10_000


@dataclass(frozen=True)
class TrigPolynomial:
    freqs: Tuple[float, ...] = ()
    coeffs: Tuple[complex, ...] = ()

    def __post_init__(self):
        if len(self.freqs) != len(self.coeffs):
            raise InvalidParameter("freqs and coeffs differ in length")
        pairs = sorted(zip((float(e) for e in self.freqs), (complex(a) for a in self.coeffs)),
                       key=lambda t: t[0])
        merged: List[List] = []
        for eta, a in pairs:
            if not (math.isfinite(eta) and math.isfinite(a.real) and math.isfinite(a.imag)):
                raise InvalidParameter("frequencies and coefficients must be finite")
            if merged and eta - merged[-1][0] <= EPS_FREQ:
                merged[-1][1] += a
            else:
                merged.append([eta, a])
        kept = [(e, a) for e, a in merged if a != 0]
        object.__setattr__(self, "freqs", tuple(e for e, _ in kept))
        object.__setattr__(self, "coeffs", tuple(a for _, a in kept))

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[float, complex]]) -> "TrigPolynomial":
        terms = list(terms)
        return cls(tuple(e for e, _ in terms), tuple(a for _, a in terms))

    @classmethod
    def exp(cls, eta: float, c: complex = 1) -> "TrigPolynomial":
        return cls((eta,), (c,))

    @classmethod
    def constant(cls, c: complex) -> "TrigPolynomial":
        return cls((0.0,), (c,))

    def __len__(self):
        return len(self.freqs)

    @property
    def terms(self) -> Tuple[Tuple[float, complex], ...]:
        return tuple(zip(self.freqs, self.coeffs))

    @property
    def max_freq(self) -> float:
        return max((abs(e) for e in self.freqs), default=0.0)

    @property
    def coefficient_l1(self) -> float:
        return math.fsum(abs(a) for a in self.coeffs)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for eta, a in self.terms:
            out += a * np.exp(1j * eta * x)
        return out

    __call__ = evaluate

    def abs_pow(self, q: float) -> Callable[[np.ndarray], np.ndarray]:
        return lambda x: np.abs(self.evaluate(x)) ** q

    def __add__(self, other):
        return poly_arith(self, other, "+")

    def __mul__(self, other):
        if isinstance(other, TrigPolynomial):
            return poly_arith(self, other, "*")
        return poly_arith(self, other, "scale")

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1) * other

    def conj(self):
        return poly_arith(self, None, "conj")

    # -- text and JSON ----------------------------------------------------

    def format(self) -> str:
        return ";".join(f"{a.real!r},{a.imag!r}@{e!r}" for e, a in self.terms)

    def to_json(self):
        return {"terms": [{"re": a.real, "im": a.imag, "freq": e} for e, a in self.terms]}

    @classmethod
    def from_json(cls, obj) -> "TrigPolynomial":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls.from_terms((float(t["freq"]), complex(float(t["re"]), float(t.get("im", 0.0))))
                                  for t in obj["terms"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameter(f"bad polynomial JSON: {exc}") from exc


_TERM = re.compile(r"^\s*([^,@]+)\s*(?:,\s*([^,@]+)\s*)?@\s*(.+?)\s*$")


def parse_poly(text: str) -> TrigPolynomial:
    """``re,im@freq;...`` (imaginary part optional); JSON objects are accepted too."""
    text = text.strip()
    if text.startswith("{"):
        return TrigPolynomial.from_json(text)
    terms = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        m = _TERM.match(part)
        if not m:
            raise InvalidParameter(f"cannot parse term {part!r}; expected re,im@freq")
        try:
            re_, im, eta = float(m.group(1)), float(m.group(2) or 0.0), _parse_freq(m.group(3))
        except ValueError as exc:
            raise InvalidParameter(f"cannot parse term {part!r}") from exc
        terms.append((eta, complex(re_, im)))
    return TrigPolynomial.from_terms(terms)


def _parse_freq(s: str) -> float:
    """A float, optionally written with sqrt(n) or pi factors, e.g. ``-sqrt(2)`` or ``2*pi``."""
    s = s.replace(" ", "")
    if re.fullmatch(r"[-+0-9.eE/*()a-z]+", s) is None:
        raise ValueError(s)
    try:
        return float(s)
    except ValueError:
        pass
    value = 1.0
    sign = -1.0 if s.startswith("-") else 1.0
    for factor in s.lstrip("+-").split("*"):
        m = re.fullmatch(r"sqrt\(([0-9.]+)\)", factor)
        if m:
            value *= math.sqrt(float(m.group(1)))
        elif factor == "pi":
            value *= math.pi
        elif "/" in factor:
            n, d = factor.split("/")
            value *= float(n) / float(d)
        else:
            value *= float(factor)
    return sign * value


def poly_arith(P: TrigPolynomial, Q, op: str) -> TrigPolynomial:
    if op in ("+", "add"):
        return TrigPolynomial(P.freqs + Q.freqs, P.coeffs + Q.coeffs)
    if op in ("*", "·", "mul"):
        terms = [(e1 + e2, a1 * a2) for e1, a1 in P.terms for e2, a2 in Q.terms]
        return TrigPolynomial.from_terms(terms)
    if op == "conj":
        return TrigPolynomial(tuple(-e for e in P.freqs), tuple(a.conjugate() for a in P.coeffs))
    if op == "scale":
        return TrigPolynomial(P.freqs, tuple(complex(Q) * a for a in P.coeffs))
    raise InvalidParameter(f"unknown polynomial operation {op!r}")


@dataclass(frozen=True)
class MeanEstimate:
    value: complex
    exact: bool
    residual: float = 0.0
    last_gap: float = 0.0
    ladder: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.exact and self.residual != 0:
            raise InvalidParameter("exact estimates carry no residual")


def mean_value(P: TrigPolynomial) -> complex:
    return fourier_coefficient(P, 0.0)


def fourier_coefficient(P: TrigPolynomial, eta: float) -> complex:
    hits = [a for e, a in P.terms if abs(e - eta) <= EPS_FREQ]
    if len(hits) > 1:
        raise AmbiguousFrequency(f"frequency {eta!r} is within {EPS_FREQ} of {len(hits)} stored frequencies")
    return hits[0] if hits else 0j


def common_period(P: TrigPolynomial) -> Optional[float]:
    """2 pi / omega when every nonzero frequency is an integer multiple of omega, else None.

    Ratios to the first nonzero frequency are recognized as rationals with
    denominator <= 1e6 (see :mod:`apcharge.rational`); the joint denominator
    must stay within the same bound.
    """
    nz = [e for e in P.freqs if abs(e) > EPS_FREQ]
    if not nz:
        return 2 * math.pi
    base = min(nz, key=abs)
    ratios = []
    for e in nz:
        r = rational.recognize(e / base)
        if r is None:
            return None
        ratios.append(r)
    L = rational.lcm_all(r.denominator for r in ratios)
    if L > rational.MAX_DEN:
        return None
    g = 0
    for r in ratios:
        g = math.gcd(g, abs(r.numerator * (L // r.denominator)))
    omega = abs(base) * g / L
    return 2 * math.pi / omega


def _period_path(P: TrigPolynomial) -> Optional[float]:
    T = common_period(P)
    if T is None or T * P.max_freq > 2 * math.pi * MAX_PERIOD_CYCLES:
        return None
    return T


def windowed_mean(g: Callable[[np.ndarray], np.ndarray], tau0: float = TAU0, doublings: int = DOUBLINGS,
                  tol: float = 1e-6, max_freq: float = 1.0) -> MeanEstimate:
    """(1/2 tau) int_{-tau}^{tau} g on tau_j = tau0 2^j, reusing inner integrals.

    The residual is the larger of the last gap and twice the largest scaled
    deviation tau_j |m_j - m_L| / tau_L: means converge like C / tau, and the
    last gap alone can undershoot that when the oscillation phase is unlucky.
    """
    if tau0 <= 0 or doublings < 1:
        raise InvalidParameter("need tau0 > 0 and at least one doubling")

    def shell(a, b, t):
        return adaptive_gk(g, a, b, t, panels_for(b - a, max_freq + 1.0))

    taus, means, parts = [], [], []
    tau = float(tau0)
    inner = shell(-tau, tau, tol * tau / 2)
    parts.append(inner)
    taus.append(tau)
    means.append(inner / (2 * tau))
    for _ in range(doublings):
        new = 2 * tau
        t = tol * tau / 2
        parts.append(shell(-new, -tau, t))
        parts.append(shell(tau, new, t))
        tau = new
        taus.append(tau)
        means.append(math.fsum(parts) / (2 * tau))
    gaps = [abs(means[j] - means[j - 1]) for j in range(1, len(means))]
    env = [_envelope(taus[:j + 1], means[:j + 1]) for j in range(1, len(means))]
    if len(env) >= 3 and env[-3] < env[-2] < env[-1] and env[-1] > tol:
        raise NotConverging(f"window-mean residuals grow on the last steps: {env[-3:]}")
    residual = env[-1]
    return MeanEstimate(means[-1], False, residual, gaps[-1], tuple(zip(taus, means)))


def _envelope(taus, means) -> float:
    mL, tL = means[-1], taus[-1]
    spread = max(t * abs(m - mL) for t, m in zip(taus[:-1], means[:-1])) / tL
    return max(abs(means[-1] - means[-2]), 2 * spread)


def abs_pow_mean(P: TrigPolynomial, q: float, tol: float = 1e-10, tau0: float = TAU0,
                 doublings: int = DOUBLINGS) -> MeanEstimate:
    """The gamma-integral of |P|^q."""
    if not q > 0:
        raise InvalidParameter("q must be positive")
    if len(P) == 0:
        return MeanEstimate(0.0, True)
    if len(P) == 1:
        return MeanEstimate(abs(P.coeffs[0]) ** q, True)
    T = _period_path(P)
    g = P.abs_pow(q)
    if T is not None:
        val = adaptive_gk(g, 0.0, T, tol * T, panels_for(T, P.max_freq * max(1.0, q))) / T
        return MeanEstimate(val, True)
    return windowed_mean(g, tau0, doublings, max(tol, 1e-9), P.max_freq * max(1.0, q))


def b_norm(P: TrigPolynomial, q: float, tol: float = 1e-10) -> float:
    return float(abs_pow_mean(P, q, tol).value.real) ** (1 / q)


def sup_modulus(P: TrigPolynomial, T: float, grid: int = 4096) -> float:
    """max |P| on one period: dense scan, then three zoom passes around the best cells."""
    x = np.linspace(0.0, T, grid + 1)
    y = np.abs(P.evaluate(x))
    h = T / grid
    centers = x[np.argsort(y)[-8:]]
    best = float(y.max())
    for _ in range(3):
        z = (centers[:, None] + np.linspace(-h, h, 65)[None, :]).ravel()
        yz = np.abs(P.evaluate(z))
        best = max(best, float(yz.max()))
        centers = z[np.argsort(yz)[-8:]]
        h /= 32
    return min(best, P.coefficient_l1)


def _level_grid(S: float, n: int) -> np.ndarray:
    """Chebyshev-clustered levels on [0, S], dense at both ends."""
    return S * (1 - np.cos(np.pi * np.arange(n) / (n - 1))) / 2


def _norm_from_table(s: np.ndarray, gam: np.ndarray, params: LorentzParams) -> float:
    p, q = params.p, params.q
    if math.isinf(q):
        return float(np.max(s * gam ** (1 / p)))
    w = gam ** (q / p)
    integral = math.fsum(((w[:-1] + w[1:]) / 2 * (s[1:] ** q - s[:-1] ** q) / q).tolist())
    return (p * integral) ** (1 / q)


def lorentz_gamma_norm(P: TrigPolynomial, params: LorentzParams, grid: int = LEVELS,
                       tol: float = 1e-9, window: float = 2048.0) -> float:
    """L^{p,q}(gamma) norm of |P| from a tabulated distribution.

    gamma_{|P|}(s) is tabulated on ``grid`` Chebyshev levels; the integral of
    p gamma^{q/p} s^{q-1} uses the exact integral of s^{q-1} on each level
    interval with the trapezoid average of gamma^{q/p}.
    """
    if len(P) == 0:
        return 0.0
    if len(P) == 1:
        # constant modulus |a|: gamma is 1 below |a| and 0 above
        p, q = params.p, params.q
        c = abs(P.coeffs[0])
        return c if math.isinf(q) else (p / q) ** (1 / q) * c
    T = _period_path(P)
    if T is not None:
        S = sup_modulus(P, T)
        s = _level_grid(S, grid)
        cells = max(4096, panels_for(T, P.max_freq, 64))
        gam = periodic_distribution_levels(P.evaluate, T, s, cells, tol)
        return _norm_from_table(s, gam, params)
    return _windowed_lorentz(P, params, grid, tol, window)


def _windowed_lorentz(P, params, grid, tol, window):
    """Distribution over [-tau, tau) at tau and tau/2; must agree to 1e-2 relative."""
    S = sup_modulus(P, 2 * window, int(panels_for(2 * window, P.max_freq, 16)))
    s = _level_grid(S, grid)
    vals = []
    for tau in (window / 2, window):
        cells = panels_for(2 * tau, P.max_freq, 64)
        gam = periodic_distribution_levels(P.evaluate, 2 * tau, s, cells, tol, start=-tau)
        vals.append(_norm_from_table(s, gam, params))
    if abs(vals[1] - vals[0]) > 1e-2 * max(abs(vals[1]), 1e-300):
        raise IncommensurableUnsupported(f"windowed Lorentz norm not settled: {vals[0]:.6g} at tau={window / 2}, "
                                         f"{vals[1]:.6g} at tau={window}")
    return vals[1]
