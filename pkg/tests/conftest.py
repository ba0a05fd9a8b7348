import random
from fractions import Fraction

import pytest

from apcharge import charge_core as cc
from apcharge import tm_spaces as tm


@pytest.fixture
def ex_charge():
    """mu({n}) = 2^-n on finite/co-finite subsets of N, mu(N) = 5."""
    return cc.halving_charge(5)


@pytest.fixture
def uniform3():
    return cc.Charge.power_set({1: Fraction(1, 3), 2: Fraction(1, 3), 3: Fraction(1, 3)})


def random_power_charge(rng: random.Random, max_atoms: int = 8, exact: bool = True) -> cc.Charge:
    n = rng.randint(1, max_atoms)
    if exact:
        weights = {a: Fraction(rng.randint(0, 16), 16) for a in range(1, n + 1)}
    else:
        weights = {a: rng.random() for a in range(1, n + 1)}
    return cc.Charge.power_set(weights)


def random_simple(rng: random.Random, fld: cc.FieldOfSets, exact: bool = True, sign=None) -> cc.SimpleFunction:
    """Random simple function; one value per atom (power set) or per listed point (co-finite)."""
    def value():
        v = Fraction(rng.randint(-12, 12), rng.choice([1, 2, 4])) if exact else rng.uniform(-3, 3)
        if sign == "+":
            v = abs(v)
        elif sign == "-":
            v = -abs(v)
        return v
    if isinstance(fld, cc.FinitePowerSet):
        terms = [(value(), cc.finite(a)) for a in fld.atoms]
    else:
        pts = rng.sample(range(1, 12), rng.randint(0, 5))
        terms = [(value(), cc.finite(n)) for n in pts]
        terms.append((value(), cc.SetExpr(pts, cofinite=True)))
    return cc.SimpleFunction(fld, tuple(terms))


def random_accepted_sequence(mu, rng, horizon=64):
    """Finite-support part fixed, growing block with a fixed value, settled co-finite value.

    Values must not drift on sets of positive charge: the L^{p,inf} sup-residual
    sees any drift at full mass, however small.
    """
    k = rng.randint(0, 6)
    pts = rng.sample(range(1, 12), k)
    vals = [rng.uniform(-3, 3) for _ in pts]
    block = rng.uniform(-3, 3)
    tail = rng.choice([0.0, rng.uniform(-3, 3)])

    def gen(n):
        used = set(pts)
        blk = [m for m in range(12, 12 + n) if m not in used]
        terms = [(v, cc.finite(m)) for m, v in zip(pts, vals)]
        terms.append((block, cc.finite(*blk)))
        terms.append((tail, cc.cofinite(*used, *blk)))
        return cc.SimpleFunction(mu.field, tuple(terms))
    return tm.SimpleFunctionSequence(gen, mu, horizon)


# -- acceptance summary: one line per criterion at the end of the run ---------

def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")
    config.criteria_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark and rep.when == "call":
        item.config.criteria_results.append((mark.args[0], mark.args[1], rep.passed, rep.duration))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = sorted(getattr(config, "criteria_results", []))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, ok, secs in rows:
        terminalreporter.write_line(f"criterion {n:2d}  {'PASS' if ok else 'FAIL'}  {secs:7.2f}s  {title}")
