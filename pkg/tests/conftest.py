import functools
import os
from fractions import Fraction

import sympy
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from valdyn.numbers import Quad, is_infinite
from valdyn.poly import Poly

settings.register_profile(
    "valdyn", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("dev", max_examples=10, deadline=None)
settings.load_profile(os.environ.get("VALDYN_HYPOTHESIS_PROFILE", "valdyn"))

# completed (non-rejected) examples and outcomes per property test, "module::name"
PROPERTY_COUNTS: dict = {}
PROPERTY_PASSED: dict = {}
# PASS/FAIL lines from the acceptance criteria, keyed by criterion number
ACCEPTANCE: dict = {}


def count_examples(key, fn):
    """Make a hypothesis test tally its completed examples under key."""
    inner = fn.hypothesis.inner_test
    if getattr(inner, "_counted", False):
        return

    @functools.wraps(inner)
    def counted(*args, **kwargs):
        out = inner(*args, **kwargs)
        PROPERTY_COUNTS[key] = PROPERTY_COUNTS.get(key, 0) + 1
        return out

    counted._counted = True
    fn.hypothesis.inner_test = counted


def _key(item) -> str:
    return f"{item.module.__name__}::{item.name}"


def pytest_collection_modifyitems(session, config, items):
    for item in items:
        if hasattr(getattr(item, "obj", None), "hypothesis"):
            count_examples(_key(item), item.obj)
    # the property criterion reads the counts, so it goes last
    items.sort(key=lambda it: it.name == "test_criterion_7_property_suites")


def pytest_runtest_logreport(report):
    if report.when == "call":
        name = report.nodeid.split("::")[-1]
        module = report.nodeid.split("::")[0].rsplit("/", 1)[-1].removesuffix(".py")
        PROPERTY_PASSED[f"{module}::{name}"] = report.passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])


S1, S2 = sympy.symbols("z1 z2")


def to_sym(x):
    """Exact sympy number for a Fraction or Quad (independent oracle)."""
    if isinstance(x, Quad):
        return sympy.Rational(x.p.numerator, x.p.denominator) + sympy.Rational(
            x.q.numerator, x.q.denominator) * sympy.sqrt(x.D)
    if is_infinite(x):
        return sympy.oo if x > 0 else -sympy.oo
    x = Fraction(x)
    return sympy.Rational(x.numerator, x.denominator)


def sym_poly(p: Poly):
    return sum((to_sym(c) * S1 ** i * S2 ** j for (i, j), c in p.terms.items()), sympy.Integer(0))


small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=6)
pos_fracs = st.fractions(min_value=Fraction(1, 6), max_value=6, max_denominator=6)


@st.composite
def polys(draw, max_terms=4, max_deg=4, min_terms=1, zero_const=False):
    n = draw(st.integers(min_terms, max_terms))
    terms = {}
    for _ in range(n):
        i, j = draw(st.integers(0, max_deg)), draw(st.integers(0, max_deg))
        if zero_const and i == j == 0:
            i = 1
        terms[(i, j)] = Fraction(draw(st.sampled_from([-3, -2, -1, 1, 2, 3])))
    return Poly(terms)


FREE_COORDS = [Fraction(0), Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 2)]


def grow_sequence(mode, n, coin, pick):
    """Random valid blowup sequence with n steps: free points at small rational
    coordinates, satellite points among the live intersection points.
    coin() -> bool and pick(list) -> element supply the randomness."""
    from valdyn.blowup import INF_POINT, LOCAL, BlowupSeq, Free, Root, Satellite

    seq = BlowupSeq.local().apply(Root()) if mode == LOCAL else BlowupSeq.infinity()
    while len(seq.steps) + (0 if mode == LOCAL else 1) < n:
        live = seq.live_satpoints()
        if live and coin():
            s = pick(live)
            seq = seq.apply(Satellite(s.first, s.second))
            continue
        pid = pick(range(len(seq.primes)))
        options = [c for c in FREE_COORDS if seq.is_free_point(pid, c)]
        if seq.is_free_point(pid, INF_POINT):
            options.append(INF_POINT)
        if not options:
            continue
        seq = seq.apply(Free(pid, pick(options)))
    return seq


@st.composite
def blowup_sequences(draw, mode="local", max_steps=12, min_steps=1):
    n = draw(st.integers(min_steps, max_steps))
    return grow_sequence(mode, n, lambda: draw(st.booleans()), lambda xs: draw(st.sampled_from(list(xs))))
