from fractions import Fraction as F

import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import S1, S2, blowup_sequences, sym_poly, to_sym
from valdyn.blowup import INFINITY, LOCAL, BlowupSeq, Root, dual_graph
from valdyn.dynamics import (
    DynamicsError,
    EdgeKey,
    MapGerm,
    analyze_infinity,
    analyze_local,
    attraction_factor,
    edge_return_map,
    find_fixed_point,
    image_valuation,
    sequences,
    step_retracted,
)
from valdyn.numbers import PLUS_INF, quad
from valdyn.poly import PolyMap, compose, iterate, jacobian, parse_poly
from valdyn.valuation import (
    curve_valuation,
    divisorial,
    log_discrepancy,
    minus_degree,
    monomial,
    ord0,
    parametrize,
    point_valuation,
    skewness,
)

PHI = quad(F(1, 2), F(1, 2), 5)
GOLDEN = PolyMap.parse("z2; z1*z2")
SKEW = PolyMap.parse("z1^2; z1*z2^2")
Z1, Z2 = parse_poly("z1"), parse_poly("z2")
E0_WITH_AXIS = dual_graph(BlowupSeq.local().apply(Root()), [Z2])
CURVE = EdgeKey("curve", (0,))


def oracle_local(f, n):
    """c(f^k) for k <= n by brute-force sympy composition."""
    g1, g2 = S1, S2
    out = []
    for _ in range(n):
        g1, g2 = (sympy.expand(sym_poly(f.f1).subs({S1: g1, S2: g2}, simultaneous=True)),
                  sympy.expand(sym_poly(f.f2).subs({S1: g1, S2: g2}, simultaneous=True)))
        orders = [min(sum(m) for m in sympy.Poly(g, S1, S2).monoms()) for g in (g1, g2)]
        out.append(min(orders))
    return out


def oracle_degrees(f, n):
    g1, g2 = S1, S2
    out = []
    for _ in range(n):
        g1, g2 = (sympy.expand(sym_poly(f.f1).subs({S1: g1, S2: g2}, simultaneous=True)),
                  sympy.expand(sym_poly(f.f2).subs({S1: g1, S2: g2}, simultaneous=True)))
        out.append(max(sympy.Poly(g1, S1, S2).total_degree(), sympy.Poly(g2, S1, S2).total_degree()))
    return out


def vals(v):
    return v.eval(Z1), v.eval(Z2)


def test_attraction_factors():
    loc, inf = MapGerm(GOLDEN, LOCAL), MapGerm(GOLDEN, INFINITY)
    assert attraction_factor(loc, ord0()) == 1
    assert attraction_factor(inf, minus_degree()) == 2
    assert attraction_factor(loc, curve_valuation(Z2)) == PLUS_INF


def test_step_retracted_examples():
    germ = MapGerm(GOLDEN, LOCAL)
    gp = step_retracted(germ, ord0(), E0_WITH_AXIS)
    assert gp.kind == "curve"
    assert vals(point_valuation(E0_WITH_AXIS, gp)) == (1, 2)
    end = step_retracted(germ, curve_valuation(Z2), E0_WITH_AXIS)
    assert end.kind == "vertex" and end.ids == (0,)
    germ3 = MapGerm(PolyMap.parse("z1^3; z2^2"), LOCAL)
    g = dual_graph(BlowupSeq.local().apply(Root()))
    gp = step_retracted(germ3, ord0(), g)
    assert vals(image_valuation(germ3, ord0())) == (F(3, 2), 1)
    assert gp.kind == "vertex"  # (3/2, 1) retracts to ord0 on the one-vertex graph


def test_edge_return_golden():
    ret = edge_return_map(MapGerm(GOLDEN, LOCAL), E0_WITH_AXIS, CURVE)
    for t in (F(1), F(3, 2), F(2), F(7)):
        assert ret.image(t) == (1 + t) / t
        assert ret.factor(t) == t


def test_edge_return_identity():
    ret = edge_return_map(MapGerm(PolyMap.identity(), LOCAL), E0_WITH_AXIS, CURVE)
    for t in (F(1), F(5, 2), F(9)):
        assert ret.image(t) == t and ret.factor(t) == 1


def test_edge_return_breakpoint():
    ret = edge_return_map(MapGerm(PolyMap.parse("z1^3; z2^2"), LOCAL), E0_WITH_AXIS, CURVE)
    assert ret.factor.breaks == (F(3, 2),)
    for t in (F(1), F(5, 4), F(3, 2), F(2), F(6)):
        assert ret.factor(t) == min(3, 2 * t)
        # image monomial (3, 2t): back on the z2 branch only when 2t >= 3
        assert ret.image(t) == (F(2) * t / 3 if 2 * t >= 3 else None)


def test_fixed_points():
    fp = find_fixed_point(MapGerm(GOLDEN, LOCAL), E0_WITH_AXIS)
    assert fp.point.kind == "curve" and fp.exact
    assert -fp.point.alpha == PHI
    fp = find_fixed_point(MapGerm(PolyMap.identity(), LOCAL), E0_WITH_AXIS)
    assert fp.point.kind == "vertex" and fp.point.ids == (0,)
    fp = find_fixed_point(MapGerm(PolyMap.parse("z1^2; z2^3"), LOCAL), E0_WITH_AXIS)
    assert fp.point.is_curve_end and fp.attracting


def test_analyze_local_golden():
    rep = analyze_local(GOLDEN, 6)
    assert (rep.growth.a, rep.growth.b) == (1, 1)
    assert to_sym(rep.growth.value) == (1 + sympy.sqrt(5)) / 2
    v = rep.eigenvaluation
    assert vals(v) == (1, PHI)
    assert to_sym(rep.delta) == sympy.nsimplify(2 / (1 + sympy.sqrt(5)))
    assert rep.case == "fixed-quasimonomial" and rep.bounds_ok


def test_analyze_local_curve_end():
    f = PolyMap.parse("z1^2; z2^3")
    rep = analyze_local(f, 6)
    assert rep.growth.value == 2 and rep.case == "curve-end"
    assert rep.eigenvaluation.kind == "curve" and rep.eigenvaluation.curve == Z2
    assert list(rep.sequence.values) == oracle_local(f, 6) == [2 ** n for n in range(1, 7)]


def test_analyze_local_identity():
    rep = analyze_local(PolyMap.identity(), 4)
    assert rep.growth.value == 1 and (rep.growth.a, rep.growth.b) == (1, 0)
    assert rep.case == "fixed-quasimonomial"


def test_analyze_infinity_golden():
    rep = analyze_infinity(GOLDEN)
    assert rep.case == "a" and to_sym(rep.growth.value) == (1 + sympy.sqrt(5)) / 2


def test_analyze_infinity_skew():
    rep = analyze_infinity(SKEW, 6)
    assert rep.case == "b" and rep.growth.value == 2
    assert list(rep.sequence.values) == [(n + 2) * 2 ** (n - 1) for n in range(1, 7)]
    p, q = rep.model
    assert all((p * n + q) * 2 ** n == (n + 2) * 2 ** (n - 1) for n in range(1, 7))


def test_analyze_infinity_power_map():
    rep = analyze_infinity(PolyMap.parse("z1^2; z2^2"))
    assert rep.case == "a" and rep.growth.value == 2 and rep.C == 1
    assert list(rep.sequence.values) == [2 ** n for n in range(1, 7)]


def test_sequences_against_composition_oracle():
    assert sequences(GOLDEN, 5).values == (1, 2, 3, 5, 8) == tuple(oracle_local(GOLDEN, 5))
    assert sequences(GOLDEN, 5, INFINITY).values == (2, 3, 5, 8, 13) == tuple(oracle_degrees(GOLDEN, 5))
    assert sequences(SKEW, 4, INFINITY).values == (3, 8, 20, 48)
    assert sequences(GOLDEN, 6, parallel=True) == sequences(GOLDEN, 6)


def test_degree_cap_truncates():
    s = sequences(GOLDEN, 8, INFINITY, degree_cap=20)
    assert not s.complete and s.values == (2, 3, 5, 8)


def test_non_dominant_map_rejected():
    with pytest.raises(DynamicsError):
        MapGerm(PolyMap.parse("z1; z1"), LOCAL)


def test_report_certificates_recheck():
    # sympy expands f^n in full, so the quartic map gets a shallower oracle
    for f, depth in ((GOLDEN, 6), (PolyMap.parse("z1^2; z2^3"), 6), (PolyMap.parse("z1^3 + z2^4; z1*z2"), 3)):
        rep = analyze_local(f, 6)
        c, d = rep.growth.value, rep.delta
        expected = oracle_local(f, depth)
        assert list(rep.sequence.values[:depth]) == expected
        for n, cn in enumerate(expected, 1):
            assert d * c ** n <= cn <= c ** n
        assert len(rep.checked) >= 20


LOCAL_MAPS = [PolyMap.parse(t) for t in (
    "z2; z1*z2", "z1^3; z2^2", "z1^2; z1*z2^2", "z1 + z2^2; z1*z2", "z1^2 - z2^3; z1*z2", "z2^2; z1^2 + z2^3",
)]
INF_MAPS = [PolyMap.parse(t) for t in (
    "z2; z1*z2", "z1^2; z1*z2^2", "z1^2; z2^2", "z2; z1 + z2^2", "z1 + z2^2; z2", "z1*z2; z2^2 + z1",
)]
weights = st.tuples(st.fractions(min_value=F(1, 3), max_value=3, max_denominator=4),
                    st.fractions(min_value=F(1, 3), max_value=3, max_denominator=4))


@given(st.sampled_from(LOCAL_MAPS), weights, st.integers(1, 4))
def test_cocycle_law(f, w, n):
    germ = MapGerm(f, LOCAL)
    v = monomial(*w)
    product, vi = F(1), v
    for _ in range(n):
        c = attraction_factor(germ, vi)
        assume(not isinstance(vi, type(image_valuation)) and c != PLUS_INF)
        product *= c
        vi = image_valuation(germ, vi)
    assert attraction_factor(MapGerm(iterate(f, n), LOCAL), v) == product


@given(st.sampled_from(LOCAL_MAPS), st.integers(1, 4), st.integers(1, 4))
def test_supermultiplicative_local_orders(f, n, m):
    loc = sequences(f, n + m).values
    assert loc[n + m - 1] >= loc[n - 1] * loc[m - 1]


# full composition: keep to quadratic maps so f^6 stays small
@given(st.sampled_from(INF_MAPS), st.integers(1, 3), st.integers(1, 3))
def test_submultiplicative_degrees(f, n, m):
    deg = sequences(f, n + m, INFINITY).values
    assert deg[n + m - 1] <= deg[n - 1] * deg[m - 1]


@given(st.sampled_from(LOCAL_MAPS), weights)
def test_log_discrepancy_transformation(f, w):
    germ = MapGerm(f, LOCAL)
    v = monomial(*w)
    c = attraction_factor(germ, v)
    fv = image_valuation(germ, v)
    jac = jacobian(f)
    sym_jac = sympy.Matrix([[sympy.diff(sym_poly(g), s) for s in (S1, S2)] for g in f]).det()
    assert sym_poly(jac) == sympy.expand(sym_jac)
    # A is homogeneous: A(f_* v) = c * A(normalized image)
    assert c * log_discrepancy(fv) == log_discrepancy(v) + v.eval(jac)


@given(st.sampled_from(INF_MAPS), blowup_sequences(INFINITY, max_steps=6), st.data())
def test_tight_invariance(f, seq, data):
    tight = [p.id for p in seq.primes if F(p.A, p.b) <= 0 <= F(p.alpha, p.b ** 2)]
    pid = data.draw(st.sampled_from(tight))
    v = divisorial(seq, pid)
    fv = image_valuation(MapGerm(f, INFINITY), v)
    assert log_discrepancy(fv) <= 0 <= skewness(fv)


@given(st.sampled_from(LOCAL_MAPS), weights)
def test_izumi_on_images(f, w):
    fv = image_valuation(MapGerm(f, LOCAL), monomial(*w))
    alpha = parametrize(fv).alpha
    for phi in (Z1, Z2, parse_poly("z1 + z2"), parse_poly("z2^2 - z1^3")):
        o = ord0().eval(phi)
        assert o <= fv.eval(phi) <= -alpha * o
