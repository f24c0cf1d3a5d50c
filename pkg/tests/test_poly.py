from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conftest import S1, S2, polys, pos_fracs, sym_poly
from valdyn.numbers import PLUS_INF, AffineForm
from valdyn.poly import (
    Ideal,
    Poly,
    PolyMap,
    RatFunc,
    compose,
    compose_jet,
    format_poly,
    h_adic_order,
    jacobian,
    parse_poly,
    weighted_min,
    weighted_min_param,
)

GOLDEN = PolyMap.parse("z2; z1*z2")
SKEW = PolyMap.parse("z1^2; z1*z2^2")
CUSP = parse_poly("z2^2 - z1^3")


def sym_compose(f: PolyMap, g: PolyMap):
    g1, g2 = sym_poly(g.f1), sym_poly(g.f2)
    return [sympy.expand(sym_poly(h).subs({S1: g1, S2: g2}, simultaneous=True)) for h in f]


def test_parse_and_format():
    p = parse_poly("z1^2*z2 - 3/2*z2^3")
    assert p.terms == {(2, 1): 1, (0, 3): F(-3, 2)}
    assert parse_poly(format_poly(p)) == p
    assert parse_poly(" z1 *z2+ 1 ") == Poly({(1, 1): 1, (0, 0): 1})
    with pytest.raises(ValueError):
        parse_poly("z3")
    with pytest.raises(ValueError):
        PolyMap.parse("z1")


def test_compose_golden_square():
    g = compose(GOLDEN, GOLDEN)
    assert g == PolyMap.parse("z1*z2; z1*z2^2")
    assert [sym_poly(h) for h in g] == sym_compose(GOLDEN, GOLDEN)


def test_compose_with_identity():
    assert compose(SKEW, PolyMap.identity()) == SKEW


def test_compose_skew_square_degree():
    g = compose(SKEW, SKEW)
    assert g == PolyMap.parse("z1^4; z1^4*z2^4")
    assert g.degree() == 8 == (2 + 2) * 2 ** (2 - 1)


def test_jacobians():
    assert jacobian(GOLDEN) == parse_poly("-z2")
    assert jacobian(SKEW) == parse_poly("4*z1^2*z2")
    assert jacobian(PolyMap.identity()) == Poly.const(1)


def test_weighted_min_examples():
    assert weighted_min(CUSP, (1, 1)) == 2
    assert weighted_min(CUSP, (2, 3)) == 6
    env = weighted_min_param(CUSP, (AffineForm(F(1), F(0)), AffineForm(F(0), F(1))), (F(1), PLUS_INF))
    assert env.breaks == (F(3, 2),)
    assert env(F(1)) == 2 and env(F(2)) == 3


def test_weighted_min_with_infinite_weight():
    assert weighted_min(parse_poly("z2"), (1, PLUS_INF)) == PLUS_INF
    assert weighted_min(parse_poly("z1 + z2"), (1, PLUS_INF)) == 1


def test_h_adic_orders():
    assert h_adic_order(parse_poly("z1*z2^2"), parse_poly("z2")) == 2
    h = parse_poly("z2 - z1^2")
    assert h_adic_order(h ** 3 * parse_poly("z1 + 1"), h) == 3
    assert h_adic_order(parse_poly("z1 + z2"), parse_poly("z2")) == 0


def test_rational_function_normal_form():
    r = RatFunc(parse_poly("z1^2 - z2^2"), parse_poly("z1 - z2")).cancel()
    assert r == RatFunc.of(parse_poly("z1 + z2"))


def test_ideal_parse_and_order():
    a = Ideal.parse("z2^2 - z1^3, z1^2*z2")
    assert len(a.gens) == 2 and a.order() == 2
    assert Ideal.maximal().power(2).order() == 2


weights = st.tuples(pos_fracs, pos_fracs)


@given(polys(), polys(), weights)
def test_weighted_min_is_multiplicative(p, q, w):
    assert weighted_min(p * q, w) == weighted_min(p, w) + weighted_min(q, w)


@given(polys(), polys(), weights)
def test_weighted_min_is_ultrametric(p, q, w):
    s = p + q
    if s.is_zero():
        return
    assert weighted_min(s, w) >= min(weighted_min(p, w), weighted_min(q, w))


@given(polys(max_terms=3, max_deg=3), polys(max_terms=3, max_deg=3),
       polys(max_terms=3, max_deg=3), polys(max_terms=3, max_deg=3))
def test_compose_matches_sympy_and_degree_bound(a, b, c, d):
    f, g = PolyMap(a, b), PolyMap(c, d)
    h = compose(f, g)
    assert [sym_poly(x) for x in h] == sym_compose(f, g)
    assert h.degree() <= f.degree() * g.degree()


def sym_jet(expr, K):
    p = sympy.Poly(expr, S1, S2)
    return sum((c * S1 ** i * S2 ** j for (i, j), c in p.terms() if i + j <= K), sympy.Integer(0))


@given(polys(max_terms=3, max_deg=3, zero_const=True), polys(max_terms=3, max_deg=3, zero_const=True),
       polys(max_terms=3, max_deg=3, zero_const=True), polys(max_terms=3, max_deg=3, zero_const=True),
       st.integers(1, 8))
def test_jet_compose_matches_truncated_sympy(a, b, c, d, K):
    f, g = PolyMap(a, b), PolyMap(c, d)
    jet = compose_jet(f, g, K)
    assert [sym_poly(x) for x in jet] == [sym_jet(e, K) for e in sym_compose(f, g)]


monomials = st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda e: e != (0, 0))


@given(monomials, monomials, monomials, monomials)
def test_monomial_compose_degree_is_multiplicative(e1, e2, e3, e4):
    f = PolyMap(Poly.monomial(*e1), Poly.monomial(*e2))
    g = PolyMap(Poly.monomial(*e3), Poly.monomial(*e4))
    assert compose(f, g).degree() <= f.degree() * g.degree()
    # equality for power maps
    fp = PolyMap(Poly.monomial(e1[0] + 1, 0), Poly.monomial(0, e1[0] + 1))
    gp = PolyMap(Poly.monomial(e3[0] + 1, 0), Poly.monomial(0, e3[0] + 1))
    assert compose(fp, gp).degree() == fp.degree() * gp.degree()


HS = [parse_poly(t) for t in ("z2", "z1", "z2 - z1^2", "z1 + z2 + 1", "z2^2 - z1^3")]


@given(polys(max_terms=3, max_deg=3), polys(max_terms=3, max_deg=3), st.sampled_from(HS),
       st.integers(0, 2), st.integers(0, 2))
def test_h_adic_order_is_additive(p, q, h, k, m):
    pp, qq = p * h ** k, q * h ** m
    assert h_adic_order(pp * qq, h) == h_adic_order(pp, h) + h_adic_order(qq, h)
    # oracle: largest power dividing, via sympy
    sp = sympy.Poly(sym_poly(pp), S1, S2)
    sh = sympy.Poly(sym_poly(h), S1, S2)
    n = 0
    while True:
        quo, rem = sp.div(sh)
        if not rem.is_zero:
            break
        sp, n = quo, n + 1
    assert h_adic_order(pp, h) == n
