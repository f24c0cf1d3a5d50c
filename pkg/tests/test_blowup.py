import json
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given

from conftest import blowup_sequences, sym_poly
from valdyn.blowup import (
    INF_POINT,
    INFINITY,
    LOCAL,
    BlowupError,
    BlowupSeq,
    Free,
    GroundFieldError,
    Root,
    Satellite,
    chart_generic_multiplicity,
    chart_log_discrepancy,
    dual_graph,
    export_graph,
    intersection_matrix,
    is_tight,
    leading_minors,
    log_resolution,
    skewness_from_duals,
)
from valdyn.poly import Ideal, parse_poly

FOUR_STEPS = [Root(), Free(0, F(0)), Satellite(0, 1), Free(2, F(1))]
FOUR = BlowupSeq.from_steps(LOCAL, FOUR_STEPS)


def invariants(seq):
    return [(p.b, p.A, p.alpha) for p in seq.primes]


def test_local_root_blowup():
    seq = BlowupSeq.local().apply(Root())
    assert invariants(seq) == [(1, 2, -1)]


def test_worked_example_invariants():
    assert invariants(FOUR) == [(1, 2, -1), (1, 3, -2), (2, 5, -6), (2, 6, -7)]


def test_worked_example_chart_oracle():
    # b and A read off from chart pullbacks, independent of the recursion
    for p in FOUR.primes:
        assert chart_generic_multiplicity(FOUR, p.id) == p.b
        assert chart_log_discrepancy(FOUR, p.id) == p.A


def test_single_blowup_matrix():
    data = intersection_matrix(BlowupSeq.local().apply(Root()))
    assert data.matrix == ((-1,),)
    assert data.duals == ((-1,),)


def test_four_blowup_matrix():
    data = intersection_matrix(FOUR)
    assert data.matrix == ((-3, 0, 1, 0), (0, -2, 1, 0), (1, 1, -2, 1), (0, 0, 1, -1))
    assert sympy.Matrix(data.matrix).det() == 1


def test_infinity_root_matrix():
    assert BlowupSeq.infinity().matrix == ((1,),)


def test_four_blowup_graph():
    g = dual_graph(FOUR)
    lengths = {(e.i, e.j): e.length for e in g.edges}
    assert lengths == {(0, 2): F(1, 2), (2, 1): F(1, 2), (2, 3): F(1, 4)}
    assert {(e.i, e.j): e.multiplicity for e in g.edges} == {(0, 2): 1, (2, 1): 1, (2, 3): 2}


def test_single_blowup_graph():
    g = dual_graph(BlowupSeq.local().apply(Root()))
    assert len(g.vertices) == 1 and g.edges == ()


def test_single_blowup_with_marked_axis():
    g = dual_graph(BlowupSeq.local().apply(Root()), [parse_poly("z2")])
    assert len(g.vertices) == 1 and len(g.curves) == 1
    c = g.curve(0)
    assert c.prime == 0 and c.point == 0
    assert F(g.vertex(c.prime).b) == 1  # multiplicity of the curve edge


def test_marking_unresolved_curve_fails():
    with pytest.raises(BlowupError, match="resolve first"):
        dual_graph(BlowupSeq.local().apply(Root()), [parse_poly("z2^2 - z1^3")])


def test_resolution_of_worked_ideal():
    res = log_resolution(Ideal.parse("z2^2 - z1^3, z1^2*z2"))
    steps = res.seq.steps
    assert [type(s) for s in steps] == [Root, Free, Satellite, Free]
    assert steps[1] == Free(0, F(0)) and {steps[2].p1, steps[2].p2} == {0, 1} and steps[3].parent == 2
    assert res.Z == (2, 3, 6, 7)
    # Z oracle: order of the pulled-back ideal in each exceptional chart
    gens = [parse_poly("z2^2 - z1^3"), parse_poly("z1^2*z2")]
    for p in res.seq.primes:
        x, y = sympy.symbols("x y")
        fwd = [sym_poly(c.num).subs({sympy.Symbol("z1"): x, sympy.Symbol("z2"): y}) /
               sym_poly(c.den).subs({sympy.Symbol("z1"): x, sympy.Symbol("z2"): y}) for c in p.chart_a.fwd]
        orders = []
        for g in gens:
            e = sympy.factor(sym_poly(g).subs({sympy.Symbol("z1"): fwd[0], sympy.Symbol("z2"): fwd[1]},
                                              simultaneous=True))
            num, den = sympy.fraction(sympy.together(e))
            orders.append(sympy.Poly(num, x).monoms()[-1][0] - sympy.Poly(den, x).monoms()[-1][0])
        assert min(orders) == res.Z[p.id]


def test_resolution_of_maximal_ideal():
    res = log_resolution(Ideal.maximal())
    assert len(res.seq.steps) == 1 and res.Z == (1,)


def test_resolution_of_axis():
    res = log_resolution(Ideal.parse("z2"))
    assert len(res.seq.steps) == 1 and res.Z == (1,)
    assert any("fixed curve component" in f and "z2" in f for f in res.flags)


def test_irrational_base_point():
    with pytest.raises(GroundFieldError):
        log_resolution(Ideal.parse("z2^2 - 2*z1^2"))


def test_tightness_at_infinity():
    seq = BlowupSeq.infinity()
    assert is_tight(seq) == [True]
    seq = seq.apply(Free(0, INF_POINT))
    assert (seq.prime(1).A, seq.prime(1).alpha) == (-1, 0)
    assert is_tight(seq) == [True, True]
    seq = seq.apply(Free(1, F(0)))
    assert (seq.prime(2).A, seq.prime(2).alpha) == (0, -1)
    assert is_tight(seq)[2] is False


def test_export_formats():
    dot = export_graph(dual_graph(FOUR), "dot")
    assert dot.count("[label=\"E") == 4 and dot.count(" -- ") == 3
    assert dot.count("len=1/4") == 1
    assert 'E0 [b=1,A=2,alpha=-1]' in export_graph(dual_graph(BlowupSeq.local().apply(Root())))
    assert 'Linf [b=1,A=-2,alpha=1]' in export_graph(dual_graph(BlowupSeq.infinity()))
    obj = json.loads(export_graph(dual_graph(FOUR), "json"))
    assert [v["b"] for v in obj["vertices"]] == [1, 1, 2, 2]


def example_recursion(n_pairs):
    seq = BlowupSeq.local().apply(Root())
    for _ in range(n_pairs):
        last = len(seq.primes) - 1
        seq = seq.apply(Free(last, F(1) if last else F(0)))
        seq = seq.apply(Satellite(last + 1, last))
    return seq


def test_infinitely_singular_recursion():
    seq = example_recursion(10)
    for n in range(11):
        p = seq.prime(2 * n)
        assert p.b == 2 ** n
        assert F(p.A, p.b) == 3 - F(1, 2 ** n)
        assert F(p.alpha, p.b ** 2) == -(5 - F(2, 4 ** n)) / 3
        if n < 10:
            assert seq.prime(2 * n + 1).b == 2 ** n


@given(blowup_sequences(LOCAL))
def test_local_matrix_unimodular_negative_definite(seq):
    M = seq.matrix
    n = len(M)
    assert all(M[i][j] == M[j][i] for i in range(n) for j in range(n))
    oracle = sympy.Matrix(M)
    assert abs(oracle.det()) == 1
    minors = leading_minors(M)
    assert all((-1) ** (k + 1) * m > 0 for k, m in enumerate(minors))
    assert (-oracle).is_positive_definite


@given(blowup_sequences(INFINITY))
def test_infinity_matrix_unimodular(seq):
    M = sympy.Matrix(seq.matrix)
    assert M == M.T and abs(M.det()) == 1


@given(blowup_sequences(LOCAL))
def test_alpha_two_ways_and_dual_pairs(seq):
    data = intersection_matrix(seq)
    for p in seq.primes:
        assert skewness_from_duals(seq, p.id) == p.alpha
        assert data.dual_product(p.id, p.id) == p.alpha
    g = dual_graph(seq)
    for e in g.edges:
        bi, bj = seq.prime(e.i).b, seq.prime(e.j).b
        vec = [bi * x - bj * y for x, y in zip(data.duals[e.j], data.duals[e.i])]
        M = data.matrix
        sq = sum(vec[a] * M[a][c] * vec[c] for a in range(len(vec)) for c in range(len(vec)))
        assert sq == -bi * bj


@given(blowup_sequences(LOCAL))
def test_edge_relation_and_monotone_walks(seq):
    g = dual_graph(seq)
    for e in g.edges:
        vi, vj = g.vertex(e.i), g.vertex(e.j)
        assert vj.A_norm - vi.A_norm == -e.multiplicity * (vj.alpha_norm - vi.alpha_norm)
        assert vi.alpha_norm - vj.alpha_norm == e.length
    for v in g.vertices:
        path = g.path_from_root(v.id)
        al = [g.vertex(k).alpha_norm for k in path]
        As = [g.vertex(k).A_norm for k in path]
        assert all(x > y for x, y in zip(al, al[1:]))
        assert all(x < y for x, y in zip(As, As[1:]))


@given(blowup_sequences(LOCAL, max_steps=8))
def test_recursion_matches_chart_oracle(seq):
    for p in seq.primes:
        assert chart_generic_multiplicity(seq, p.id) == p.b
        assert chart_log_discrepancy(seq, p.id) == p.A


@given(blowup_sequences(LOCAL))
def test_json_replay(seq):
    again = BlowupSeq.from_json(json.dumps(seq.to_json()))
    assert again == seq
    assert export_graph(dual_graph(again), "json") == export_graph(dual_graph(seq), "json")
