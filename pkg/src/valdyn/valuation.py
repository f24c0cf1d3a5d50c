"""Semivaluations on the valuative trees at the origin and at infinity.

A valuation is stored as a monomial valuation in some chart (x, y) -> (z1, z2):
v(phi) = weighted_min(phi o chart, weights) / scale. Curve semivaluations use
the weight +inf on the curve's coordinate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Sequence

from .blowup import (
    INF_POINT,
    INFINITY,
    INFINITY_CHART_A,
    INFINITY_CHART_B,
    LOCAL,
    ORIGIN_CHART,
    BlowupSeq,
    Chart,
    CurveSeries,
    DualGraph,
    Free,
    Root,
    Satellite,
    attach_curve,
    dual_graph,
    prime_name,
)
from .numbers import (
    MINUS_INF,
    PLUS_INF,
    is_infinite,
    scalar_to_json,
    sign,
)
from .poly import Poly, RatFunc, Z1, Z2, format_poly, initial_form, weighted_min


class ValuationError(ValueError):
    pass


def _ext_sub(a, b):
    if is_infinite(a) and is_infinite(b):
        if a == b:
            raise ValuationError("value of the form inf - inf")
        return a
    if is_infinite(b):
        return -b
    return a - b


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


# ---------------------------------------------------------------- graph points


@dataclass(frozen=True)
class GraphPoint:
    """A point of a dual graph: a vertex, an edge-interior point, or a point on
    the segment joining a vertex to a marked curve end (tau = +inf is the end).

    ids: (prime,) for vertices, (i, j) for edges with i nearer the root,
    (prime, curve index) for curve segments. weights are the normalized
    monomial weights in the carrying chart, ordered like ids; alpha and A are
    the normalized skewness and log discrepancy.
    """

    kind: str
    ids: tuple
    weights: tuple
    alpha: object
    A: object
    sat: int | None = None

    @property
    def is_curve_end(self) -> bool:
        return self.kind == "curve" and is_infinite(self.weights[1])

    def label(self, seq: BlowupSeq) -> str:
        if self.kind == "vertex":
            return prime_name(seq, self.ids[0])
        if self.kind == "edge":
            return f"{prime_name(seq, self.ids[0])}-{prime_name(seq, self.ids[1])}@alpha={self.alpha}"
        if self.is_curve_end:
            return f"C{self.ids[1]}"
        return f"{prime_name(seq, self.ids[0])}-C{self.ids[1]}@alpha={self.alpha}"

    def to_json(self, seq: BlowupSeq) -> dict:
        out = {"kind": self.kind, "ids": [prime_name(seq, self.ids[0])], "weights": [scalar_to_json(w) for w in self.weights],
               "alpha": scalar_to_json(self.alpha), "A": scalar_to_json(self.A)}
        if self.kind == "edge":
            out["ids"].append(prime_name(seq, self.ids[1]))
        if self.kind == "curve":
            out["ids"].append(f"C{self.ids[1]}")
        return out


def vertex_point(graph: DualGraph, pid: int) -> GraphPoint:
    v = graph.vertex(pid)
    return GraphPoint("vertex", (pid,), (Fraction(1, v.b), Fraction(0)), v.alpha_norm, v.A_norm)


def edge_point(graph: DualGraph, sat_id: int, a, b) -> GraphPoint:
    """Point with (unnormalized) weights a on sat.first and b on sat.second."""
    S = graph.seq.satpoints[sat_id]
    e = next(e for e in graph.edges if e.sat == sat_id)
    w = {S.first: a, S.second: b}
    bi, bj = graph.vertex(e.i), graph.vertex(e.j)
    n = bi.b * w[e.i] + bj.b * w[e.j]
    ti, tj = w[e.i] / n, w[e.j] / n
    if sign(ti) <= 0 or sign(tj) <= 0:
        raise ValuationError("edge point must lie strictly inside the edge")
    alpha = ti * Fraction(bi.alpha, bi.b) + tj * Fraction(bj.alpha, bj.b)
    A = ti * bi.A + tj * bj.A
    return GraphPoint("edge", (e.i, e.j), (ti, tj), alpha, A, sat_id)


def curve_point(graph: DualGraph, index: int, a, b) -> GraphPoint:
    mark = graph.curve(index)
    F = graph.vertex(mark.prime)
    tau = b / (F.b * a) if not is_infinite(b) else PLUS_INF
    if is_infinite(tau):
        alpha, A = MINUS_INF, PLUS_INF
    else:
        alpha = F.alpha_norm - tau / F.b
        A = F.A_norm + tau
    return GraphPoint("curve", (mark.prime, index), (Fraction(1, F.b), tau), alpha, A)


def edge_point_at_alpha(graph: DualGraph, i: int, j: int, alpha) -> GraphPoint:
    """The point of edge (i, j) with the given normalized skewness."""
    e = graph.edge(i, j)
    vi, vj = graph.vertex(e.i), graph.vertex(e.j)
    lo, hi = vj.alpha_norm, vi.alpha_norm
    if not lo < alpha < hi:
        raise ValuationError("alpha outside the open edge")
    # t_i/b_i * ... : solve b_i t_i + b_j t_j = 1 and alpha = t_i a_i/b_i + t_j a_j/b_j
    ai, aj = Fraction(vi.alpha, vi.b), Fraction(vj.alpha, vj.b)
    # t_j = (alpha - ai/b_i) / (aj - ai*b_j/b_i)
    tj = (alpha - ai / vi.b) / (aj - ai * vj.b / vi.b)
    ti = (1 - vj.b * tj) / vi.b
    S = graph.seq.satpoints[e.sat]
    w = {e.i: ti, e.j: tj}
    return edge_point(graph, e.sat, w[S.first], w[S.second])


def point_multiplicity(graph: DualGraph, gp: GraphPoint) -> tuple[object, bool]:
    """(m, interpolated?) for a graph point."""
    if gp.kind == "vertex":
        return graph.vertex(gp.ids[0]).b, False
    if gp.kind == "edge":
        bi, bj = graph.vertex(gp.ids[0]).b, graph.vertex(gp.ids[1]).b
        return gcd(bi, bj), True
    b = graph.vertex(gp.ids[0]).b
    return b, not gp.is_curve_end


# ---------------------------------------------------------------- valuations


class Normalization(Enum):
    LOCAL = "local"
    INFINITY = "infinity"
    NONE = "unnormalized"


@dataclass(frozen=True)
class Valuation:
    mode: str
    chart: Chart
    weights: tuple
    scale: object = Fraction(1)
    curve: Poly | None = None
    seq: BlowupSeq | None = field(default=None, compare=False)
    point: GraphPoint | None = field(default=None, compare=False)
    normalization: Normalization = Normalization.NONE
    series: CurveSeries | None = field(default=None, compare=False)

    @property
    def kind(self) -> str:
        return "curve" if is_infinite(self.weights[1]) or is_infinite(self.weights[0]) else "quasimonomial"

    def working_chart(self) -> Chart:
        """A chart in which v is exactly monomial with the stored weights."""
        if self.series is None:
            return self.chart
        wx, wy = self.weights
        if is_infinite(wy):
            raise ValuationError("a curve end has no finite straightening chart")
        return self.series.chart(self.series.precision_for(wy / wx))

    def raw(self, phi):
        if self.series is not None and is_infinite(self.weights[1]):
            r = self.series.base.pull(phi)
            return _ext_sub(self.series.order_on_curve(r.num), self.series.order_on_curve(r.den)) * self.weights[0]
        r = self.working_chart().pull(phi)
        top = weighted_min(r.num, self.weights)
        bot = weighted_min(r.den, self.weights)
        return _ext_sub(top, bot)

    def eval(self, phi):
        if isinstance(phi, (int, Fraction)):
            return PLUS_INF if phi == 0 else Fraction(0)
        val = self.raw(phi)
        return val if is_infinite(val) else val / self.scale

    __call__ = eval

    def eval_ideal(self, gens: Sequence) -> object:
        vals = [self.eval(g) for g in gens]
        out = vals[0]
        for x in vals[1:]:
            out = x if x < out else out
        return out

    def residue(self, phi):
        """The constant c with v(phi - c) > v(phi) = 0, or None."""
        r = self.working_chart().pull(phi)
        top = initial_form(r.num, self.weights)
        bot = initial_form(r.den, self.weights)
        e, c0 = next(iter(sorted(bot.terms.items())))
        c = top.terms.get(e, Fraction(0)) / c0
        if c != 0 and (top - bot.scale(c)).is_zero():
            return c
        return None

    def normalizing_value(self):
        if self.mode == LOCAL:
            v = _ext_min(self.raw(Z1), self.raw(Z2))
            return v
        v = _ext_min(Fraction(0), _ext_min(self.raw(Z1), self.raw(Z2)))
        return -v

    def normalized(self) -> Valuation:
        s = self.normalizing_value()
        if is_infinite(s) or sign(s) <= 0:
            raise ValuationError("valuation cannot be normalized (not centered at the origin or at infinity)")
        norm = Normalization.LOCAL if self.mode == LOCAL else Normalization.INFINITY
        return Valuation(self.mode, self.chart, self.weights, s, self.curve, self.seq, self.point, norm, self.series)

    def image(self, fmap) -> Valuation:
        """Unnormalized pushforward phi -> v(phi o f)."""
        fwd = tuple(RatFunc.of(self.working_chart().pull(g)) for g in fmap)
        chart = Chart(fwd, (None, None))
        return Valuation(self.mode, chart, self.weights, self.scale, None, None, None, Normalization.NONE)

    def to_json(self) -> dict:
        out = {"mode": self.mode, "kind": self.kind, "normalization": self.normalization.value,
               "weights": [scalar_to_json(w) for w in self.weights], "scale": scalar_to_json(self.scale),
               "chart": [str(g) for g in self.chart.fwd]}
        if self.seq is not None:
            out["sequence"] = self.seq.to_json()
        if self.point is not None and self.seq is not None:
            out["point"] = self.point.to_json(self.seq)
        if self.curve is not None:
            out["curve"] = format_poly(self.curve)
        return out

    def __str__(self):
        if self.point is not None and self.seq is not None:
            return self.point.label(self.seq)
        return f"monomial{tuple(self.weights)} in chart ({self.chart.fwd[0]}, {self.chart.fwd[1]})"


def _ext_min(a, b):
    return a if a <= b else b


def _base_seq(mode: str) -> BlowupSeq:
    return BlowupSeq.local().apply(Root()) if mode == LOCAL else BlowupSeq.infinity()


def monomial(w1, w2, mode: str = LOCAL) -> Valuation:
    """Monomial valuation with v(z1) = w1, v(z2) = w2 (normalized).

    In infinity mode the weights are the values on z1, z2 and must have a
    negative minimum; the valuation is realized in a chart at infinity.
    """
    if any(is_infinite(w) for w in (w1, w2)):
        raise ValuationError("use curve_valuation for infinite weights")
    if mode == LOCAL:
        if sign(w1) < 0 or sign(w2) < 0 or (sign(w1) == 0 and sign(w2) == 0):
            raise ValuationError("local weights must be nonnegative and not both zero")
        return Valuation(LOCAL, ORIGIN_CHART, (w1, w2), seq=_base_seq(LOCAL)).normalized()
    if not (sign(w1) < 0 or sign(w2) < 0):
        raise ValuationError("a valuation at infinity needs a negative value on z1 or z2")
    if w1 <= w2:
        chart, weights = INFINITY_CHART_A, (-w1, w2 - w1)
    else:
        chart, weights = INFINITY_CHART_B, (-w2, w1 - w2)
    return Valuation(INFINITY, chart, weights, seq=_base_seq(INFINITY)).normalized()


def ord0() -> Valuation:
    return monomial(Fraction(1), Fraction(1))


def minus_degree() -> Valuation:
    return monomial(Fraction(-1), Fraction(-1), INFINITY)


def curve_valuation(h: Poly, seq: BlowupSeq | None = None, mode: str = LOCAL) -> Valuation:
    seq = seq or _base_seq(mode)
    mark = attach_curve(seq, h)
    g = dual_graph(seq, [h])
    gp = curve_point(g, 0, Fraction(1), PLUS_INF)
    return Valuation(seq.mode, mark.chart, (Fraction(1), PLUS_INF), curve=h, seq=seq, point=gp,
                     series=mark.series).normalized()


def point_valuation(graph: DualGraph, gp: GraphPoint) -> Valuation:
    seq = graph.seq
    if gp.kind == "vertex":
        chart = seq.prime(gp.ids[0]).chart_a
        weights = gp.weights
        curve = None
    elif gp.kind == "edge":
        S = seq.satpoints[gp.sat]
        w = dict(zip(gp.ids, gp.weights))
        chart, weights, curve = S.chart, (w[S.first], w[S.second]), None
    else:
        mark = graph.curve(gp.ids[1])
        chart, weights, curve = mark.chart, gp.weights, (mark.h if gp.is_curve_end else None)
        return Valuation(seq.mode, chart, weights, curve=curve, seq=seq, point=gp, series=mark.series).normalized()
    return Valuation(seq.mode, chart, weights, curve=curve, seq=seq, point=gp).normalized()


def divisorial(seq: BlowupSeq, pid: int) -> Valuation:
    g = dual_graph(seq)
    return point_valuation(g, vertex_point(g, pid))


# ---------------------------------------------------------------- retraction


def _center_coordinate(v: Valuation, chart: Chart):
    s = v.eval(chart.inv[1])
    if s > 0:
        return Fraction(0)
    if s < 0:
        return INF_POINT
    return v.residue(chart.inv[1])


def _walk(v: Valuation, graph: DualGraph):
    """Follow the center of v through the blowup tree.

    Returns (graph point of the retraction, center) where center is
    ("generic", prime) | ("free", prime, c) | ("sat", sat id, a, b).
    """
    seq = graph.seq
    if v.mode != seq.mode:
        raise ValuationError("valuation and blowup sequence live in different modes")
    state = ("prime", seq.root)
    for _ in range(4 * len(seq.primes) + 8):
        if state[0] == "prime":
            F = seq.prime(state[1])
            c = _center_coordinate(v, F.chart_a)
            if c is None:
                return vertex_point(graph, F.id), ("generic", F.id)
            entry = F.points.get(c)
            if entry is None:
                for mark in graph.curves:
                    if mark.prime == F.id and mark.point == c:
                        a, b = v.eval(mark.chart.inv[0]), v.eval(mark.coord)
                        if b > 0:
                            return curve_point(graph, mark.index, a, b), ("free", F.id, c)
                return vertex_point(graph, F.id), ("free", F.id, c)
            state = ("prime", entry[1]) if entry[0] == "blown" else ("sat", entry[1])
            continue
        S = seq.satpoints[state[1]]
        a, b = v.eval(S.chart.inv[0]), v.eval(S.chart.inv[1])
        if S.blown_by is None:
            return edge_point(graph, S.id, a, b), ("sat", S.id, a, b)
        H = seq.prime(S.blown_by)
        if b > a:
            state = ("sat", H.points[Fraction(0)][1])
        elif b < a:
            state = ("sat", H.points[INF_POINT][1])
        else:
            state = ("prime", H.id)
    raise ValuationError("center walk did not terminate")


def _as_graph(target) -> DualGraph:
    return target if isinstance(target, DualGraph) else dual_graph(target)


def locate(v: Valuation, target) -> GraphPoint:
    """Retraction of v onto the dual graph of a blowup sequence."""
    return _walk(v, _as_graph(target))[0]


def center(v: Valuation, target) -> tuple:
    """Center of v on the blowup: ("generic", F) when v is the divisorial
    valuation of F, ("free", F, c) for a free point, ("sat", id, a, b) for an
    intersection point where v has chart weights (a, b)."""
    return _walk(v, _as_graph(target))[1]


def center_chart(seq: BlowupSeq, where: tuple):
    """Chart with the center of v at its origin, or None for a generic center."""
    if where[0] == "free":
        return seq.free_chart(where[1], where[2])
    if where[0] == "sat":
        return seq.satpoints[where[1]].chart
    return None


def retract(v: Valuation, target) -> Valuation:
    graph = _as_graph(target)
    return point_valuation(graph, locate(v, graph))


def _curves_for(*vals) -> list:
    out = []
    for v in vals:
        if v.curve is not None and all(v.curve != h for h in out):
            out.append(v.curve)
    return out


def realize(v: Valuation, seq: BlowupSeq, max_steps: int = 200, curves: Sequence[Poly] = ()) -> BlowupSeq:
    """Blow up until v is a vertex, an irrational edge point or a marked curve end."""
    curves = list(curves) + [h for h in _curves_for(v) if h not in curves]
    for _ in range(max_steps):
        graph = dual_graph(seq, curves)
        gp, center = _walk(v, graph)
        if center[0] == "generic":
            return seq
        if center[0] == "free":
            if gp.kind == "curve" and gp.is_curve_end:
                return seq
            seq = seq.apply(Free(center[1], center[2]))
            continue
        _, sid, a, b = center
        ratio = a / b
        if not _is_rational(ratio):
            return seq
        S = seq.satpoints[sid]
        seq = seq.apply(Satellite(S.second, S.first))
    raise ValuationError(f"valuation not realized within {max_steps} blowups")


def _common_seq(vals: Sequence[Valuation]) -> BlowupSeq:
    mode = vals[0].mode
    if any(v.mode != mode for v in vals):
        raise ValuationError("valuations live in different modes")
    seqs = [v.seq for v in vals if v.seq is not None]
    base = max(seqs, key=lambda s: len(s.steps)) if seqs else _base_seq(mode)
    if any(base.steps[: len(s.steps)] != s.steps for s in seqs):
        base = _base_seq(mode)
    curves = _curves_for(*vals)
    for _ in range(3):
        before = base
        for v in vals:
            base = realize(v, base, curves=curves)
        if base == before:
            break
    return base


class Order(Enum):
    EQUAL = "="
    LE = "<="
    GE = ">="
    INCOMPARABLE = "incomparable"


def _base_path(graph: DualGraph, gp: GraphPoint) -> list[int]:
    return graph.path_from_root(gp.ids[0])


def precedes(graph: DualGraph, p: GraphPoint, q: GraphPoint) -> bool:
    """p lies on the segment from the root to q."""
    if p == q:
        return True
    qpath = _base_path(graph, q)
    if p.kind == "vertex":
        return p.ids[0] in qpath
    if p.kind == "edge":
        if q.kind == "edge" and q.ids == p.ids:
            return q.alpha <= p.alpha
        return p.ids[1] in qpath
    return q.kind == "curve" and q.ids == p.ids and q.weights[1] >= p.weights[1]


def common_graph(*vals: Valuation) -> DualGraph:
    seq = _common_seq(vals)
    return dual_graph(seq, _curves_for(*vals))


def compare(v: Valuation, w: Valuation) -> Order:
    graph = common_graph(v, w)
    p, q = locate(v, graph), locate(w, graph)
    le, ge = precedes(graph, p, q), precedes(graph, q, p)
    if le and ge:
        return Order.EQUAL
    if le:
        return Order.LE
    if ge:
        return Order.GE
    return Order.INCOMPARABLE


def wedge(v: Valuation, w: Valuation) -> Valuation:
    """Meet of v and w in the tree rooted at ord0 (or at -deg)."""
    graph = common_graph(v, w)
    p, q = locate(v, graph), locate(w, graph)
    if precedes(graph, p, q):
        return point_valuation(graph, p)
    if precedes(graph, q, p):
        return point_valuation(graph, q)
    pp, qp = _base_path(graph, p), _base_path(graph, q)
    meet = graph.root
    for a, b in zip(pp, qp):
        if a != b:
            break
        meet = a
    return point_valuation(graph, vertex_point(graph, meet))


# ---------------------------------------------------------------- invariants


@dataclass(frozen=True)
class Parametrization:
    alpha: object
    A: object
    m: object
    interpolated: bool = False

    def as_tuple(self) -> tuple:
        return (self.alpha, self.A, self.m)


def parametrize(v: Valuation) -> Parametrization:
    seq = _common_seq([v])
    graph = dual_graph(seq, _curves_for(v))
    gp = locate(v, graph)
    m, interp = point_multiplicity(graph, gp)
    if gp.is_curve_end:
        return Parametrization(MINUS_INF, PLUS_INF, m, False)
    return Parametrization(gp.alpha, gp.A, m, interp)


@dataclass(frozen=True)
class Classification:
    kind: str  # divisorial | irrational | curve
    b: int | None = None


def classify(v: Valuation) -> Classification:
    if v.kind == "curve":
        return Classification("curve")
    w1, w2 = v.weights
    if sign(w1) == 0 or sign(w2) == 0 or _is_rational(w1 / w2):
        return Classification("divisorial", parametrize(v).m)
    return Classification("irrational")


def skewness(v: Valuation):
    return parametrize(v).alpha


def log_discrepancy(v: Valuation):
    return parametrize(v).A


def valuation_from_point_json(seq: BlowupSeq, obj: dict) -> Valuation:
    graph = dual_graph(seq)
    names = {prime_name(seq, p.id): p.id for p in seq.primes}
    if obj["kind"] == "vertex":
        return point_valuation(graph, vertex_point(graph, names[obj["ids"][0]]))
    raise ValuationError("only vertex points can be replayed from JSON")
