"""The action of polynomial maps on valuative trees: attraction factors,
retracted images, edge return maps, fixed points, and the growth drivers at
the origin (c(f^n)) and at infinity (deg f^n)."""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy

from .blowup import (
    INFINITY,
    LOCAL,
    BlowupError,
    BlowupSeq,
    DualGraph,
    Free,
    dual_graph,
    log_resolution,
    prime_name,
)
from .numbers import (
    PLUS_INF,
    WHOLE_PIECE_FIXED,
    AffineForm,
    PAFunction,
    QuadraticInt,
    exact_key,
    is_infinite,
    quad_from_lattice,
    rational_int,
    scalar_to_json,
    sign,
    solve_fixed,
)
from .poly import (
    ONE,
    Ideal,
    Poly,
    PolyMap,
    RatFunc,
    Z1,
    Z2,
    compose,
    compose_jet,
    iterate,
    divides,
    factor,
    format_poly,
    h_adic_order,
    min_exponent,
    poly_gcd,
    pullback,
    to_sympy,
    truncate,
    weighted_min_param,
)
from .valuation import (
    GraphPoint,
    Valuation,
    _walk,
    curve_point,
    edge_point_at_alpha,
    point_valuation,
    vertex_point,
)

DEFAULT_STEPS_LOCAL = 8
DEFAULT_STEPS_INFINITY = 6
DEFAULT_DEGREE_CAP = 10 ** 6


class DynamicsError(ValueError):
    pass


# ---------------------------------------------------------------- map germs


def _same_curve(h: Poly, g: Poly) -> bool:
    return h.degree() == g.degree() and divides(h, g) and divides(g, h)


@dataclass(frozen=True)
class MapGerm:
    f: PolyMap
    mode: str = LOCAL

    def __post_init__(self):
        if not self.f.dominant:
            raise DynamicsError("map is not dominant (Jacobian vanishes identically)")
        if self.mode == LOCAL and not self.f.fixes_origin():
            raise DynamicsError("local mode needs f(0) = 0")

    @property
    def components(self) -> tuple:
        return tuple(self.f)

    def pullback_ideal(self) -> Ideal:
        f1, f2 = self.components
        return Ideal([f1, f2]) if self.mode == LOCAL else Ideal([ONE, f1, f2])

    def contracted_curves(self) -> list[Poly]:
        """Irreducible factors of gcd(f1, f2) through the origin."""
        if self.mode != LOCAL:
            return []
        g = poly_gcd(*self.components)
        if g.degree() <= 0:
            return []
        _, facs = factor(g)
        return [h for h, _m in facs if h.degree() > 0 and h.constant_term() == 0]

    @property
    def is_finite(self) -> bool:
        return not self.contracted_curves()

    def invariant_curves(self) -> list[Poly]:
        """Contracted curves plus coordinate axes h with h | h o f."""
        out = list(self.contracted_curves())
        for h in (Z1, Z2):
            if any(_same_curve(h, g) for g in out):
                continue
            if divides(h, self.f(h)):
                out.append(h)
        return out

    def degree(self) -> int:
        return self.f.degree()


def _germ(f, mode: str) -> MapGerm:
    if isinstance(f, MapGerm):
        return f
    if isinstance(f, str):
        f = PolyMap.parse(f)
    return MapGerm(f, mode)


# ---------------------------------------------------------------- action on valuations


def attraction_factor(germ: MapGerm, v) -> object:
    """c(f, v) = v(f*m0) locally, d(f, v) = -v(f*|L|) at infinity."""
    f1, f2 = germ.components
    a, b = v.eval(f1), v.eval(f2)
    low = a if a <= b else b
    if germ.mode == LOCAL:
        return low
    return -(low if low < 0 else Fraction(0))


class CurvePushforward:
    """phi -> ord_h(phi o f) / scale for a curve {h = 0} contracted by f."""

    def __init__(self, germ: MapGerm, h: Poly):
        self.germ = germ
        self.h = h
        self.mode = germ.mode
        f1, f2 = germ.components
        self.scale = Fraction(min(h_adic_order(f1, h), h_adic_order(f2, h)))
        if self.scale == 0:
            raise DynamicsError("curve is not contracted to the origin")

    def _num_den(self, phi):
        r = RatFunc.of(pullback(phi, self.germ.components))
        return r.num, r.den

    def eval(self, phi):
        if isinstance(phi, (int, Fraction)):
            return PLUS_INF if phi == 0 else Fraction(0)
        num, den = self._num_den(phi)
        top, bot = h_adic_order(num, self.h), h_adic_order(den, self.h)
        if is_infinite(top):
            return top
        return Fraction(top - bot) / self.scale

    def residue(self, phi):
        num, den = self._num_den(phi)
        k = h_adic_order(num, self.h)
        h = to_sympy(self.h)
        n = sympy.div(to_sympy(num), h ** k)[0]
        d = sympy.div(to_sympy(den), h ** k)[0]
        gens = h.gens
        rn = sympy.reduced(n.as_expr(), [h.as_expr()], *gens)[1]
        rd = sympy.reduced(d.as_expr(), [h.as_expr()], *gens)[1]
        if rd == 0:
            return None
        pn = sympy.Poly(rn, *gens)
        pd = sympy.Poly(rd, *gens)
        c = pn.LC() / pd.LC() if not pn.is_zero else 0
        if c != 0 and (pn - pd * c).is_zero:
            c = sympy.Rational(c)
            return Fraction(int(c.p), int(c.q))
        return None


def image_valuation(germ: MapGerm, v):
    """Normalized f.v, with the ord_D rule at ends of contracted curves."""
    c = attraction_factor(germ, v)
    if not is_infinite(c) and sign(c) > 0:
        return v.image(germ.components).normalized()
    h = getattr(v, "curve", None)
    if germ.mode == LOCAL and h is not None:
        for g in germ.contracted_curves():
            if _same_curve(g, h):
                return CurvePushforward(germ, g)
    if germ.mode == INFINITY and not is_infinite(c):
        raise DynamicsError("image is not centered at infinity")
    raise DynamicsError("undefined at curve end")


def step_retracted(germ: MapGerm, v, graph: DualGraph) -> GraphPoint:
    """r(f.v) on the graph."""
    return _walk(image_valuation(germ, v), graph)[0]


def _image_walk(germ: MapGerm, v, graph: DualGraph):
    return _walk(image_valuation(germ, v), graph)


# ---------------------------------------------------------------- edge return maps


@dataclass(frozen=True)
class EdgeKey:
    kind: str  # edge | curve
    ids: tuple  # (i, j) or (curve index,)

    def label(self, graph: DualGraph) -> str:
        seq = graph.seq
        if self.kind == "edge":
            return f"{prime_name(seq, self.ids[0])}-{prime_name(seq, self.ids[1])}"
        mark = graph.curve(self.ids[0])
        return f"{prime_name(seq, mark.prime)}-{mark.name}"


def edge_keys(graph: DualGraph) -> list[EdgeKey]:
    return [EdgeKey("edge", (e.i, e.j)) for e in graph.edges] + [EdgeKey("curve", (c.index,)) for c in graph.curves]


def _edge_frame(graph: DualGraph, key: EdgeKey):
    """(chart, affine weights in t = -alpha, interval, first/second alpha data)."""
    if key.kind == "edge":
        e = graph.edge(*key.ids)
        vi, vj = graph.vertex(e.i), graph.vertex(e.j)
        ti, tj = -vi.alpha_norm, -vj.alpha_norm
        span = tj - ti
        wi = AffineForm(Fraction(tj) / (vi.b * span), Fraction(-1) / (vi.b * span))
        wj = AffineForm(Fraction(-ti) / (vj.b * span), Fraction(1) / (vj.b * span))
        S = graph.seq.satpoints[e.sat]
        w = {e.i: wi, e.j: wj}
        return S.chart, (w[S.first], w[S.second]), (ti, tj), S
    mark = graph.curve(key.ids[0])
    F = graph.vertex(mark.prime)
    tf = -F.alpha_norm
    weights = (AffineForm(Fraction(1, F.b), Fraction(0)), AffineForm(-F.b * tf, Fraction(F.b)))
    return mark.chart, weights, (tf, PLUS_INF), mark


def edge_point_at(graph: DualGraph, key: EdgeKey, t) -> GraphPoint:
    if key.kind == "edge":
        return edge_point_at_alpha(graph, key.ids[0], key.ids[1], -t)
    mark = graph.curve(key.ids[0])
    F = graph.vertex(mark.prime)
    if is_infinite(t):
        return curve_point(graph, mark.index, Fraction(1), PLUS_INF)
    return curve_point(graph, mark.index, Fraction(1), F.b * F.b * (t + F.alpha_norm))


@dataclass(frozen=True)
class ReturnPiece:
    lo: object
    hi: object
    inside: bool
    num: AffineForm | None = None  # t' = num(t) / den(t) when inside
    den: AffineForm | None = None

    def image(self, t):
        return self.num(t) / self.den(t)


@dataclass(frozen=True)
class EdgeReturn:
    key: EdgeKey
    interval: tuple
    pieces: tuple
    factor: PAFunction  # c(f, v_t) locally, d(f, v_t) at infinity
    coords: tuple  # (g_x, g_y): unnormalized image values of the chart coordinates

    def image(self, t):
        for p in self.pieces:
            if p.lo <= t <= p.hi and p.inside:
                return p.image(t)
        return None


def _sample(lo, hi):
    if is_infinite(hi):
        return (lo if not is_infinite(lo) else Fraction(0)) + 1
    return (lo + hi) / 2


def _zero_cuts(pa: PAFunction, lo, hi) -> list:
    out = []
    for a, b, form in pa.pieces():
        if form.b != 0:
            z = -form.a / form.b
            if lo < z < hi and a <= z <= b:
                out.append(z)
    return out


def _sorted_unique(xs) -> list:
    out = []
    for x in sorted(xs, key=exact_key):
        if not out or out[-1] != x:
            out.append(x)
    return out


def edge_return_map(germ: MapGerm, graph: DualGraph, key: EdgeKey) -> EdgeReturn:
    chart, weights, (lo, hi), carrier = _edge_frame(graph, key)
    f1, f2 = germ.components
    interval = (lo, hi)

    def envelope(phi):
        return weighted_min_param(chart.pull(phi), weights, interval)

    def image_coord(coord):
        return envelope(RatFunc.of(pullback(coord, (f1, f2))))

    a1, a2 = envelope(f1), envelope(f2)
    fac = a1.minimum(a2)
    if germ.mode == INFINITY:
        zero = PAFunction.constant(Fraction(0), lo, hi)
        fac = fac.minimum(zero).scale(-1)
    gx, gy = image_coord(chart.inv[0]), image_coord(chart.inv[1])
    cuts = set(gx.breaks) | set(gy.breaks) | set(_zero_cuts(gx, lo, hi)) | set(_zero_cuts(gy, lo, hi))
    ends = [lo] + _sorted_unique(cuts) + [hi]
    pieces = []
    for a, b in zip(ends, ends[1:]):
        s = _sample(a, b)
        fx, fy = gx.forms[gx.piece_index(s)], gy.forms[gy.piece_index(s)]
        if sign(fx(s)) > 0 and sign(fy(s)) > 0:
            if key.kind == "edge":
                S = carrier
                vf, vs = graph.vertex(S.first), graph.vertex(S.second)
                af, as_ = Fraction(vf.alpha, vf.b), Fraction(vs.alpha, vs.b)
                num = (fx.scale(af) + fy.scale(as_)).scale(-1)
                den = fx.scale(vf.b) + fy.scale(vs.b)
            else:
                F = graph.vertex(carrier.prime)
                tf = -F.alpha_norm
                num = fx.scale(tf * F.b * F.b) + fy
                den = fx.scale(F.b * F.b)
            pieces.append(ReturnPiece(a, b, True, num, den))
        else:
            pieces.append(ReturnPiece(a, b, False))
    return EdgeReturn(key, interval, tuple(pieces), fac, (gx, gy))


# ---------------------------------------------------------------- fixed points


@dataclass(frozen=True)
class FixedPoint:
    point: GraphPoint
    valuation: Valuation
    exact: bool  # f.v = v, not only r(f.v) = v
    factor: object
    center: tuple
    attracting: bool = False
    edge: EdgeKey | None = None


def _is_exact(center, gp: GraphPoint, img_gp: GraphPoint) -> bool:
    if gp.kind == "vertex":
        return center[0] == "generic" and img_gp == gp
    if gp.kind == "edge":
        return center[0] == "sat" and img_gp == gp
    return img_gp == gp


def _candidate(germ: MapGerm, graph: DualGraph, gp: GraphPoint, edge=None) -> FixedPoint | None:
    v = point_valuation(graph, gp)
    try:
        img_gp, center = _image_walk(germ, v, graph)
    except DynamicsError:
        return None
    if img_gp != gp:
        return None
    exact = _is_exact(center, gp, img_gp)
    return FixedPoint(gp, v, exact, attraction_factor(germ, v), center, False, edge)


def fixed_point_candidates(germ: MapGerm, graph: DualGraph) -> list[FixedPoint]:
    out: list[FixedPoint] = []
    for v in graph.vertices:
        fp = _candidate(germ, graph, vertex_point(graph, v.id))
        if fp is not None:
            out.append(fp)
    for key in edge_keys(graph):
        ret = edge_return_map(germ, graph, key)
        roots = []
        for p in ret.pieces:
            if not p.inside:
                continue
            if is_infinite(p.hi):
                sol = _solve_unbounded(p)
            else:
                sol = solve_fixed(p.num, p.den, (p.lo, p.hi))
            if sol is WHOLE_PIECE_FIXED:
                roots.append(p.lo)
                continue
            roots.extend(sol)
        lo, hi = ret.interval
        for t in roots:
            if lo < t < hi:
                fp = _candidate(germ, graph, edge_point_at(graph, key, t), key)
                if fp is not None and all(fp.point != q.point for q in out):
                    out.append(fp)
        if key.kind == "curve":
            end = edge_point_at(graph, key, PLUS_INF)
            fp = _candidate(germ, graph, end, key)
            if fp is not None:
                out.append(FixedPoint(fp.point, fp.valuation, fp.exact, fp.factor, fp.center,
                                      _escapes(ret, roots), key))
    return out


def _solve_unbounded(p: ReturnPiece):
    """solve_fixed on [lo, +inf): use a finite cap beyond every possible root."""
    A, B, C = p.den.b, p.den.a - p.num.b, -p.num.a
    bound = 1 + sum(abs(Fraction(x)) for x in (A, B, C)) / max(abs(Fraction(A)), abs(Fraction(B)), Fraction(1, 10 ** 9))
    hi = max(Fraction(p.lo) + 1, Fraction(bound) + abs(Fraction(p.lo)))
    return solve_fixed(p.num, p.den, (p.lo, hi))


def _escapes(ret: EdgeReturn, roots) -> bool:
    """Does t -> t' push points toward the curve end near the end?"""
    last = ret.pieces[-1]
    if not last.inside:
        return False
    t = max([last.lo] + [r for r in roots]) + 1
    return last.image(t) > t


def choose_fixed_point(germ: MapGerm, cands: Sequence[FixedPoint]) -> FixedPoint:
    """Exact quasimonomial fixed points first (nearest the root), then
    retraction-only fixed vertices (nearest the root), then curve ends with the
    smallest attraction factor."""
    if not cands:
        raise DynamicsError("no fixed point found on the graph")
    quasi = [c for c in cands if c.exact and not c.point.is_curve_end]
    if quasi:
        return max(quasi, key=lambda c: exact_key(c.point.alpha))
    weak = [c for c in cands if not c.exact and c.point.kind == "vertex"]
    if weak:
        return max(weak, key=lambda c: exact_key(c.point.alpha))
    ends = [c for c in cands if c.point.is_curve_end]
    if ends:
        return min(ends, key=lambda c: (exact_key(c.factor), -int(c.attracting)))
    return cands[0]


def find_fixed_point(germ: MapGerm, graph: DualGraph) -> FixedPoint:
    return choose_fixed_point(germ, fixed_point_candidates(germ, graph))


# ---------------------------------------------------------------- growth sequences


@dataclass(frozen=True)
class GrowthSequence:
    mode: str
    values: tuple
    requested: int
    complete: bool

    def to_json(self) -> dict:
        return {"mode": self.mode, "values": list(self.values), "requested": self.requested,
                "complete": self.complete}


def _growth_value(g: PolyMap, mode: str) -> int:
    if mode == LOCAL:
        return min(g.f1.order(), g.f2.order())
    return g.degree()


def sequences(f, N: int, mode: str = LOCAL, degree_cap: int = DEFAULT_DEGREE_CAP,
              parallel: bool = False) -> GrowthSequence:
    """(c(f^n))_{n<=N} locally, (deg f^n)_{n<=N} at infinity, by composition."""
    if N < 1:
        raise DynamicsError("need at least one iterate")
    f = f.f if isinstance(f, MapGerm) else (PolyMap.parse(f) if isinstance(f, str) else f)
    if mode == LOCAL:
        return _local_sequence(f, N, degree_cap, parallel)
    d = max(f.degree(), 1)
    # a priori bound deg f^n <= d^n decides how many iterates fit under the cap
    budget, bound = 0, 1
    while budget < N and bound * d <= degree_cap:
        budget += 1
        bound *= d
    if parallel and budget > 1:
        with ThreadPoolExecutor() as pool:
            values = list(pool.map(lambda n: _growth_value(iterate(f, n), mode), range(1, budget + 1)))
    else:
        values, g = [], None
        for _ in range(budget):
            g = f if g is None else compose(f, g)
            values.append(_growth_value(g, mode))
    return GrowthSequence(mode, tuple(values), N, budget == N)


def _jet_orders(f: PolyMap, n: int, K: int) -> list:
    """min order of the components of f^1..f^n from K-jets; None once it exceeds K."""
    out, g = [], None
    for _ in range(n):
        g = truncate_map(f, K) if g is None else compose_jet(f, g, K)
        if g.f1.is_zero() and g.f2.is_zero():
            out.extend([None] * (n - len(out)))
            break
        out.append(_growth_value(g, LOCAL))
    return out


def _local_sequence(f: PolyMap, N: int, degree_cap: int, parallel: bool) -> GrowthSequence:
    # c(f^n) only sees the K-jet, so work with jets and double K until every
    # order is seen; the cap bounds K
    if not f.fixes_origin():
        raise DynamicsError("the map does not fix the origin")
    K = min(16, degree_cap)
    while True:
        if parallel and N > 1:
            with ThreadPoolExecutor() as pool:
                rows = list(pool.map(lambda n: _jet_orders(f, n, K)[-1], range(1, N + 1)))
        else:
            rows = _jet_orders(f, N, K)
        known = 0
        while known < N and rows[known] is not None:
            known += 1
        if known == N or K >= degree_cap:
            return GrowthSequence(LOCAL, tuple(rows[:known]), N, known == N)
        K = min(2 * K, degree_cap)


def truncate_map(f: PolyMap, K: int) -> PolyMap:
    return PolyMap(truncate(f.f1, K), truncate(f.f2, K))


# ---------------------------------------------------------------- certificates


def eigen_test_polynomials(count: int = 20, seed: int = 2024) -> list[Poly]:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        terms = {}
        for _ in range(rng.randint(1, 4)):
            i, j = rng.randint(0, 4), rng.randint(0, 4)
            terms[(i, j)] = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]))
        p = Poly(terms)
        if p.degree() > 0:
            out.append(p)
    return out


def certify_eigen(germ: MapGerm, v: Valuation, factor) -> list[str]:
    """Check v(phi o f) = factor * v(phi) on v's chart coordinates and on test
    polynomials; returns the polynomials checked."""
    checks = [c for c in v.chart.inv if c is not None] + eigen_test_polynomials()
    for phi in checks:
        lhs = v.eval(RatFunc.of(pullback(phi, germ.components)) if isinstance(phi, RatFunc) else germ.f(phi))
        rhs = v.eval(phi)
        rhs = rhs if is_infinite(rhs) else factor * rhs
        if lhs != rhs:
            raise DynamicsError(f"eigen equation fails on {phi}")
    return [str(p) for p in checks]


def lattice_matrix(germ: MapGerm, v: Valuation) -> list[list[int]]:
    """Exponents of the images of v's chart coordinates at v's weights."""
    rows = []
    for coord in v.chart.inv:
        img = RatFunc.of(pullback(coord, germ.components))
        rows.append(list(min_exponent(v.chart.pull(img), v.weights)))
    return rows


def _growth_from(germ: MapGerm, v: Valuation, factor):
    """QuadraticInt certificate for an exactly fixed quasimonomial v."""
    w1, w2 = v.weights
    irrational = not (isinstance(w1 / w2, Fraction) if sign(w2) != 0 else True)
    if irrational:
        M = lattice_matrix(germ, v)
        q = quad_from_lattice(M)
        if q.value != factor:
            raise DynamicsError("lattice eigenvalue disagrees with the attraction factor")
        return q, M
    return rational_int(factor), None


def _value_at_inf(form: AffineForm):
    s = sign(form.b)
    return form.a if s == 0 else (PLUS_INF if s > 0 else -PLUS_INF)


def _ratio_limit(num: AffineForm, den: AffineForm):
    if den.b != 0:
        return num.b / den.b
    s = sign(num.b) * sign(den.a)
    return num.a / den.a if s == 0 else (PLUS_INF if s > 0 else -PLUS_INF)


def _invariant_tail(ret: EdgeReturn, factor):
    """Smallest s such that [s, end) maps into itself with c >= factor there."""
    run = []
    for p in reversed(ret.pieces):
        if not p.inside:
            break
        run.insert(0, p)
    best = None
    for s in reversed([p.lo for p in run]):
        ok = True
        for p in run:
            if p.hi <= s if not is_infinite(p.hi) else False:
                continue
            lo = s if s > p.lo else p.lo
            ends = [p.image(lo), _ratio_limit(p.num, p.den) if is_infinite(p.hi) else p.image(p.hi)]
            if any(e < s for e in ends):
                ok = False
        for a, b, form in ret.factor.pieces():
            if not is_infinite(b) and b < s:
                continue
            vals = [form(a if a > s else s), _value_at_inf(form) if is_infinite(b) else form(b)]
            if any(x < factor for x in vals):
                ok = False
        if not ok:
            break
        best = s
    return best


# ---------------------------------------------------------------- local driver


LOCAL_CASES = ("fixed-quasimonomial", "invariant-open-set", "curve-end")


@dataclass
class LocalReport:
    sequence: GrowthSequence
    growth: QuadraticInt
    case: str
    point: GraphPoint
    graph: DualGraph
    eigenvaluation: Valuation | None
    delta: object
    lattice: list | None
    checked: list = field(default_factory=list)
    bounds_ok: bool = False
    notes: list = field(default_factory=list)
    mode: str = LOCAL

    @property
    def c_infinity(self) -> QuadraticInt:
        return self.growth

    def to_json(self) -> dict:
        return _report_json(self, {"delta": scalar_to_json(self.delta) if self.delta is not None else None})


def _report_json(rep, bounds: dict) -> dict:
    seq = rep.graph.seq
    eig = None
    if rep.eigenvaluation is not None:
        v = rep.eigenvaluation
        eig = {"point": rep.point.to_json(seq), "label": rep.point.label(seq),
               "values": {"z1": scalar_to_json(v.eval(Z1)), "z2": scalar_to_json(v.eval(Z2))}}
        if v.curve is not None:
            eig["curve"] = format_poly(v.curve)
    else:
        eig = {"point": rep.point.to_json(seq), "label": rep.point.label(seq), "values": None}
    return {
        "mode": rep.mode,
        "sequence": list(rep.sequence.values),
        "sequence_complete": rep.sequence.complete,
        "growth": rep.growth.to_json(),
        "case": rep.case,
        "eigenvaluation": eig,
        "bounds": {**bounds, "verified": rep.bounds_ok},
        "certificates": {"lattice_matrix": rep.lattice, "checked_polynomials": rep.checked,
                         "blowups": seq.to_json()},
        "notes": list(rep.notes),
    }


def _marked_graph(seq: BlowupSeq, curves: Sequence[Poly]) -> tuple[DualGraph, list[str]]:
    kept, notes = [], []
    for h in curves:
        try:
            mark = dual_graph(seq, [h]).curve(0)
        except BlowupError as exc:
            notes.append(f"curve {{{h} = 0}} not marked: {exc}")
            continue
        if not mark.exact_chart:
            notes.append(f"curve {{{h} = 0}} not marked: its strict transform is not a rational graph")
            continue
        kept.append(h)
    return dual_graph(seq, kept), notes


def _verify_open_set(germ: MapGerm, graph: DualGraph, fp: FixedPoint) -> None:
    """f maps the set of valuations centered at the free point into itself and
    c(f, .) is constant there (f1, f2 pull back to monomial times unit)."""
    _, pid, c = fp.center
    seq = graph.seq
    chart = seq.free_chart(pid, c)
    coords = (chart.inv[0], chart.inv[1] - RatFunc.of(Poly.const(0)))
    for coord in coords:
        img = chart.pull(RatFunc.of(pullback(coord, germ.components)))
        if img.den.constant_term() == 0 or img.num.constant_term() != 0:
            raise DynamicsError("free-point neighborhood is not invariant")
    for g in germ.components:
        pulled = chart.pull(g)
        a, _ = pulled.num.monomial_content()
        rest = pulled.num.shift(-a, 0)
        if rest.constant_term() == 0 or pulled.den.constant_term() == 0:
            raise DynamicsError("attraction factor is not constant near the free point")


def _check_local_bounds(values, c, delta) -> bool:
    if delta is None:
        return False
    for n, cn in enumerate(values, 1):
        top = c ** n
        if not (delta * top <= cn <= top):
            return False
    return True


def analyze_local(f, N: int = DEFAULT_STEPS_LOCAL, degree_cap: int = DEFAULT_DEGREE_CAP,
                  parallel: bool = False) -> LocalReport:
    germ = _germ(f, LOCAL)
    res = log_resolution(germ.pullback_ideal())
    graph, notes = _marked_graph(res.seq, germ.invariant_curves())
    fp = find_fixed_point(germ, graph)
    seq_vals = sequences(germ, N, LOCAL, degree_cap, parallel)
    v0 = fp.valuation
    lattice, checked, eigen = None, [], None
    if fp.point.is_curve_end:
        case = "curve-end"
        growth = rational_int(fp.factor)
        s = _invariant_tail(edge_return_map(germ, graph, fp.edge), fp.factor)
        delta = None if s is None else 1 / s
        checked = certify_eigen(germ, v0, fp.factor)
        eigen = v0
    elif fp.exact:
        case = "fixed-quasimonomial"
        growth, lattice = _growth_from(germ, v0, fp.factor)
        delta = -1 / fp.point.alpha
        checked = certify_eigen(germ, v0, fp.factor)
        eigen = v0
    else:
        case = "invariant-open-set"
        _verify_open_set(germ, graph, fp)
        growth = rational_int(fp.factor)
        delta = -1 / fp.point.alpha
        notes.append("eigenvaluation lies in the invariant set of valuations centered at the free point")
    rep = LocalReport(seq_vals, growth, case, fp.point, graph, eigen, delta, lattice, checked, False, notes)
    rep.bounds_ok = _check_local_bounds(seq_vals.values, growth.value, delta)
    return rep


# ---------------------------------------------------------------- infinity driver


@dataclass
class InfinityReport:
    sequence: GrowthSequence
    growth: QuadraticInt
    case: str  # a | b
    point: GraphPoint
    graph: DualGraph
    eigenvaluation: Valuation | None
    C: object = None
    model: tuple | None = None  # (p, q) with deg f^n = (p n + q) d^n
    lattice: list | None = None
    checked: list = field(default_factory=list)
    bounds_ok: bool = False
    notes: list = field(default_factory=list)
    mode: str = INFINITY

    @property
    def d_infinity(self) -> QuadraticInt:
        return self.growth

    def to_json(self) -> dict:
        if self.case == "a":
            bounds = {"C": scalar_to_json(self.C)}
        else:
            p, q = self.model
            bounds = {"model": {"p": scalar_to_json(p), "q": scalar_to_json(q), "form": "(p*n + q)*d^n"}}
        return _report_json(self, bounds)


def _fit_linear_model(values, d):
    """(p, q) with values[n-1] = (p n + q) d^n for all n, or None."""
    if len(values) < 2:
        return None
    r1, r2 = Fraction(values[0]) / d, Fraction(values[1]) / (d * d)
    p = r2 - r1
    q = r1 - p
    for n, x in enumerate(values, 1):
        if (p * n + q) * d ** n != x:
            return None
    return p, q


def analyze_infinity(f, N: int = DEFAULT_STEPS_INFINITY, degree_cap: int = DEFAULT_DEGREE_CAP,
                     parallel: bool = False, max_blowups: int = 40) -> InfinityReport:
    germ = _germ(f, INFINITY)
    seq = BlowupSeq.infinity()
    seq_vals = sequences(germ, N, INFINITY, degree_cap, parallel)
    notes: list = []
    for _ in range(max_blowups + 1):
        graph = dual_graph(seq)
        fp = find_fixed_point(germ, graph)
        v0, alpha = fp.valuation, fp.point.alpha
        if fp.exact and sign(alpha) > 0:
            growth, lattice = _growth_from(germ, v0, fp.factor)
            checked = certify_eigen(germ, v0, fp.factor)
            rep = InfinityReport(seq_vals, growth, "a", fp.point, graph, v0, 1 / alpha, None, lattice, checked,
                                 False, notes)
            rep.bounds_ok = all(growth.value ** n <= x <= rep.C * growth.value ** n
                                for n, x in enumerate(seq_vals.values, 1))
            return rep
        if fp.exact and sign(alpha) == 0:
            growth = rational_int(fp.factor)
            checked = certify_eigen(germ, v0, fp.factor)
            model = _fit_linear_model(seq_vals.values, growth.value)
            rep = InfinityReport(seq_vals, growth, "b", fp.point, graph, v0, None, model, None, checked,
                                 model is not None, notes)
            if model is None:
                rep.model = (Fraction(0), Fraction(0))
                notes.append("degree sequence does not fit (p n + q) d^n")
            return rep
        if fp.exact:
            raise DynamicsError("fixed point outside the tight tree")
        # retraction-only fixed vertex: the image is centered at a free point
        pid = fp.point.ids[0]
        vert = graph.vertex(pid)
        if sign(alpha) > 0 and vert.b > germ.degree():
            growth = rational_int(fp.factor)
            rep = InfinityReport(seq_vals, growth, "a", fp.point, graph, None, 1 / alpha, None, None, [], False,
                                 notes + ["eigenvaluation lies in the invariant set at the free point"])
            rep.bounds_ok = all(growth.value ** n <= x <= rep.C * growth.value ** n
                                for n, x in enumerate(seq_vals.values, 1))
            return rep
        if vert.alpha == 0 or vert.A == 0:
            raise DynamicsError(f"non-tight blowup demanded at a free point of {prime_name(seq, pid)}")
        _, _, c = fp.center
        seq = seq.apply(Free(pid, c))
        notes.append(f"blew up free point {c} on {prime_name(seq, pid)}")
    raise DynamicsError("blowup budget exhausted before a conclusive fixed point")


__all__ = [
    "MapGerm", "attraction_factor", "image_valuation", "step_retracted", "EdgeKey", "edge_keys",
    "edge_return_map", "EdgeReturn", "ReturnPiece", "FixedPoint", "fixed_point_candidates",
    "find_fixed_point", "sequences", "GrowthSequence", "analyze_local", "analyze_infinity",
    "LocalReport", "InfinityReport", "certify_eigen", "lattice_matrix", "DynamicsError",
    "DEFAULT_STEPS_LOCAL", "DEFAULT_STEPS_INFINITY", "DEFAULT_DEGREE_CAP",
]
