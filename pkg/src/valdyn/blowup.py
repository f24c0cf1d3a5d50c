"""Sequences of point blowups above the origin of A^2 or above the line at
infinity of P^2, with per-prime invariants, charts, intersection data, dual
graphs, log resolutions of ideals and the tightness test."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence, Union

from .numbers import PLUS_INF, is_infinite, scalar_from_json, scalar_to_json
from .poly import (
    ONE,
    Ideal,
    Poly,
    RatFunc,
    Z1,
    Z2,
    divides,
    factor,
    poly_div_exact,
    poly_gcd,
    pullback,
    substitute,
    weighted_min,
)

LOCAL = "local"
INFINITY = "infinity"
INF_POINT = PLUS_INF  # coordinate of the point "y = infinity" on a prime

X = Poly.var(0)
Y = Poly.var(1)


class BlowupError(ValueError):
    pass


class GroundFieldError(BlowupError):
    """A computation needs points that are not defined over the rationals."""


# ---------------------------------------------------------------- steps


@dataclass(frozen=True)
class Root:
    """Blow up the origin of A^2 (local mode only)."""


@dataclass(frozen=True)
class Free:
    parent: int
    point: object  # Fraction, or INF_POINT for the chart-B origin of a root prime


@dataclass(frozen=True)
class Satellite:
    p1: int
    p2: int


BlowupStep = Union[Root, Free, Satellite]


def step_to_json(step: BlowupStep) -> dict:
    if isinstance(step, Root):
        return {"root": True}
    if isinstance(step, Free):
        return {"free": {"parent": step.parent, "point": scalar_to_json(step.point, with_approx=False)}}
    return {"satellite": [step.p1, step.p2]}


def step_from_json(obj: dict) -> BlowupStep:
    if "root" in obj:
        return Root()
    if "free" in obj:
        return Free(int(obj["free"]["parent"]), scalar_from_json(obj["free"]["point"]))
    a, b = obj["satellite"]
    return Satellite(int(a), int(b))


def step_label(step: BlowupStep) -> str:
    if isinstance(step, Root):
        return "root"
    if isinstance(step, Free):
        return f"free(E{step.parent}, {step.point})"
    return f"satellite(E{step.p1}, E{step.p2})"


# ---------------------------------------------------------------- charts


def _pull_pair(fwd, x, y):
    return tuple(RatFunc.of(pullback(g, (x, y))) for g in fwd)


@dataclass(frozen=True)
class Chart:
    """Coordinates (x, y) on an open set; fwd gives (z1, z2), inv gives (x, y).

    The prime being described is {x = 0}; y_prime names the prime whose strict
    transform is {y = 0} in this chart, if any.
    """

    fwd: tuple
    inv: tuple
    y_prime: int | None = None

    def pull(self, phi) -> RatFunc:
        return RatFunc.of(pullback(phi, self.fwd))

    def translated(self, c) -> Chart:
        if c == 0:
            return self
        return Chart(_pull_pair(self.fwd, X, Y + Poly.const(c)),
                     (self.inv[0], self.inv[1] - RatFunc.of(Poly.const(c))), None)

    def blow_a(self, y_prime: int | None) -> Chart:
        fwd = _pull_pair(self.fwd, X, X * Y)
        inv = (self.inv[0], (self.inv[1] / self.inv[0]).cancel())
        return Chart(fwd, inv, y_prime)

    def blow_b(self, y_prime: int | None) -> Chart:
        fwd = _pull_pair(self.fwd, X * Y, X)
        inv = (self.inv[1], (self.inv[0] / self.inv[1]).cancel())
        return Chart(fwd, inv, y_prime)

    def with_curve(self, shift: RatFunc) -> Chart:
        """New second coordinate y' = y + shift(x), so y = y' - shift(x)."""
        fwd = _pull_pair(self.fwd, RatFunc.of(X), RatFunc.of(Y) - shift)
        sx = RatFunc.of(pullback(shift, (self.inv[0], self.inv[0])))
        inv = (self.inv[0], (self.inv[1] + sx).cancel())
        return Chart(fwd, inv, self.y_prime)


class LazyChart:
    """A chart built on first use. Charts of deep primes have large degrees and
    most invariants never need them."""

    __slots__ = ("_make", "_chart", "y_prime")

    def __init__(self, make, y_prime: int | None):
        self._make = make
        self._chart = None
        self.y_prime = y_prime

    @staticmethod
    def wrap(chart) -> LazyChart:
        return chart if isinstance(chart, LazyChart) else LazyChart(lambda: chart, chart.y_prime)

    def force(self) -> Chart:
        if self._chart is None:
            self._chart = self._make()
        return self._chart

    @property
    def fwd(self) -> tuple:
        return self.force().fwd

    @property
    def inv(self) -> tuple:
        return self.force().inv

    def pull(self, phi) -> RatFunc:
        return self.force().pull(phi)

    def translated(self, c) -> LazyChart:
        if c == 0:
            return self
        return LazyChart(lambda: self.force().translated(c), None)

    def blow_a(self, y_prime: int | None) -> LazyChart:
        return LazyChart(lambda: self.force().blow_a(y_prime), y_prime)

    def blow_b(self, y_prime: int | None) -> LazyChart:
        return LazyChart(lambda: self.force().blow_b(y_prime), y_prime)

    def with_curve(self, shift: RatFunc) -> Chart:
        return self.force().with_curve(shift)

    def __eq__(self, other):
        if isinstance(other, LazyChart):
            other = other.force()
        return self.force() == other

    def __hash__(self):
        return hash(self.force())


ORIGIN_CHART = Chart((RatFunc.of(X), RatFunc.of(Y)), (RatFunc.of(Z1), RatFunc.of(Z2)))
INFINITY_CHART_A = Chart((RatFunc(ONE, X), RatFunc(Y, X)), (RatFunc(ONE, Z1), RatFunc(Z2, Z1)))
INFINITY_CHART_B = Chart((RatFunc(Y, X), RatFunc(ONE, X)), (RatFunc(ONE, Z2), RatFunc(Z1, Z2)))


# ---------------------------------------------------------------- primes and points


@dataclass(frozen=True)
class SatPoint:
    """Intersection point of two primes; chart has first = {x=0}, second = {y=0}."""

    id: int
    first: int
    second: int
    chart: Chart
    blown_by: int | None = None

    def pair(self) -> frozenset:
        return frozenset((self.first, self.second))


@dataclass(frozen=True)
class Prime:
    id: int
    kind: str  # root | free | satellite
    parents: tuple
    b: int
    A: int
    alpha: int
    chart_a: Chart
    chart_b: Chart
    points: dict = field(default_factory=dict, compare=False)  # coordinate -> ("sat", id) | ("blown", id)

    @property
    def name(self) -> str:
        return f"E{self.id}"


def prime_name(seq: BlowupSeq, pid: int) -> str:
    if seq.mode == INFINITY and pid == 0:
        return "Linf"
    return f"E{pid}"


# ---------------------------------------------------------------- exact linear algebra


def frac_inverse(M: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    n = len(M)
    A = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [v / p for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [row[n:] for row in A]


def frac_det(M: Sequence[Sequence]) -> Fraction:
    n = len(M)
    A = [[Fraction(v) for v in row] for row in M]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det *= A[col][col]
        for r in range(col + 1, n):
            f = A[r][col] / A[col][col]
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return det


def leading_minors(M) -> list[Fraction]:
    return [frac_det([row[:k] for row in M[:k]]) for k in range(1, len(M) + 1)]


# ---------------------------------------------------------------- sequences


class BlowupSeq:
    """Immutable blowup sequence; apply() returns an extended copy."""

    __slots__ = ("mode", "steps", "primes", "satpoints", "matrix", "_inv")

    def __init__(self, mode: str, steps=(), primes=(), satpoints=(), matrix=()):
        self.mode = mode
        self.steps = tuple(steps)
        self.primes = tuple(primes)
        self.satpoints = tuple(satpoints)
        self.matrix = tuple(tuple(r) for r in matrix)
        self._inv = None

    @staticmethod
    def local() -> BlowupSeq:
        return BlowupSeq(LOCAL)

    @staticmethod
    def infinity() -> BlowupSeq:
        linf = Prime(0, "root", (), 1, -2, 1, INFINITY_CHART_A, INFINITY_CHART_B, {})
        return BlowupSeq(INFINITY, (), (linf,), (), ((1,),))

    @staticmethod
    def from_steps(mode: str, steps: Iterable[BlowupStep]) -> BlowupSeq:
        seq = BlowupSeq.local() if mode == LOCAL else BlowupSeq.infinity()
        for s in steps:
            seq = seq.apply(s)
        return seq

    # -- queries
    def __len__(self):
        return len(self.primes)

    @property
    def root(self) -> int:
        if not self.primes:
            raise BlowupError("empty blowup sequence")
        return 0

    def prime(self, pid: int) -> Prime:
        if not 0 <= pid < len(self.primes):
            raise BlowupError(f"no prime E{pid}")
        return self.primes[pid]

    def live_satpoints(self) -> list[SatPoint]:
        return [s for s in self.satpoints if s.blown_by is None]

    def satpoint_between(self, p: int, q: int) -> SatPoint | None:
        want = frozenset((p, q))
        for s in self.satpoints:
            if s.blown_by is None and s.pair() == want:
                return s
        return None

    def inverse_matrix(self) -> list[list[Fraction]]:
        if self._inv is None:
            self._inv = frac_inverse(self.matrix)
        return self._inv

    def free_chart(self, pid: int, c) -> Chart:
        """Local chart at the free point with coordinate c on prime pid."""
        F = self.prime(pid)
        if is_infinite(c):
            return F.chart_b
        return F.chart_a.translated(c)

    def point_entry(self, pid: int, c):
        return self.prime(pid).points.get(c)

    def is_free_point(self, pid: int, c) -> bool:
        F = self.prime(pid)
        if c in F.points:
            return False
        if is_infinite(c):
            return F.kind == "root"
        return True

    def __eq__(self, other):
        return isinstance(other, BlowupSeq) and self.mode == other.mode and self.steps == other.steps

    def __hash__(self):
        return hash((self.mode, self.steps))

    def __repr__(self):
        return f"BlowupSeq({self.mode}, [{', '.join(step_label(s) for s in self.steps)}])"

    # -- building
    def apply(self, step: BlowupStep) -> BlowupSeq:
        return apply_blowup(self, step)

    def to_json(self) -> dict:
        return {"mode": self.mode, "steps": [step_to_json(s) for s in self.steps]}

    @staticmethod
    def from_json(obj) -> BlowupSeq:
        if isinstance(obj, str):
            obj = json.loads(obj)
        return BlowupSeq.from_steps(obj["mode"], [step_from_json(s) for s in obj["steps"]])


def _grow(matrix, n_new: int) -> list[list[int]]:
    n = len(matrix)
    return [list(r) + [0] * n_new for r in matrix] + [[0] * (n + n_new) for _ in range(n_new)]


def apply_blowup(seq: BlowupSeq, step: BlowupStep) -> BlowupSeq:
    primes = list(seq.primes)
    sats = list(seq.satpoints)
    new_id = len(primes)

    if isinstance(step, Root):
        if seq.mode != LOCAL or primes:
            raise BlowupError("the root blowup is only the first step in local mode")
        e0 = Prime(0, "root", (), 1, 2, -1, ORIGIN_CHART.blow_a(None), ORIGIN_CHART.blow_b(None), {})
        return BlowupSeq(LOCAL, (step,), (e0,), (), ((-1,),))

    if not primes:
        raise BlowupError("blow up the root first")

    M = _grow(seq.matrix, 1)
    if isinstance(step, Free):
        if not 0 <= step.parent < len(primes):
            raise BlowupError(f"dead parent E{step.parent}")
        F = primes[step.parent]
        c = step.point if is_infinite(step.point) else Fraction(step.point)
        if c in F.points:
            raise BlowupError(f"point {c} on E{F.id} is a satellite point, not a free point")
        if is_infinite(c) and F.kind != "root":
            raise BlowupError(f"point at infinity on E{F.id} is a satellite point, not a free point")
        local = LazyChart.wrap(seq.free_chart(F.id, c))
        sat = SatPoint(len(sats), new_id, F.id, local.blow_b(F.id))
        G = Prime(new_id, "free", (F.id,), F.b, F.A + 1, F.alpha - 1,
                  local.blow_a(None), sat.chart, {INF_POINT: ("sat", sat.id)})
        pts = dict(F.points)
        pts[c] = ("blown", new_id)
        primes[F.id] = replace(F, points=pts)
        primes.append(G)
        sats.append(sat)
        M[F.id][F.id] -= 1
        M[new_id][new_id] = -1
        M[F.id][new_id] = M[new_id][F.id] = 1
        step = Free(F.id, c)
    elif isinstance(step, Satellite):
        S = seq.satpoint_between(step.p1, step.p2)
        if S is None:
            raise BlowupError(f"E{step.p1} and E{step.p2} do not intersect")
        P, Q = primes[S.first], primes[S.second]
        inv = seq.inverse_matrix()
        cross = inv[P.id][Q.id]
        alpha = P.alpha + Q.alpha + 2 * cross - 1
        if alpha.denominator != 1:
            raise BlowupError("non-integral skewness")
        sat_q = SatPoint(len(sats), new_id, Q.id, LazyChart.wrap(S.chart).blow_a(Q.id))
        sat_p = SatPoint(len(sats) + 1, new_id, P.id, LazyChart.wrap(S.chart).blow_b(P.id))
        H = Prime(new_id, "satellite", (step.p1, step.p2), P.b + Q.b, P.A + Q.A, int(alpha),
                  sat_q.chart, sat_p.chart, {Fraction(0): ("sat", sat_q.id), INF_POINT: ("sat", sat_p.id)})
        sats[S.id] = replace(S, blown_by=new_id)
        sats.extend([sat_q, sat_p])
        primes.append(H)
        M[P.id][P.id] -= 1
        M[Q.id][Q.id] -= 1
        M[P.id][Q.id] = M[Q.id][P.id] = 0
        M[new_id][new_id] = -1
        for k in (P.id, Q.id):
            M[k][new_id] = M[new_id][k] = 1
    else:
        raise BlowupError(f"unknown step {step!r}")
    return BlowupSeq(seq.mode, seq.steps + (step,), primes, sats, M)


# ---------------------------------------------------------------- intersection data


@dataclass(frozen=True)
class IntersectionData:
    matrix: tuple
    duals: tuple  # duals[i] = coefficient vector of the dual divisor of E_i

    def dual_product(self, i: int, j: int) -> Fraction:
        v, w = self.duals[i], self.duals[j]
        return sum(v[a] * self.matrix[a][b] * w[b] for a in range(len(v)) for b in range(len(w)))

    def det(self) -> Fraction:
        return frac_det(self.matrix)


def intersection_matrix(seq: BlowupSeq) -> IntersectionData:
    if not seq.primes:
        raise BlowupError("no primes")
    inv = seq.inverse_matrix()
    n = len(inv)
    duals = []
    for i in range(n):
        col = [inv[k][i] for k in range(n)]
        if any(c.denominator != 1 for c in col):
            raise BlowupError("intersection matrix is not unimodular")
        duals.append(tuple(int(c) for c in col))
    return IntersectionData(seq.matrix, tuple(duals))


def skewness_from_duals(seq: BlowupSeq, pid: int) -> Fraction:
    """alpha_E as the self-intersection of the dual divisor."""
    return seq.inverse_matrix()[pid][pid]


# ---------------------------------------------------------------- dual graph


@dataclass(frozen=True)
class GraphVertex:
    id: int
    b: int
    A: int
    alpha: int

    @property
    def alpha_norm(self) -> Fraction:
        return Fraction(self.alpha, self.b * self.b)

    @property
    def A_norm(self) -> Fraction:
        return Fraction(self.A, self.b)


@dataclass(frozen=True)
class GraphEdge:
    i: int  # endpoint nearer the root
    j: int
    length: Fraction
    multiplicity: int
    sat: int  # id of the intersection point carrying the edge chart


@dataclass(frozen=True)
class CurveMark:
    """A marked curve {h = 0} whose strict transform meets prime `prime` at a free
    point transversally; chart has the prime as {x=0} and the curve as {y=0}."""

    index: int
    h: Poly
    prime: int
    point: object
    chart: Chart
    coord: RatFunc | None = None  # exact equation of the strict transform in (z1, z2)
    series: CurveSeries | None = None  # set when the strict transform is not a rational graph

    @property
    def name(self) -> str:
        return f"C{self.index}"

    @property
    def exact_chart(self) -> bool:
        return self.series is None


SERIES_START = 8


@dataclass(frozen=True, eq=False)
class CurveSeries:
    """Strict transform {strict = 0} through the origin of `base`, smooth with
    d/dy != 0, i.e. y = g(x) as a power series. chart(n) straightens the curve
    up to order x^(n+1)."""

    base: Chart
    strict: Poly
    _graphs: dict = field(default_factory=dict)

    def graph(self, n: int) -> Poly:
        """g truncated after x^n, by the fixed-point iteration g -> g - strict(x, g)/c."""
        if n in self._graphs:
            return self._graphs[n]
        c = self.strict.diff(1).constant_term()
        g = Poly()
        for _ in range(n + 1):
            r = substitute(self.strict, X, g)
            g = _truncate(g - r.scale(1 / c), n)
        self._graphs[n] = g
        return g

    def chart(self, n: int) -> Chart:
        return self.base.with_curve(RatFunc.of(-self.graph(n)))

    def precision_for(self, ratio) -> int:
        """Smallest truncation that is exact for weights with w_y / w_x = ratio."""
        n = max(SERIES_START, int(float(ratio)))
        while not ratio < n + 1:
            n += 1
        return n

    def order_on_curve(self, p: Poly):
        """ord_x p(x, g(x)) in base coordinates, +inf when the curve divides p."""
        if p.is_zero() or divides(self.strict, p):
            return PLUS_INF
        n = SERIES_START
        while True:
            k = substitute(p, X, self.graph(n)).order()
            if k < n + 1:
                return k
            n *= 2


def _truncate(p: Poly, n: int) -> Poly:
    return Poly({(i, j): c for (i, j), c in p.terms.items() if i <= n})


@dataclass(frozen=True)
class DualGraph:
    seq: BlowupSeq
    vertices: tuple
    edges: tuple
    curves: tuple
    root: int

    @property
    def mode(self) -> str:
        return self.seq.mode

    def vertex(self, pid: int) -> GraphVertex:
        return self.vertices[pid]

    def neighbors(self, pid: int) -> list[tuple[int, GraphEdge]]:
        out = []
        for e in self.edges:
            if e.i == pid:
                out.append((e.j, e))
            elif e.j == pid:
                out.append((e.i, e))
        return out

    def edge(self, a: int, b: int) -> GraphEdge:
        for e in self.edges:
            if {e.i, e.j} == {a, b}:
                return e
        raise KeyError(f"no edge between E{a} and E{b}")

    def parent_map(self) -> dict[int, int | None]:
        par: dict[int, int | None] = {self.root: None}
        stack = [self.root]
        while stack:
            v = stack.pop()
            for w, _ in self.neighbors(v):
                if w not in par:
                    par[w] = v
                    stack.append(w)
        return par

    def path_from_root(self, pid: int) -> list[int]:
        par = self.parent_map()
        out = [pid]
        while par[out[-1]] is not None:
            out.append(par[out[-1]])
        return out[::-1]

    def curve(self, index: int) -> CurveMark:
        return self.curves[index]


def dual_graph(seq: BlowupSeq, marked_curves: Sequence[Poly] = ()) -> DualGraph:
    verts = tuple(GraphVertex(p.id, p.b, p.A, p.alpha) for p in seq.primes)
    edges = []
    for s in seq.live_satpoints():
        a, b = s.first, s.second
        if verts[b].alpha_norm > verts[a].alpha_norm:
            a, b = b, a
        ba, bb = verts[a].b, verts[b].b
        edges.append(GraphEdge(a, b, Fraction(1, ba * bb), gcd(ba, bb), s.id))
    edges.sort(key=lambda e: (min(e.i, e.j), max(e.i, e.j)))
    curves = tuple(attach_curve(seq, h, k) for k, h in enumerate(marked_curves))
    return DualGraph(seq, verts, tuple(edges), curves, seq.root if seq.primes else 0)


# ---------------------------------------------------------------- strict transforms


def _exceptional_strip(r: RatFunc, chart: Chart) -> tuple[int, int, Poly]:
    """Write r = x^a y^b * N/D with N, D free of the exceptional axes.

    Returns (a, b, N) where only exceptional axes are stripped.
    """
    num, den = r.num, r.den
    na, nb = num.monomial_content()
    da, db = den.monomial_content()
    a = na - da
    b = (nb - db) if chart.y_prime is not None else 0
    ys = nb if chart.y_prime is not None else 0
    N = num.shift(-na, -ys)
    if chart.y_prime is None and db:
        raise BlowupError("pole along a non-exceptional curve")
    return a, b, N


def _coprime_exps(chart: Chart, gens: Sequence[Poly]):
    data = [_exceptional_strip(chart.pull(g), chart) for g in gens]
    a = min(d[0] for d in data)
    b = min(d[1] for d in data)
    residual = [d[2].shift(d[0] - a, d[1] - b) for d in data]
    return a, b, residual


def _unit_at_origin(p: Poly) -> bool:
    return p.constant_term() != 0


def _restriction_roots(residual: Sequence[Poly]) -> list:
    """Rational roots y of the common zeros of the residuals on {x = 0}."""
    restr = [Poly({(0, j): c for (i, j), c in r.terms.items() if i == 0}) for r in residual]
    g = None
    for r in restr:
        g = r if g is None else poly_gcd(g, r)
    if g is None or g.is_zero():
        raise BlowupError("ideal vanishes along an exceptional prime")
    if g.degree() <= 0:
        return []
    roots = []
    _, facs = factor(g)
    for f, _m in facs:
        if f.degree() == 1:
            c1 = f.terms.get((0, 1), Fraction(0))
            c0 = f.terms.get((0, 0), Fraction(0))
            roots.append(-c0 / c1)
        elif f.degree() > 1:
            raise GroundFieldError("irrational base point (ground field ℚ too small)")
    return sorted(roots)


def _point_ok(chart: Chart, gens: Sequence[Poly]) -> bool:
    """Is the pulled-back ideal principal with snc support at the chart origin?"""
    _, _, residual = _coprime_exps(chart, gens)
    if any(_unit_at_origin(r) for r in residual):
        return True
    if chart.y_prime is not None:
        return False
    G = residual[0]
    for r in residual[1:]:
        G = poly_gcd(G, r)
    if not any(_unit_at_origin(poly_div_exact(r, G)) for r in residual):
        return False
    _, facs = factor(G)
    through = [f for f, _m in facs if f.degree() > 0 and not _unit_at_origin(f)]
    if len(through) != 1:
        return False
    ell = through[0]
    return ell.diff(1).constant_term() != 0


@dataclass(frozen=True)
class Resolution:
    seq: BlowupSeq
    Z: tuple
    flags: tuple = ()
    fixed_curves: tuple = ()  # (irreducible h, multiplicity) factored out

    def to_json(self) -> dict:
        return {"sequence": self.seq.to_json(), "Z": list(self.Z), "flags": list(self.flags)}


def ideal_order_along(seq: BlowupSeq, pid: int, gens: Sequence[Poly]) -> Fraction:
    chart = seq.prime(pid).chart_a
    return min(weighted_min(chart.pull(g), (Fraction(1), Fraction(0))) for g in gens)


def log_resolution(ideal: Ideal, mode: str = LOCAL, max_steps: int = 200) -> Resolution:
    """Blow up until the pulled-back ideal is principal with snc support."""
    gens = list(ideal.gens)
    if mode == LOCAL:
        if not ideal.vanishes_at_origin():
            raise BlowupError("local mode needs generators vanishing at the origin")
        seq = BlowupSeq.local().apply(Root())
    else:
        seq = BlowupSeq.infinity()
    fixed = []
    flags = []
    g = ideal.gcd()
    if g.degree() > 0:
        _, facs = factor(g)
        for h, m in facs:
            if h.degree() <= 0:
                continue
            if mode == LOCAL and h.constant_term() != 0:
                continue
            fixed.append((h, m))
            flags.append(f"fixed curve component {{{h} = 0}}" + (f" with multiplicity {m}" if m > 1 else ""))
    queue = [seq.root]
    while queue:
        pid = queue.pop(0)
        F = seq.prime(pid)
        todo = []
        # points visible in chart A
        _, _, residual = _coprime_exps(F.chart_a, gens)
        for c in _restriction_roots(residual):
            entry = F.points.get(c)
            if entry is None:
                todo.append(("free", c))
        # chart-B origin, and intersection points created with this prime
        if F.kind == "root":
            if INF_POINT not in F.points:
                todo.append(("free", INF_POINT))
        for c, entry in F.points.items():
            if entry[0] == "sat":
                S = seq.satpoints[entry[1]]
                if S.blown_by is None and S.first == pid:
                    todo.append(("sat", S.id))
        for kind, what in todo:
            if kind == "free":
                chart = seq.free_chart(pid, what)
                if not _point_ok(chart, gens):
                    seq = seq.apply(Free(pid, what))
                    queue.append(len(seq.primes) - 1)
            else:
                S = seq.satpoints[what]
                if S.blown_by is None and not _point_ok(S.chart, gens):
                    seq = seq.apply(Satellite(S.second, S.first))
                    queue.append(len(seq.primes) - 1)
            if len(seq.steps) > max_steps:
                raise BlowupError(f"log resolution exceeded {max_steps} steps")
    Z = tuple(ideal_order_along(seq, p.id, gens) for p in seq.primes)
    Z = tuple(int(z) if z.denominator == 1 else z for z in Z)
    return Resolution(seq, Z, tuple(flags), tuple(fixed))


# ---------------------------------------------------------------- marked curves


def _strict(chart: Chart, h: Poly) -> Poly:
    return _exceptional_strip(chart.pull(h), chart)[2]


def _curve_points(seq: BlowupSeq, pid: int, h: Poly) -> list:
    F = seq.prime(pid)
    pts = []
    sa = _strict(F.chart_a, h)
    restr = Poly({(0, j): c for (i, j), c in sa.terms.items() if i == 0})
    if restr.is_zero():
        raise BlowupError("curve contains an exceptional prime")
    if restr.degree() > 0:
        _, facs = factor(restr)
        for f, _m in facs:
            if f.degree() == 1:
                pts.append(-f.terms.get((0, 0), Fraction(0)) / f.terms[(0, 1)])
            elif f.degree() > 1:
                raise BlowupError("resolve first: curve meets a prime at irrational points")
    sb = _strict(F.chart_b, h)
    if sb.constant_term() == 0:
        pts.append(INF_POINT)
    return pts


def attach_curve(seq: BlowupSeq, h: Poly, index: int = 0) -> CurveMark:
    """Follow the strict transform of {h = 0} to the prime it meets at a free point."""
    if seq.mode == LOCAL and h.constant_term() != 0:
        raise BlowupError("curve does not pass through the origin")
    pid = seq.root
    for _ in range(len(seq.primes) + 1):
        pts = _curve_points(seq, pid, h)
        if len(pts) != 1:
            raise BlowupError("resolve first: curve is not a single branch at a free point")
        c = pts[0]
        entry = seq.prime(pid).points.get(c)
        if entry is None:
            chart = seq.free_chart(pid, c)
            return _curve_chart(seq, h, index, pid, c, chart)
        if entry[0] == "blown":
            pid = entry[1]
            continue
        S = seq.satpoints[entry[1]]
        if S.blown_by is None:
            raise BlowupError("resolve first: curve passes through a satellite point")
        pid = S.blown_by
    raise BlowupError("resolve first")


def _curve_chart(seq, h, index, pid, c, chart: Chart) -> CurveMark:
    st = _strict(chart, h)
    if st.constant_term() != 0 or st.diff(1).constant_term() == 0:
        raise BlowupError("resolve first: curve is not smooth and transverse at its free point")
    _, facs = factor(st)
    st = next(f for f, _m in facs if f.degree() > 0 and f.constant_term() == 0)
    coord = RatFunc.of(pullback(st, chart.inv))
    if st.deg_in(1) != 1:
        series = CurveSeries(chart, st)
        return CurveMark(index, h, pid, c, series.chart(SERIES_START), coord, series)
    A = Poly({(i, 0): c for (i, j), c in st.terms.items() if j == 1})
    B = Poly({(i, 0): c for (i, j), c in st.terms.items() if j == 0})
    if not B.is_zero():
        chart = chart.with_curve(RatFunc(B, A))
    return CurveMark(index, h, pid, c, chart, coord)


# ---------------------------------------------------------------- tightness


def is_tight(seq: BlowupSeq) -> list[bool]:
    if seq.mode != INFINITY:
        raise BlowupError("tightness is defined for compactifications at infinity")
    return [Fraction(p.A, p.b) <= 0 <= Fraction(p.alpha, p.b * p.b) for p in seq.primes]


# ---------------------------------------------------------------- export


def _frac_text(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def vertex_label(seq: BlowupSeq, v: GraphVertex) -> str:
    return f"{prime_name(seq, v.id)} [b={v.b},A={v.A},alpha={v.alpha}]"


def export_graph(g: DualGraph, fmt: str = "dot") -> str:
    seq = g.seq
    if fmt == "json":
        return json.dumps(graph_to_json(g), sort_keys=True, indent=2)
    if fmt != "dot":
        raise ValueError("format must be dot or json")
    lines = ["graph dual {"]
    for v in g.vertices:
        lines.append(f'  {prime_name(seq, v.id)} [label="{vertex_label(seq, v)}"];')
    for c in g.curves:
        lines.append(f'  {c.name} [label="{c.name} [curve {c.h}]", shape=plaintext];')
    for e in g.edges:
        lines.append(f'  {prime_name(seq, e.i)} -- {prime_name(seq, e.j)} '
                     f'[label="len={_frac_text(e.length)}, m={e.multiplicity}"];')
    for c in g.curves:
        lines.append(f'  {prime_name(seq, c.prime)} -- {c.name} [label="len=inf, m={g.vertex(c.prime).b}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(g: DualGraph) -> dict:
    seq = g.seq
    return {
        "mode": seq.mode,
        "sequence": seq.to_json(),
        "vertices": [{"name": prime_name(seq, v.id), "b": v.b, "A": v.A, "alpha": v.alpha,
                      "A_norm": _frac_text(v.A_norm), "alpha_norm": _frac_text(v.alpha_norm)}
                     for v in g.vertices],
        "edges": [{"from": prime_name(seq, e.i), "to": prime_name(seq, e.j),
                   "length": _frac_text(e.length), "multiplicity": e.multiplicity} for e in g.edges],
        "curves": [{"name": c.name, "h": str(c.h), "attached_to": prime_name(seq, c.prime)} for c in g.curves],
    }


# ---------------------------------------------------------------- chart-based invariants


def chart_generic_multiplicity(seq: BlowupSeq, pid: int) -> Fraction:
    """b_E recomputed from the chart: ord_E(m0) or -ord_E(|L|)."""
    chart = seq.prime(pid).chart_a
    w = (Fraction(1), Fraction(0))
    vals = [weighted_min(chart.pull(g), w) for g in (Z1, Z2)]
    if seq.mode == LOCAL:
        return min(vals)
    return -min(vals + [Fraction(0)])


def chart_log_discrepancy(seq: BlowupSeq, pid: int) -> Fraction:
    """A_E recomputed as 1 + ord_E of the pulled-back 2-form."""
    chart = seq.prime(pid).chart_a
    f1, f2 = chart.fwd
    jac = f1.diff(0) * f2.diff(1) - f1.diff(1) * f2.diff(0)
    return 1 + weighted_min(jac, (Fraction(1), Fraction(0)))
