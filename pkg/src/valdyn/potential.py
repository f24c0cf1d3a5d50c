"""Potential theory on dual graphs: Laplacians of piecewise affine functions,
Green kernels, Poisson solving and the Laplacian of log|a| for an ideal a."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .blowup import LOCAL, DualGraph, dual_graph, log_resolution, prime_name
from .numbers import MINUS_INF, PLUS_INF, exact_key, scalar_to_json, sign
from .poly import Ideal
from .valuation import (
    GraphPoint,
    precedes,
    curve_point,
    edge_point_at_alpha,
    locate,
    point_valuation,
    vertex_point,
)


class PotentialError(ValueError):
    pass


# ---------------------------------------------------------------- measures


@dataclass(frozen=True)
class AtomicMeasure:
    graph: DualGraph
    atoms: tuple  # ((GraphPoint, mass), ...) with distinct points, nonzero masses

    @staticmethod
    def of(graph: DualGraph, atoms: Iterable[tuple[GraphPoint, object]]) -> AtomicMeasure:
        acc: dict = {}
        order = []
        for p, m in atoms:
            if p not in acc:
                order.append(p)
                acc[p] = 0
            acc[p] = acc[p] + m
        kept = tuple((p, acc[p]) for p in sorted(order, key=_point_key) if acc[p] != 0)
        return AtomicMeasure(graph, kept)

    @property
    def mode(self) -> str:
        return self.graph.mode

    def as_dict(self) -> dict:
        return dict(self.atoms)

    def total_mass(self):
        return sum((m for _, m in self.atoms), Fraction(0))

    def is_positive(self) -> bool:
        return all(sign(m) > 0 for _, m in self.atoms)

    def __add__(self, other: AtomicMeasure) -> AtomicMeasure:
        return AtomicMeasure.of(self.graph, list(self.atoms) + list(other.atoms))

    def scale(self, c) -> AtomicMeasure:
        return AtomicMeasure.of(self.graph, [(p, c * m) for p, m in self.atoms])

    def __eq__(self, other):
        return isinstance(other, AtomicMeasure) and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(frozenset(self.atoms))

    def to_json(self) -> list:
        seq = self.graph.seq
        return [{"point": p.label(seq), "mass": scalar_to_json(m)} for p, m in self.atoms]


def _point_key(p: GraphPoint):
    rank = {"vertex": 0, "edge": 1, "curve": 2}[p.kind]
    return (rank, p.ids, exact_key(p.alpha))


def dirac(graph: DualGraph, point: GraphPoint, mass=Fraction(1)) -> AtomicMeasure:
    return AtomicMeasure.of(graph, [(point, mass)])


def transport(rho: AtomicMeasure, finer: DualGraph) -> AtomicMeasure:
    """Push a measure forward along the inclusion into a finer graph."""
    out = []
    for p, m in rho.atoms:
        v = point_valuation(rho.graph, p)
        out.append((locate(v, finer), m))
    return AtomicMeasure.of(finer, out)


# ---------------------------------------------------------------- tree functions


@dataclass(frozen=True)
class TreeFn:
    """Function on a dual graph, affine in alpha between consecutive knots.

    values: per vertex. knots: edge (i, j) -> ((alpha, value), ...) strictly
    inside the edge. curve_slopes: curve index -> derivative along the ray
    toward the curve end, per unit length.
    """

    graph: DualGraph
    values: tuple
    knots: dict = field(default_factory=dict)
    curve_slopes: dict = field(default_factory=dict)

    def edge_profile(self, i: int, j: int) -> list[tuple]:
        """(alpha, value) from vertex i to vertex j, knots included."""
        e = self.graph.edge(i, j)
        start = (self.graph.vertex(e.i).alpha_norm, self.values[e.i])
        end = (self.graph.vertex(e.j).alpha_norm, self.values[e.j])
        prof = [start, *self.knots.get((e.i, e.j), ()), end]
        return prof if (e.i, e.j) == (i, j) else prof[::-1]

    def __call__(self, p: GraphPoint):
        if p.kind == "vertex":
            return self.values[p.ids[0]]
        if p.kind == "curve":
            s = self.curve_slopes.get(p.ids[1], Fraction(0))
            base = self.values[p.ids[0]]
            if p.is_curve_end:
                return base if s == 0 else (PLUS_INF if s > 0 else MINUS_INF)
            length = self.graph.vertex(p.ids[0]).alpha_norm - p.alpha
            return base + s * length
        prof = self.edge_profile(*p.ids)
        for (a0, v0), (a1, v1) in zip(prof, prof[1:]):
            if a1 <= p.alpha <= a0:
                return v0 + (v1 - v0) * (a0 - p.alpha) / (a0 - a1)
        raise PotentialError("point outside its edge")

    def __add__(self, other: TreeFn) -> TreeFn:
        return _combine(self, other, 1)

    def __sub__(self, other: TreeFn) -> TreeFn:
        return _combine(self, other, -1)

    def to_json(self) -> dict:
        seq = self.graph.seq
        return {prime_name(seq, k): scalar_to_json(v) for k, v in enumerate(self.values)}


def _combine(f: TreeFn, g: TreeFn, s) -> TreeFn:
    if f.graph.seq != g.graph.seq:
        raise PotentialError("functions live on different graphs")
    vals = tuple(a + s * b for a, b in zip(f.values, g.values))
    knots = {}
    for key in set(f.knots) | set(g.knots):
        alphas = sorted({a for a, _ in f.knots.get(key, ())} | {a for a, _ in g.knots.get(key, ())}, reverse=True)
        pts = []
        for a in alphas:
            gp = _edge_gp(f.graph, key, a)
            pts.append((a, f(gp) + s * g(gp)))
        knots[key] = tuple(pts)
    slopes = {k: f.curve_slopes.get(k, 0) + s * g.curve_slopes.get(k, 0)
              for k in set(f.curve_slopes) | set(g.curve_slopes)}
    return TreeFn(f.graph, vals, knots, slopes)


def _edge_gp(graph: DualGraph, key, alpha) -> GraphPoint:
    return edge_point_at_alpha(graph, key[0], key[1], alpha)


# ---------------------------------------------------------------- Laplacian


def laplacian(phi: TreeFn) -> AtomicMeasure:
    """Sum of outgoing slopes at each point, with the ground term at the root."""
    g = phi.graph
    atoms = []
    mass = {v.id: Fraction(0) for v in g.vertices}
    for e in g.edges:
        prof = phi.edge_profile(e.i, e.j)
        slopes = [(v1 - v0) / (a0 - a1) for (a0, v0), (a1, v1) in zip(prof, prof[1:])]
        mass[e.i] += slopes[0]
        mass[e.j] += -slopes[-1]
        for k, (a, _v) in enumerate(prof[1:-1]):
            atoms.append((_edge_gp(g, (e.i, e.j), a), slopes[k + 1] - slopes[k]))
    for c in g.curves:
        s = phi.curve_slopes.get(c.index, Fraction(0))
        mass[c.prime] += s
        if s != 0:
            atoms.append((curve_point(g, c.index, Fraction(1), PLUS_INF), -s))
    root_val = phi.values[g.root]
    mass[g.root] += -root_val if g.mode == LOCAL else root_val
    atoms.extend((vertex_point(g, k), m) for k, m in mass.items())
    return AtomicMeasure.of(g, atoms)


# ---------------------------------------------------------------- Green kernel


def meet_alpha(graph: DualGraph, p: GraphPoint, q: GraphPoint):
    """alpha of p ^ q in the tree rooted at the graph root."""
    if precedes(graph, p, q):
        return p.alpha
    if precedes(graph, q, p):
        return q.alpha
    pp = graph.path_from_root(p.ids[0])
    qp = graph.path_from_root(q.ids[0])
    meet = graph.root
    for a, b in zip(pp, qp):
        if a != b:
            break
        meet = a
    return graph.vertex(meet).alpha_norm


def green_eval(rho: AtomicMeasure, p: GraphPoint):
    if not rho.is_positive():
        raise PotentialError("positive measures only")
    total = Fraction(0)
    for w, m in rho.atoms:
        total = total + m * meet_alpha(rho.graph, w, p)
    return total


def poisson_solve(rho: AtomicMeasure) -> TreeFn:
    if not rho.is_positive():
        raise PotentialError("positive measures only")
    g = rho.graph
    vals = tuple(green_eval(rho, vertex_point(g, v.id)) for v in g.vertices)
    knots: dict = {}
    slopes: dict = {}
    for p, m in rho.atoms:
        if p.kind == "edge":
            knots.setdefault(p.ids, set()).add(p.alpha)
        elif p.kind == "curve":
            if not p.is_curve_end:
                raise PotentialError("atoms inside curve segments are not supported")
            slopes[p.ids[1]] = slopes.get(p.ids[1], Fraction(0)) - m
    knot_vals = {}
    for key, alphas in knots.items():
        knot_vals[key] = tuple((a, green_eval(rho, _edge_gp(g, key, a))) for a in sorted(alphas, reverse=True))
    return TreeFn(g, vals, knot_vals, slopes)


# ---------------------------------------------------------------- log |a|


def _intersection_numbers(res, graph: DualGraph, fixed_marks) -> list:
    M = res.seq.matrix
    n = len(M)
    zi = [-sum(res.Z[k] * M[k][i] for k in range(n)) for i in range(n)]
    for mark, k in fixed_marks:
        zi[mark.prime] -= k
    return zi


def log_ideal_fn(ideal: Ideal, graph: DualGraph) -> TreeFn:
    """log|a| = -v(a) on a graph where it is affine (e.g. a log resolution graph)."""
    gens = list(ideal.gens)
    vals = []
    for v in graph.vertices:
        val = point_valuation(graph, vertex_point(graph, v.id)).eval_ideal(gens)
        vals.append(-val)
    slopes = {}
    for c in graph.curves:
        F = graph.vertex(c.prime)
        probe = curve_point(graph, c.index, Fraction(1), Fraction(F.b))  # tau = 1
        val = -point_valuation(graph, probe).eval_ideal(gens)
        slopes[c.index] = (val - vals[c.prime]) / (F.alpha_norm - probe.alpha)
    return TreeFn(graph, tuple(vals), {}, slopes)


def laplacian_log_ideal(ideal: Ideal, mode: str = LOCAL) -> AtomicMeasure:
    """sum_i b_i (Z . E_i) delta_{v_i}, plus curve-end atoms for fixed components."""
    res = log_resolution(ideal, mode)
    curves = [h for h, _k in res.fixed_curves]
    graph = dual_graph(res.seq, curves)
    marks = [(graph.curve(i), k) for i, (_h, k) in enumerate(res.fixed_curves)]
    zi = _intersection_numbers(res, graph, marks)
    atoms = [(vertex_point(graph, v.id), v.b * zi[v.id]) for v in graph.vertices]
    for mark, k in marks:
        atoms.append((curve_point(graph, mark.index, Fraction(1), PLUS_INF), k * graph.vertex(mark.prime).b))
    return AtomicMeasure.of(graph, atoms)


def measure_summary(rho: AtomicMeasure) -> dict:
    return {"atoms": rho.to_json(), "total_mass": scalar_to_json(rho.total_mass())}


__all__ = [
    "AtomicMeasure", "TreeFn", "dirac", "transport", "laplacian", "green_eval", "meet_alpha",
    "poisson_solve", "log_ideal_fn", "laplacian_log_ideal", "measure_summary", "PotentialError",
]
