"""Sparse bivariate polynomials with rational coefficients, rational functions,
polynomial maps, ideals, and monomial (weighted-minimum) evaluation."""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import sympy

from .numbers import (
    PLUS_INF,
    MINUS_INF,
    AffineForm,
    PAFunction,
    ext_min,
    is_infinite,
    pa_envelope,
)

_EXP_LIMIT = 2 ** 63
VARS = ("z1", "z2")


def _check_exp(i: int, j: int) -> None:
    if abs(i) >= _EXP_LIMIT or abs(j) >= _EXP_LIMIT:
        raise OverflowError("exponent exceeds 64-bit range")


class Poly:
    """Polynomial in two variables as a dict (i, j) -> nonzero Fraction.

    Negative exponents are allowed only through :class:`RatMonom` style
    Laurent data; ordinary polynomials keep i, j >= 0.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        clean: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in (terms or {}).items():
            _check_exp(i, j)
            c = Fraction(c)
            if c:
                clean[(i, j)] = clean.get((i, j), 0) + c
                if not clean[(i, j)]:
                    del clean[(i, j)]
        self.terms = clean
        self._hash = None

    # -- constructors
    @staticmethod
    def const(c) -> Poly:
        return Poly({(0, 0): c})

    @staticmethod
    def monomial(i: int, j: int, c=1) -> Poly:
        return Poly({(i, j): c})

    @staticmethod
    def var(k: int) -> Poly:
        return Poly.monomial(1, 0) if k == 0 else Poly.monomial(0, 1)

    # -- basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(i + j for i, j in self.terms)

    def order(self) -> int | float:
        """Order of vanishing at the origin (min total degree)."""
        if not self.terms:
            return PLUS_INF
        return min(i + j for i, j in self.terms)

    def deg_in(self, k: int) -> int:
        return max((e[k] for e in self.terms), default=-1)

    def constant_term(self) -> Fraction:
        return self.terms.get((0, 0), Fraction(0))

    def is_laurent(self) -> bool:
        return any(i < 0 or j < 0 for i, j in self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Poly.const(other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- arithmetic
    def __add__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return Poly(t)

    __radd__ = __add__

    def __neg__(self):
        return Poly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        t: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in self.terms.items():
            for (k, l), d in other.terms.items():
                e = (i + k, j + l)
                t[e] = t.get(e, 0) + c * d
        return Poly(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c) -> Poly:
        return Poly({e: v * c for e, v in self.terms.items()})

    def shift(self, a: int, b: int) -> Poly:
        """Multiply by the monomial z1^a z2^b (a, b may be negative)."""
        return Poly({(i + a, j + b): c for (i, j), c in self.terms.items()})

    def diff(self, k: int) -> Poly:
        t = {}
        for (i, j), c in self.terms.items():
            if k == 0 and i:
                t[(i - 1, j)] = c * i
            elif k == 1 and j:
                t[(i, j - 1)] = c * j
        return Poly(t)

    def __call__(self, x, y):
        """Evaluate at a point (or substitute any ring elements)."""
        return substitute(self, x, y)

    def monomial_content(self) -> tuple[int, int]:
        """Largest (a, b) with z1^a z2^b dividing self."""
        if not self.terms:
            return (0, 0)
        return (min(i for i, _ in self.terms), min(j for _, j in self.terms))

    # -- text
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


def _as_poly(x) -> Poly | None:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    return None


Z1 = Poly.var(0)
Z2 = Poly.var(1)
ONE = Poly.const(1)


def format_poly(p: Poly, names: Sequence[str] = VARS) -> str:
    if not p.terms:
        return "0"
    items = sorted(p.terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0]))
    out = []
    for n, ((i, j), c) in enumerate(items):
        mono = []
        for name, e in ((names[0], i), (names[1], j)):
            if e == 1:
                mono.append(name)
            elif e:
                mono.append(f"{name}^{e}")
        ac = abs(c)
        if mono:
            body = "*".join(mono) if ac == 1 else f"{ac}*" + "*".join(mono)
        else:
            body = str(ac)
        if n == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append(("- " if c < 0 else "+ ") + body)
    return " ".join(out)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|(z1|z2|x|y)|(\*\*|[-+*/^()]))")


def parse_poly(text: str) -> Poly:
    """Parse text like ``z1^2*z2 - 3/2*z2^3`` (x, y accepted as aliases)."""
    tokens: list[tuple[str, str]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {text[pos:]!r}")
        pos = m.end()
        if m.group(1):
            tokens.append(("num", m.group(1)))
        elif m.group(2):
            tokens.append(("var", m.group(2)))
        else:
            tok = m.group(3)
            tokens.append(("op", "^" if tok == "**" else tok))
    if not tokens:
        raise ValueError("empty polynomial")
    parser = _Parser(tokens)
    result = parser.expr()
    if parser.k != len(tokens):
        raise ValueError(f"unexpected token {tokens[parser.k][1]!r}")
    return result


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.k = 0

    def peek(self):
        return self.toks[self.k] if self.k < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.k += 1
        return t

    def expr(self) -> Poly:
        sgn = 1
        if self.peek() == ("op", "-"):
            self.take()
            sgn = -1
        elif self.peek() == ("op", "+"):
            self.take()
        acc = self.term().scale(sgn)
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Poly:
        acc = self.power()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.power()
            if op == "*":
                acc = acc * rhs
            else:
                if rhs.degree() != 0:
                    raise ValueError("division only by nonzero constants")
                acc = acc.scale(1 / rhs.constant_term())
        return acc

    def power(self) -> Poly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ValueError("exponent must be a nonnegative integer")
            return base ** int(val)
        return base

    def atom(self) -> Poly:
        kind, val = self.take()
        if kind == "num":
            return Poly.const(int(val))
        if kind == "var":
            return Z1 if val in ("z1", "x") else Z2
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError("unbalanced parenthesis")
            return inner
        if (kind, val) == ("op", "-"):
            return -self.atom()
        raise ValueError(f"unexpected token {val!r}")


# ---------------------------------------------------------------- rational functions


class RatFunc:
    """num/den with polynomial numerator and denominator (den != 0)."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        den = ONE if den is None else den
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        num, den = _strip_monomial(num, den)
        if den.degree() == 0:
            c = den.constant_term()
            num, den = num.scale(1 / c), ONE
        self.num = num
        self.den = den

    @staticmethod
    def of(x) -> RatFunc:
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, RatMonom):
            return x.as_ratfunc()
        return RatFunc(_as_poly(x))

    def is_poly(self) -> bool:
        return self.den == ONE

    def __add__(self, other):
        o = RatFunc.of(other)
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RatFunc.of(other))

    def __rsub__(self, other):
        return RatFunc.of(other) - self

    def __mul__(self, other):
        o = RatFunc.of(other)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = RatFunc.of(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return RatFunc.of(other) / self

    def __pow__(self, n: int):
        if n >= 0:
            return RatFunc(self.num ** n, self.den ** n)
        return RatFunc(self.den ** (-n), self.num ** (-n))

    def __eq__(self, other):
        o = RatFunc.of(other) if not isinstance(other, RatFunc) else other
        return (self.num * o.den - o.num * self.den).is_zero()

    def __hash__(self):
        return hash((self.num, self.den))

    def cancel(self) -> RatFunc:
        if self.den == ONE:
            return self
        g = poly_gcd(self.num, self.den)
        if g.degree() <= 0:
            return self
        return RatFunc(poly_div_exact(self.num, g), poly_div_exact(self.den, g))

    def diff(self, k: int) -> RatFunc:
        return RatFunc(self.num.diff(k) * self.den - self.num * self.den.diff(k), self.den * self.den)

    def __str__(self):
        if self.den == ONE:
            return str(self.num)
        return f"({self.num})/({self.den})"

    __repr__ = __str__


def _strip_monomial(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if num.is_zero():
        return num, ONE
    a, b = num.monomial_content()
    c, d = den.monomial_content()
    m, n = min(a, c), min(b, d)
    if m or n:
        return num.shift(-m, -n), den.shift(-m, -n)
    return num, den


class RatMonom:
    """A numerator polynomial over a monomial u^k v^l (k, l >= 0), reduced."""

    __slots__ = ("num", "k", "l")

    def __init__(self, num: Poly, k: int = 0, l: int = 0):
        a, b = num.monomial_content() if not num.is_zero() else (0, 0)
        da, db = min(a, k), min(b, l)
        self.num = num.shift(-da, -db) if (da or db) else num
        self.k = k - da
        self.l = l - db

    def as_ratfunc(self) -> RatFunc:
        return RatFunc(self.num, Poly.monomial(self.k, self.l))

    def __eq__(self, other):
        return isinstance(other, RatMonom) and (self.num, self.k, self.l) == (other.num, other.k, other.l)

    def __hash__(self):
        return hash((self.num, self.k, self.l))

    def __str__(self):
        if not (self.k or self.l):
            return str(self.num)
        return f"({self.num})/({format_poly(Poly.monomial(self.k, self.l))})"


# ---------------------------------------------------------------- substitution


def substitute(p: Poly, x, y):
    """p(x, y) for x, y scalars, Polys or RatFuncs."""
    if all(isinstance(v, (int, Fraction)) for v in (x, y)):
        return sum((c * Fraction(x) ** i * Fraction(y) ** j for (i, j), c in p.terms.items()), Fraction(0))
    if isinstance(x, RatFunc) or isinstance(y, RatFunc):
        return _substitute_rat(p, RatFunc.of(x), RatFunc.of(y))
    x, y = _as_poly(x), _as_poly(y)
    if x is None or y is None:
        raise TypeError("cannot substitute these values")
    xp: dict[int, Poly] = {0: ONE}
    yp: dict[int, Poly] = {0: ONE}

    def pw(cache, base, n):
        if n not in cache:
            k = max(e for e in cache if e <= n)
            val = cache[k]
            for m in range(k + 1, n + 1):
                val = val * base
                cache[m] = val
        return cache[n]

    t: dict[tuple[int, int], Fraction] = {}
    for (i, j), c in p.terms.items():
        if i < 0 or j < 0:
            raise ValueError("negative exponents need rational substitution")
        for e, d in (pw(xp, x, i) * pw(yp, y, j)).terms.items():
            t[e] = t.get(e, 0) + c * d
    return Poly(t)


def _substitute_rat(p: Poly, x: RatFunc, y: RatFunc) -> RatFunc:
    if p.is_zero():
        return RatFunc(Poly())
    imin = min(i for i, _ in p.terms)
    jmin = min(j for _, j in p.terms)
    imax = max(i for i, _ in p.terms)
    jmax = max(j for _, j in p.terms)
    # shift so exponents are nonnegative, then clear denominators
    q = p.shift(-imin, -jmin)
    d1, d2 = imax - imin, jmax - jmin
    xn, xd, yn, yd = x.num, x.den, y.num, y.den
    cache: dict = {}

    def pw(key, base, n):
        if (key, n) not in cache:
            cache[(key, n)] = base ** n
        return cache[(key, n)]

    num = Poly()
    acc: dict = {}
    for (i, j), c in q.terms.items():
        term = pw("xn", xn, i) * pw("xd", xd, d1 - i) * pw("yn", yn, j) * pw("yd", yd, d2 - j)
        for e, v in term.terms.items():
            acc[e] = acc.get(e, 0) + c * v
    num = Poly(acc)
    den = pw("xd", xd, d1) * pw("yd", yd, d2)
    out = RatFunc(num, den)
    if imin or jmin:
        out = out * (x ** imin) * (y ** jmin)
    return out


def pullback(phi, chart: Sequence) -> RatFunc | Poly:
    """phi composed with a chart map (pair of Polys or RatFuncs)."""
    x, y = chart
    if isinstance(phi, RatFunc):
        return RatFunc.of(substitute(phi.num, x, y)) / RatFunc.of(substitute(phi.den, x, y))
    if isinstance(phi, RatMonom):
        return pullback(phi.as_ratfunc(), chart)
    return substitute(phi, x, y)


# ---------------------------------------------------------------- sympy bridge

_S1, _S2 = sympy.symbols("z1 z2")


def to_sympy(p: Poly) -> sympy.Poly:
    return sympy.Poly.from_dict({e: sympy.Rational(c.numerator, c.denominator) for e, c in p.terms.items()}
                                or {(0, 0): 0}, _S1, _S2, domain="QQ")


def from_sympy(sp) -> Poly:
    if not isinstance(sp, sympy.Poly):
        sp = sympy.Poly(sp, _S1, _S2, domain="QQ")
    out = {}
    for e, c in sp.terms():
        c = sympy.Rational(c)
        out[tuple(int(k) for k in e)] = Fraction(int(c.p), int(c.q))
    return Poly(out)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    return from_sympy(sympy.gcd(to_sympy(a), to_sympy(b)))


def poly_div_exact(a: Poly, b: Poly) -> Poly:
    q, r = sympy.div(to_sympy(a), to_sympy(b))
    if not r.is_zero:
        raise ValueError("polynomial division is not exact")
    return from_sympy(q)


def divides(h: Poly, p: Poly) -> bool:
    if p.is_zero():
        return True
    _, r = sympy.div(to_sympy(p), to_sympy(h))
    return r.is_zero


def factor(p: Poly) -> tuple[Fraction, list[tuple[Poly, int]]]:
    """Irreducible factorization over the rationals."""
    c, facs = sympy.factor_list(to_sympy(p))
    c = sympy.Rational(c)
    return Fraction(int(c.p), int(c.q)), [(from_sympy(f), int(m)) for f, m in facs]


# ---------------------------------------------------------------- maps and ideals


class PolyMap:
    """(z1, z2) -> (f1, f2)."""

    __slots__ = ("f1", "f2", "_dominant")

    def __init__(self, f1: Poly, f2: Poly):
        self.f1 = f1
        self.f2 = f2
        self._dominant = None

    @staticmethod
    def identity() -> PolyMap:
        return PolyMap(Z1, Z2)

    @staticmethod
    def parse(text: str) -> PolyMap:
        parts = [s for s in text.split(";")]
        if len(parts) != 2:
            raise ValueError("a map is written 'f1; f2'")
        return PolyMap(parse_poly(parts[0]), parse_poly(parts[1]))

    def __iter__(self):
        return iter((self.f1, self.f2))

    def __eq__(self, other):
        return isinstance(other, PolyMap) and self.f1 == other.f1 and self.f2 == other.f2

    def __hash__(self):
        return hash((self.f1, self.f2))

    def degree(self) -> int:
        return max(self.f1.degree(), self.f2.degree())

    @property
    def dominant(self) -> bool:
        if self._dominant is None:
            self._dominant = not jacobian(self).is_zero()
        return self._dominant

    def fixes_origin(self) -> bool:
        return self.f1.constant_term() == 0 and self.f2.constant_term() == 0

    def __call__(self, phi):
        """Pull back a polynomial: phi o f."""
        return substitute(phi, self.f1, self.f2)

    def __str__(self):
        return f"{self.f1}; {self.f2}"

    __repr__ = __str__


def compose(f: PolyMap, g: PolyMap) -> PolyMap:
    """f o g, i.e. (f1(g1, g2), f2(g1, g2))."""
    return PolyMap(substitute(f.f1, g.f1, g.f2), substitute(f.f2, g.f1, g.f2))


def iterate(f: PolyMap, n: int) -> PolyMap:
    g = PolyMap.identity()
    for _ in range(n):
        g = compose(f, g)
    return g


def truncate(p: Poly, K: int) -> Poly:
    """Drop the terms of total degree above K."""
    return Poly({e: c for e, c in p.terms.items() if e[0] + e[1] <= K})


def _raw(p: Poly) -> dict:
    # plain ints where possible: Fraction arithmetic dominates big jets
    return {e: (c.numerator if c.denominator == 1 else c) for e, c in p.terms.items()}


def _jet_mul(a: dict, b: dict, K: int) -> dict:
    t: dict = {}
    for (i, j), c in a.items():
        room = K - i - j
        for (k, l), d in b.items():
            if k + l <= room:
                e = (i + k, j + l)
                t[e] = t.get(e, 0) + c * d
    return t


def compose_jet(f: PolyMap, g: PolyMap, K: int) -> PolyMap:
    """K-jet of f o g; exact when g fixes the origin and g is known to order K."""
    if not g.fixes_origin():
        raise ValueError("jets compose only for maps fixing the origin")
    K_g = K
    if not (g.f1.is_zero() and g.f2.is_zero()) and not (f.f1.is_zero() and f.f2.is_zero()):
        # a degree e term of f multiplies e factors of order >= c, so an error
        # in g above K - (e - 1) c never reaches degree K
        c = min(g.f1.order(), g.f2.order())
        m = min(f.f1.order(), f.f2.order())
        K_g = K - (m - 1) * c
    g1, g2 = _raw(truncate(g.f1, K_g)), _raw(truncate(g.f2, K_g))
    cache: dict = {}

    def pw(key, base, n):
        if (key, n) not in cache:
            cache[(key, n)] = {(0, 0): 1} if n == 0 else _jet_mul(pw(key, base, n - 1), base, K)
        return cache[(key, n)]

    def sub(p: Poly) -> Poly:
        t: dict = {}
        for (i, j), c in _raw(p).items():
            if i + j > K:
                continue
            for e, d in _jet_mul(pw(0, g1, i), pw(1, g2, j), K).items():
                t[e] = t.get(e, 0) + c * d
        return Poly(t)

    return PolyMap(sub(f.f1), sub(f.f2))


def jacobian(f) -> Poly:
    f1, f2 = f
    return f1.diff(0) * f2.diff(1) - f1.diff(1) * f2.diff(0)


class Ideal:
    """Nonempty list of nonzero generators."""

    __slots__ = ("gens",)

    def __init__(self, gens: Iterable[Poly]):
        gens = [g for g in gens]
        if not gens:
            raise ValueError("an ideal needs at least one generator")
        if any(g.is_zero() for g in gens):
            raise ValueError("zero generator")
        self.gens = tuple(gens)

    @staticmethod
    def parse(text: str) -> Ideal:
        return Ideal(parse_poly(s) for s in text.split(","))

    @staticmethod
    def maximal() -> Ideal:
        return Ideal([Z1, Z2])

    def power(self, n: int) -> Ideal:
        gens = [ONE]
        for _ in range(n):
            gens = list({g * h for g in gens for h in self.gens})
        return Ideal(sorted(gens, key=str))

    def order(self) -> int:
        return min(g.order() for g in self.gens)

    def vanishes_at_origin(self) -> bool:
        return all(g.constant_term() == 0 for g in self.gens)

    def gcd(self) -> Poly:
        g = self.gens[0]
        for h in self.gens[1:]:
            g = poly_gcd(g, h)
        return g

    def __iter__(self):
        return iter(self.gens)

    def __str__(self):
        return ", ".join(str(g) for g in self.gens)


# ---------------------------------------------------------------- monomial evaluation


def _term_weight(i: int, j: int, w1, w2):
    total = 0
    for e, w in ((i, w1), (j, w2)):
        if e == 0:
            continue
        total = total + (w * e if not is_infinite(w) else (w if e > 0 else -w))
    return total


def weighted_min(phi, w) -> object:
    """min over the support of <w, exponent>, minus the denominator's value."""
    w1, w2 = w
    if w1 == MINUS_INF and w2 == MINUS_INF:
        raise ValueError("weights cannot both be -inf")
    if isinstance(phi, RatMonom):
        base = weighted_min(phi.num, w)
        return base - _term_weight(phi.k, phi.l, w1, w2)
    if isinstance(phi, RatFunc):
        top = weighted_min(phi.num, w)
        bot = weighted_min(phi.den, w)
        if is_infinite(bot):
            raise ValueError("denominator has infinite value")
        return top - bot
    if phi.is_zero():
        return PLUS_INF
    return ext_min(_term_weight(i, j, w1, w2) for (i, j) in phi.terms)


def initial_form(p: Poly, w) -> Poly:
    """Terms of p where the weighted minimum is attained."""
    if p.is_zero():
        return p
    m = weighted_min(p, w)
    return Poly({e: c for e, c in p.terms.items() if _term_weight(e[0], e[1], *w) == m})


def min_exponent(phi, w) -> tuple[int, int]:
    """Exponent of the unique minimizing monomial (numerator minus denominator)."""
    if isinstance(phi, RatFunc):
        a = min_exponent(phi.num, w)
        b = min_exponent(phi.den, w)
        return (a[0] - b[0], a[1] - b[1])
    ini = initial_form(phi, w)
    if len(ini.terms) != 1:
        raise ValueError("minimum is not attained at a single monomial")
    return next(iter(ini.terms))


def weighted_min_param(phi, w, interval) -> PAFunction:
    """Lower envelope t -> weighted_min(phi, (w1(t), w2(t))) with affine weights."""
    w1, w2 = (x if isinstance(x, AffineForm) else AffineForm(x, Fraction(0)) for x in w)
    if isinstance(phi, RatMonom):
        phi = phi.as_ratfunc()
    if isinstance(phi, RatFunc):
        return weighted_min_param(phi.num, (w1, w2), interval) - weighted_min_param(phi.den, (w1, w2), interval)
    if phi.is_zero():
        raise ValueError("zero polynomial has no finite envelope")
    forms = [w1.scale(i) + w2.scale(j) for (i, j) in phi.terms]
    return pa_envelope(forms, interval)


def h_adic_order(phi: Poly, h: Poly):
    """Largest k with h^k dividing phi; +inf for phi = 0."""
    if h.degree() <= 0:
        raise ValueError("h must be nonconstant")
    if phi.is_zero():
        return PLUS_INF
    sh = to_sympy(h)
    cur = to_sympy(phi)
    k = 0
    while True:
        q, r = sympy.div(cur, sh)
        if not r.is_zero:
            return k
        k += 1
        cur = q


__all__ = [
    "Poly", "RatFunc", "RatMonom", "PolyMap", "Ideal", "Z1", "Z2", "ONE",
    "parse_poly", "format_poly", "substitute", "pullback", "compose", "iterate",
    "jacobian", "weighted_min", "weighted_min_param", "initial_form", "min_exponent",
    "h_adic_order", "poly_gcd", "poly_div_exact", "divides", "factor",
]
