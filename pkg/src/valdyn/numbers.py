"""Exact scalars: rationals, real quadratic numbers p + q*sqrt(D), and +-infinity.

Also holds the one-variable piecewise-affine helpers (lower envelopes,
fixed points of affine ratios) and the quadratic-integer certificate.
"""
from __future__ import annotations

import math
from functools import cmp_to_key
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union


def squarefree_split(n: int) -> tuple[int, int]:
    """Write n > 0 as k*k*d with d squarefree; return (k, d)."""
    if n <= 0:
        raise ValueError("squarefree_split needs a positive integer")
    k, d, p = 1, 1, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        k *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1
    return k, d * n


class Quad:
    """p + q*sqrt(D) with rational p, q, q != 0 and D > 1 squarefree.

    Build values through :func:`quad`, which collapses q == 0 to a Fraction.
    """

    __slots__ = ("p", "q", "D")

    def __init__(self, p, q, D: int):
        self.p = Fraction(p)
        self.q = Fraction(q)
        self.D = int(D)

    # -- helpers
    def _coerce(self, other):
        if isinstance(other, Quad):
            if other.D != self.D:
                raise ValueError(f"mixed quadratic fields sqrt({self.D}) and sqrt({other.D})")
            return other.p, other.q
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def conjugate(self) -> Quad:
        return Quad(self.p, -self.q, self.D)

    def norm(self) -> Fraction:
        return self.p * self.p - self.q * self.q * self.D

    def sign(self) -> int:
        sp = (self.p > 0) - (self.p < 0)
        sq = (self.q > 0) - (self.q < 0)
        if sp == sq or sp == 0:
            return sq if sq else sp
        if sq == 0:
            return sp
        # opposite signs: compare p^2 against q^2 D
        n = self.norm()
        return sp if n > 0 else sq

    # -- arithmetic
    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(self.p + c[0], self.q + c[1], self.D)

    __radd__ = __add__

    def __neg__(self):
        return Quad(-self.p, -self.q, self.D)

    def __sub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(self.p - c[0], self.q - c[1], self.D)

    def __rsub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(c[0] - self.p, c[1] - self.q, self.D)

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        p, q = c
        return quad(self.p * p + self.q * q * self.D, self.p * q + self.q * p, self.D)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        p, q = c
        n = p * p - q * q * self.D
        if n == 0:
            raise ZeroDivisionError("division by zero")
        # (a + b s)/(p + q s) = (a + b s)(p - q s)/n
        return quad((self.p * p - self.q * q * self.D) / n, (self.q * p - self.p * q) / n, self.D)

    def __rtruediv__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return self.inverse() * c[0]

    def inverse(self):
        n = self.norm()
        return quad(self.p / n, -self.q / n, self.D)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        base, out = (self if n >= 0 else self.inverse()), Fraction(1)
        n = abs(n)
        while n:
            if n & 1:
                out = base * out
            base = base * base
            n >>= 1
        return out

    # -- comparisons
    def _cmp(self, other):
        if isinstance(other, _Infinity):
            return -other.sgn
        c = self._coerce(other)
        if c is None:
            return None
        return Quad(self.p - c[0], self.q - c[1], self.D).sign()

    def __eq__(self, other):
        if isinstance(other, Quad):
            return self.D == other.D and self.p == other.p and self.q == other.q
        return False

    def __hash__(self):
        return hash((self.p, self.q, self.D))

    def __lt__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s < 0

    def __le__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s <= 0

    def __gt__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s > 0

    def __ge__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s >= 0

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(self.D)

    def __repr__(self):
        return f"Quad({self.p}, {self.q}, {self.D})"

    def __str__(self):
        q = "" if self.q == 1 else ("-" if self.q == -1 else f"{self.q}*")
        if self.p == 0:
            return f"{q}sqrt({self.D})"
        sign = "+" if self.q > 0 else "-"
        qa = abs(self.q)
        qs = "" if qa == 1 else f"{qa}*"
        return f"{self.p} {sign} {qs}sqrt({self.D})"


Scalar = Union[Fraction, Quad]


def quad(p, q, D: int) -> Scalar:
    """Normalizing constructor: q == 0 gives a Fraction."""
    q = Fraction(q)
    if q == 0:
        return Fraction(p)
    return Quad(p, q, D)


def sqrt_rational(x) -> Scalar:
    """Exact square root of a nonnegative rational."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("square root of a negative number")
    if x == 0:
        return Fraction(0)
    num = x.numerator * x.denominator
    k, d = squarefree_split(num)
    # sqrt(n/m) = sqrt(n m)/m = k sqrt(d)/m
    coeff = Fraction(k, x.denominator)
    return coeff if d == 1 else Quad(0, coeff, d)


class _Infinity:
    __slots__ = ("sgn",)

    def __init__(self, sgn: int):
        self.sgn = sgn

    def __repr__(self):
        return "+inf" if self.sgn > 0 else "-inf"

    __str__ = __repr__

    def __neg__(self):
        return MINUS_INF if self.sgn > 0 else PLUS_INF

    def __add__(self, other):
        if isinstance(other, _Infinity) and other.sgn != self.sgn:
            raise ValueError("(+inf) + (-inf) is undefined")
        return self

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        s = sign(other)
        if s == 0:
            raise ValueError("0 * inf is undefined")
        return self if s > 0 else -self

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, _Infinity):
            raise ValueError("inf / inf is undefined")
        return self * other

    def _cmp(self, other):
        if isinstance(other, _Infinity):
            return (self.sgn > other.sgn) - (self.sgn < other.sgn)
        return self.sgn

    def __eq__(self, other):
        return isinstance(other, _Infinity) and other.sgn == self.sgn

    def __hash__(self):
        return hash(("inf", self.sgn))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return math.inf * self.sgn


PLUS_INF = _Infinity(1)
MINUS_INF = _Infinity(-1)

ExtValue = Union[Fraction, Quad, _Infinity]


def is_infinite(x) -> bool:
    return isinstance(x, _Infinity)


def sign(x) -> int:
    if isinstance(x, Quad):
        return x.sign()
    if isinstance(x, _Infinity):
        return x.sgn
    return (x > 0) - (x < 0)


def as_scalar(x) -> ExtValue:
    if isinstance(x, (Quad, _Infinity, Fraction)):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        if x.strip() in ("inf", "+inf"):
            return PLUS_INF
        if x.strip() == "-inf":
            return MINUS_INF
        return Fraction(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def quad_field(values: Iterable) -> int | None:
    """The common D of the Quad entries, None if all rational; errors on a mix."""
    D = None
    for v in values:
        if isinstance(v, Quad):
            if D is None:
                D = v.D
            elif D != v.D:
                raise ValueError(f"mixed quadratic fields sqrt({D}) and sqrt({v.D})")
    return D


def ext_min(values: Iterable) -> ExtValue:
    best = PLUS_INF
    for v in values:
        if v < best:
            best = v
    return best


# ---------------------------------------------------------------- JSON


def approx(x) -> float | None:
    if isinstance(x, _Infinity):
        return None
    return round(float(x), 12)


def _frac_pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def scalar_to_json(x, with_approx: bool = True) -> dict:
    if isinstance(x, _Infinity):
        return {"inf": x.sgn}
    if isinstance(x, Quad):
        out = {"quad": {"p": _frac_pair(x.p), "q": _frac_pair(x.q), "D": x.D}}
    else:
        out = {"rat": _frac_pair(Fraction(x))}
    if with_approx:
        out["approx"] = approx(x)
    return out


def scalar_from_json(obj: dict) -> ExtValue:
    if "inf" in obj:
        return PLUS_INF if obj["inf"] > 0 else MINUS_INF
    if "quad" in obj:
        q = obj["quad"]
        return quad(Fraction(*q["p"]), Fraction(*q["q"]), q["D"])
    return Fraction(*obj["rat"])


# ---------------------------------------------------------------- affine pieces


@dataclass(frozen=True)
class AffineForm:
    """a + b*t."""

    a: Scalar
    b: Scalar

    def __call__(self, t):
        if isinstance(t, _Infinity):
            s = sign(self.b)
            return self.a if s == 0 else (t if s > 0 else -t)
        return self.a + self.b * t

    def __add__(self, other: AffineForm) -> AffineForm:
        return AffineForm(self.a + other.a, self.b + other.b)

    def __sub__(self, other: AffineForm) -> AffineForm:
        return AffineForm(self.a - other.a, self.b - other.b)

    def scale(self, k) -> AffineForm:
        return AffineForm(self.a * k, self.b * k)

    def crossing(self, other: AffineForm):
        """The t where the two forms agree, None if parallel."""
        db = self.b - other.b
        if db == 0:
            return None
        return (other.a - self.a) / db

    def __str__(self):
        return f"{self.a} + {self.b}*t"


@dataclass(frozen=True)
class PAFunction:
    """Piecewise-affine function on [lo, hi]; breaks are the interior breakpoints."""

    lo: ExtValue
    hi: ExtValue
    breaks: tuple
    forms: tuple

    def __post_init__(self):
        if len(self.forms) != len(self.breaks) + 1:
            raise ValueError("need one more form than breakpoints")
        prev = self.lo
        for b in self.breaks:
            if not prev < b:
                raise ValueError("breakpoints must increase strictly")
            prev = b
        if self.breaks and not self.breaks[-1] < self.hi:
            raise ValueError("breakpoints must lie inside the interval")

    @staticmethod
    def constant(c, lo, hi) -> PAFunction:
        return PAFunction(lo, hi, (), (AffineForm(c, Fraction(0)),))

    @staticmethod
    def affine(form: AffineForm, lo, hi) -> PAFunction:
        return PAFunction(lo, hi, (), (form,))

    def pieces(self) -> list[tuple]:
        ends = (self.lo,) + tuple(self.breaks) + (self.hi,)
        return [(ends[k], ends[k + 1], self.forms[k]) for k in range(len(self.forms))]

    def piece_index(self, t) -> int:
        # closed pieces, a breakpoint belongs to the earlier piece
        for k, b in enumerate(self.breaks):
            if t <= b:
                return k
        return len(self.breaks)

    def __call__(self, t):
        if t < self.lo or t > self.hi:
            raise ValueError("point outside the interval")
        return self.forms[self.piece_index(t)](t)

    def is_concave(self) -> bool:
        return all(self.forms[k + 1].b <= self.forms[k].b for k in range(len(self.forms) - 1))

    def _refined(self, cuts: Sequence) -> list:
        allcuts = _exact_sorted(set(self.breaks) | set(cuts))
        return [self.forms[self.piece_index(c)] for c in allcuts] + [self.forms[-1]]

    def _combine(self, other: PAFunction, op) -> PAFunction:
        if self.lo != other.lo or self.hi != other.hi:
            raise ValueError("PA functions live on different intervals")
        cuts = _exact_sorted(set(self.breaks) | set(other.breaks))
        mine = self._refined(other.breaks)
        theirs = other._refined(self.breaks)
        forms = [op(x, y) for x, y in zip(mine, theirs)]
        return _simplify(self.lo, self.hi, cuts, forms)

    def __add__(self, other: PAFunction) -> PAFunction:
        return self._combine(other, lambda x, y: x + y)

    def __sub__(self, other: PAFunction) -> PAFunction:
        return self._combine(other, lambda x, y: x - y)

    def scale(self, k) -> PAFunction:
        return PAFunction(self.lo, self.hi, self.breaks, tuple(f.scale(k) for f in self.forms))

    def minimum(self, other: PAFunction) -> PAFunction:
        """Pointwise minimum, splitting pieces where the two cross."""
        if self.lo != other.lo or self.hi != other.hi:
            raise ValueError("PA functions live on different intervals")
        cuts = _exact_sorted(set(self.breaks) | set(other.breaks))
        mine = self._refined(other.breaks)
        theirs = other._refined(self.breaks)
        ends = [self.lo] + cuts + [self.hi]
        out_cuts: list = []
        out_forms: list = []
        for k in range(len(mine)):
            env = pa_envelope([mine[k], theirs[k]], (ends[k], ends[k + 1]))
            if k:
                out_cuts.append(ends[k])
            out_cuts.extend(env.breaks)
            out_forms.extend(env.forms)
        return _simplify(self.lo, self.hi, out_cuts, out_forms)

    def __str__(self):
        return "; ".join(f"[{lo}, {hi}]: {f}" for lo, hi, f in self.pieces())


exact_key = cmp_to_key(lambda x, y: (x > y) - (x < y))
"""Sort key comparing scalars and infinities exactly."""


def _exact_sorted(xs) -> list:
    return sorted(xs, key=exact_key)


def _simplify(lo, hi, cuts, forms) -> PAFunction:
    keep_cuts: list = []
    keep_forms = [forms[0]]
    for c, f in zip(cuts, forms[1:]):
        if f == keep_forms[-1]:
            continue
        keep_cuts.append(c)
        keep_forms.append(f)
    return PAFunction(lo, hi, tuple(keep_cuts), tuple(keep_forms))


def _dedupe(forms: Sequence[AffineForm]) -> list[AffineForm]:
    seen = []
    for f in forms:
        if f not in seen:
            seen.append(f)
    return seen


def pa_envelope(forms: Sequence[AffineForm], interval) -> PAFunction:
    """Lower envelope (pointwise minimum) of affine forms over an interval."""
    if not forms:
        raise ValueError("no forms")
    lo, hi = (as_scalar(interval[0]), as_scalar(interval[1]))
    if not lo <= hi:
        raise ValueError("empty interval")
    forms = _dedupe(forms)
    if lo == hi:
        low = ext_min(f(lo) for f in forms)
        return PAFunction(lo, hi, (), (next(f for f in forms if f(lo) == low),))

    def starts_lowest(cands, t):
        # smallest value at t, then smallest slope (lowest just after t), then earliest
        if isinstance(t, _Infinity):
            top = max(f.b for f in cands)
            cands = [f for f in cands if f.b == top]
            low = min(f.a for f in cands)
            return next(f for f in cands if f.a == low)
        low = cands[0](t)
        for f in cands[1:]:
            if f(t) < low:
                low = f(t)
        at = [f for f in cands if f(t) == low]
        slope = min(f.b for f in at)
        return next(f for f in at if f.b == slope)

    cur = starts_lowest(forms, lo)
    t = lo
    cuts: list = []
    out = [cur]
    while True:
        nxt_t = None
        cands: list = []
        for g in forms:
            if g.b >= cur.b:
                continue
            x = cur.crossing(g)
            if not x > t:
                continue
            if nxt_t is None or x < nxt_t:
                nxt_t, cands = x, [g]
            elif x == nxt_t:
                cands.append(g)
        if nxt_t is None or not nxt_t < hi:
            break
        slope = ext_min(f.b for f in cands)
        cur = next(f for f in cands if f.b == slope)
        cuts.append(nxt_t)
        out.append(cur)
        t = nxt_t
    return PAFunction(lo, hi, tuple(cuts), tuple(out))


class _WholePieceFixed:
    __slots__ = ()

    def __repr__(self):
        return "WHOLE_PIECE_FIXED"


WHOLE_PIECE_FIXED = _WholePieceFixed()


def solve_fixed(num: AffineForm, den: AffineForm, interval):
    """All t in the closed interval with t = num(t)/den(t).

    Returns a sorted list of exact roots, or WHOLE_PIECE_FIXED when the
    ratio is the identity on the piece.
    """
    lo, hi = as_scalar(interval[0]), as_scalar(interval[1])
    # t*(a2 + b2 t) - (a1 + b1 t) = b2 t^2 + (a2 - b1) t - a1
    A, B, C = den.b, den.a - num.b, -num.a
    if quad_field((A, B, C)) is not None:
        raise ValueError("solve_fixed needs rational coefficients")
    A, B, C = Fraction(A), Fraction(B), Fraction(C)
    if A == 0 and B == 0:
        if C == 0:
            return WHOLE_PIECE_FIXED
        return []
    if A == 0:
        roots = [-C / B]
    else:
        disc = B * B - 4 * A * C
        if disc < 0:
            roots = []
        elif disc == 0:
            roots = [-B / (2 * A)]
        else:
            s = sqrt_rational(disc)
            roots = [(-B - s) / (2 * A), (-B + s) / (2 * A)]
    inside = []
    for r in roots:
        if lo <= r <= hi and den(r) != 0 and r not in inside:
            inside.append(r)
    return _exact_sorted(inside)


@dataclass(frozen=True)
class QuadraticInt:
    """A root value >= 1 of c^2 = a*c + b, the larger one."""

    a: int
    b: int
    value: Scalar

    def __post_init__(self):
        if self.value * self.value - self.a * self.value - self.b != 0:
            raise ValueError("value does not satisfy c^2 = a c + b")

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "value": scalar_to_json(self.value),
                "value_approx": approx(self.value)}


def largest_root(a: int, b: int) -> Scalar | None:
    disc = Fraction(a * a + 4 * b)
    if disc < 0:
        return None
    return (a + sqrt_rational(disc)) / 2


def quad_from_lattice(M: Sequence[Sequence[int]]) -> QuadraticInt:
    """Expansion factor of an integer 2x2 matrix: c^2 = trace*c - det."""
    (m00, m01), (m10, m11) = M
    a = int(m00 + m11)
    b = -int(m00 * m11 - m01 * m10)
    value = largest_root(a, b)
    if value is None or value < 1:
        raise ValueError("not an expansion factor")
    return QuadraticInt(a, b, value)


def rational_int(c) -> QuadraticInt:
    """The degenerate certificate (a, b) = (c, 0) for an integer c >= 1."""
    c = Fraction(c)
    if c.denominator != 1 or c < 1:
        raise ValueError("not an expansion factor")
    return QuadraticInt(int(c), 0, c)
