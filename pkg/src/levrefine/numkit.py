"""Exact scalar and polynomial kernel.

Everything here works over :class:`fractions.Fraction`.  Real roots are
never stored as floats; they are kept as :class:`RootBracket` objects with
rational endpoints that can be shrunk on demand by Sturm-certified
bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Sequence

import mpmath

Rational = Fraction

DEFAULT_PRECISION = 256


def as_rational(x) -> Fraction:
    """Coerce ints, strings like ``"-3/11"`` and Fractions to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact inputs")
    return Fraction(x)


def format_rational(x: Fraction) -> str:
    x = as_rational(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def sign(x) -> int:
    return (x > 0) - (x < 0)


# ---------------------------------------------------------------------------
# Dense univariate polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=True)
class DensePoly:
    """Polynomial in ``t`` with exact coefficients, lowest power first."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def constant(cls, c) -> DensePoly:
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c=1) -> DensePoly:
        return cls([0] * k + [c])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> DensePoly:
        p = cls([lead])
        for r in roots:
            p = p * cls([-as_rational(r), 1])
        return p

    @property
    def degree(self) -> int:
        """Degree, with ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x) -> Fraction:
        return poly_eval(self, x)

    def __add__(self, other) -> DensePoly:
        other = _lift(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return DensePoly([x + y for x, y in zip(a, b)] + list(a[len(b):]))

    __radd__ = __add__

    def __neg__(self) -> DensePoly:
        return DensePoly([-c for c in self.coeffs])

    def __sub__(self, other) -> DensePoly:
        return self + (-_lift(other))

    def __rsub__(self, other) -> DensePoly:
        return _lift(other) - self

    def __mul__(self, other) -> DensePoly:
        other = _lift(other)
        if self.is_zero() or other.is_zero():
            return DensePoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return DensePoly(out)

    __rmul__ = __mul__

    def __truediv__(self, c) -> DensePoly:
        c = as_rational(c)
        return DensePoly([x / c for x in self.coeffs])

    def __divmod__(self, other) -> tuple[DensePoly, DensePoly]:
        return poly_divmod(self, _lift(other))

    def __floordiv__(self, other) -> DensePoly:
        return poly_divmod(self, _lift(other))[0]

    def __mod__(self, other) -> DensePoly:
        return poly_divmod(self, _lift(other))[1]

    def __pow__(self, k: int) -> DensePoly:
        out = DensePoly([1])
        for _ in range(k):
            out = out * self
        return out

    def derivative(self) -> DensePoly:
        return DensePoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def monic(self) -> DensePoly:
        return self / self.lead

    def compose_linear(self, a, b) -> DensePoly:
        """Return ``p(a*x + b)`` as a polynomial in ``x``."""
        lin = DensePoly([b, a])
        out = DensePoly()
        for c in reversed(self.coeffs):
            out = out * lin + c
        return out

    def __repr__(self) -> str:
        if self.is_zero():
            return "DensePoly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{format_rational(c)}*t^{i}" if i else format_rational(c))
        return "DensePoly(" + " + ".join(terms) + ")"


def _lift(x) -> DensePoly:
    return x if isinstance(x, DensePoly) else DensePoly([x])


def poly_eval(p: DensePoly, x) -> Fraction:
    """Horner evaluation; exact for rational ``x``."""
    x = as_rational(x)
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def poly_divmod(a: DensePoly, b: DensePoly) -> tuple[DensePoly, DensePoly]:
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a.coeffs)
    db = b.degree
    if len(rem) - 1 < db:
        return DensePoly(), a
    quo = [Fraction(0)] * (len(rem) - db)
    inv = 1 / b.lead
    for k in range(len(rem) - 1, db - 1, -1):
        c = rem[k] * inv
        quo[k - db] = c
        if c:
            for i, bc in enumerate(b.coeffs):
                rem[k - db + i] -= c * bc
    return DensePoly(quo), DensePoly(rem[:db])


def poly_arith(a: DensePoly, b: DensePoly, op: str):
    """Dispatch ``add``, ``sub``, ``mul`` or ``divmod`` on two polynomials."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "divmod":
        return poly_divmod(a, b)
    raise ValueError(f"unknown polynomial operation {op!r}")


def poly_gcd(a: DensePoly, b: DensePoly) -> DensePoly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def squarefree_part(p: DensePoly) -> DensePoly:
    if p.degree <= 1:
        return p
    g = poly_gcd(p, p.derivative())
    return p if g.degree == 0 else p // g


def integer_grid_poly(p: DensePoly, n: int) -> list[int]:
    """Integer coefficients of ``c * n^deg * p((2x - n)/n)`` in ``x``, ``c > 0``.

    Sign and zero pattern at integer ``x`` equal those of ``p`` at the grid
    node ``t_x = -1 + 2x/n``; evaluation then needs integer arithmetic only.
    """
    if p.is_zero():
        return []
    deg = p.degree
    lcm = reduce(math.lcm, (c.denominator for c in p.coeffs), 1)
    ints = [int(c * lcm) for c in p.coeffs]
    # sum_i a_i (2x - n)^i n^(deg - i), built by Horner in x
    out = [0]
    for i in range(deg, -1, -1):
        # out <- out * (2x - n) + a_i * n^(deg - i)
        nxt = [0] * (len(out) + 1)
        for k, c in enumerate(out):
            nxt[k + 1] += 2 * c
            nxt[k] -= n * c
        nxt[0] += ints[i] * n ** (deg - i)
        out = nxt
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def int_poly_eval(coeffs: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def grid_signs(p: DensePoly, n: int, indices: Iterable[int]) -> list[int]:
    """Signs of ``p`` at the grid nodes ``t_i = -1 + 2i/n`` for the given ``i``."""
    ip = integer_grid_poly(p, n)
    return [sign(int_poly_eval(ip, i)) for i in indices]


# ---------------------------------------------------------------------------
# Exact linear algebra
# ---------------------------------------------------------------------------


class SingularSystemError(ArithmeticError):
    pass


def solve_exact(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals for a square system."""
    size = len(matrix)
    aug = [[as_rational(v) for v in row] + [as_rational(b)] for row, b in zip(matrix, rhs)]
    if any(len(row) != size + 1 for row in aug):
        raise ValueError("system must be square")
    for col in range(size):
        piv = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if piv is None:
            raise SingularSystemError("singular linear system")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]


# ---------------------------------------------------------------------------
# Sturm sequences and certified root brackets
# ---------------------------------------------------------------------------


def sturm_sequence(p: DensePoly) -> list[DensePoly]:
    """Sturm chain of the squarefree part of ``p``.

    Remainders are rescaled by positive constants to keep coefficients
    small; positive scaling does not change sign variations.
    """
    p = squarefree_part(p)
    if p.degree <= 0:
        return [p]
    chain = [p, p.derivative()]
    while chain[-1].degree > 0:
        r = -(chain[-2] % chain[-1])
        if r.is_zero():
            break
        chain.append(r / abs(r.lead))
    return chain


def sign_variations(values: Iterable) -> int:
    count, prev = 0, 0
    for v in values:
        s = sign(v)
        if s == 0:
            continue
        if prev and s != prev:
            count += 1
        prev = s
    return count


def _variations_at(chain: Sequence[DensePoly], x) -> int:
    return sign_variations(poly_eval(c, x) for c in chain)


def sturm_count(p: DensePoly, lo, hi) -> int:
    """Number of distinct real roots of ``p`` in ``(lo, hi]``."""
    lo, hi = as_rational(lo), as_rational(hi)
    if not lo < hi:
        raise ValueError("sturm_count needs lo < hi")
    if p.is_zero():
        raise ValueError("zero polynomial has infinitely many roots")
    chain = sturm_sequence(p)
    return _count_with_chain(chain, lo, hi)


def _count_with_chain(chain: Sequence[DensePoly], lo: Fraction, hi: Fraction) -> int:
    # V(lo) - V(hi) counts roots in (lo, hi] even when lo or hi is a root.
    return _variations_at(chain, lo) - _variations_at(chain, hi)


def cauchy_bound(p: DensePoly) -> Fraction:
    """All real roots of ``p`` lie in ``[-B, B]``."""
    if p.degree < 1:
        return Fraction(1)
    lead = abs(p.lead)
    return 1 + max(abs(c) / lead for c in p.coeffs[:-1])


@dataclass(frozen=True)
class RootBracket:
    """Interval ``(lo, hi]`` holding ``count`` roots; ``lo == hi`` marks an exact root."""

    lo: Fraction
    hi: Fraction
    count: int = 1

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("RootBracket needs lo <= hi")

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.mid)

    def contains(self, x) -> bool:
        x = as_rational(x)
        return x == self.lo if self.exact else self.lo < x <= self.hi


class NoRootError(ValueError):
    pass


def bisect_bracket(p: DensePoly, bracket: RootBracket, width=None) -> Iterator[RootBracket]:
    """Yield nested brackets of halving width around a single root.

    Stops once the width is at most ``width`` (if given) or an exact
    rational root is hit.
    """
    if bracket.count != 1:
        raise ValueError("bisection needs a bracket isolating exactly one root")
    chain = sturm_sequence(p)
    width = None if width is None else as_rational(width)
    cur = bracket
    while not cur.exact and (width is None or cur.width > width):
        mid = cur.mid
        if poly_eval(chain[0], mid) == 0:
            cur = RootBracket(mid, mid)
        elif _count_with_chain(chain, cur.lo, mid) == 1:
            cur = RootBracket(cur.lo, mid)
        else:
            cur = RootBracket(mid, cur.hi)
        yield cur


def refine_bracket(p: DensePoly, bracket: RootBracket, width) -> RootBracket:
    out = bracket
    for out in bisect_bracket(p, bracket, width):
        pass
    return out


def greatest_root(p: DensePoly, hint_hi=None, width=None) -> RootBracket:
    """Bracket isolating the largest real root of ``p`` not exceeding ``hint_hi``."""
    if p.degree < 1:
        raise NoRootError("constant polynomial has no roots")
    chain = sturm_sequence(p)
    bound = cauchy_bound(chain[0])
    hi = bound if hint_hi is None else min(as_rational(hint_hi), bound)
    lo = -bound - 1
    if hi <= lo or _count_with_chain(chain, lo, hi) == 0:
        raise NoRootError("no real root below the hint")
    if chain[0].degree == 1:
        r = -chain[0].coeffs[0] / chain[0].coeffs[1]
        return RootBracket(r, r)
    # shrink from below while keeping at least one root above lo
    while _count_with_chain(chain, lo, hi) > 1:
        mid = (lo + hi) / 2
        if _count_with_chain(chain, mid, hi) >= 1:
            lo = mid
        else:
            hi = mid
    if poly_eval(chain[0], hi) == 0:
        return RootBracket(hi, hi)
    br = RootBracket(lo, hi)
    return br if width is None else refine_bracket(chain[0], br, width)


def isolate_roots(p: DensePoly, lo, hi) -> list[RootBracket]:
    """Isolating brackets for all distinct roots in ``(lo, hi]``, increasing."""
    chain = sturm_sequence(p)
    lo, hi = as_rational(lo), as_rational(hi)
    out: list[RootBracket] = []
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        c = _count_with_chain(chain, a, b)
        if c == 0:
            continue
        if c == 1:
            out.append(RootBracket(b, b) if poly_eval(chain[0], b) == 0 else RootBracket(a, b))
            continue
        mid = (a + b) / 2
        stack.extend([(mid, b), (a, mid)])
    return sorted(out, key=lambda br: br.lo)


@dataclass(frozen=True)
class GridCell:
    """Location of a root relative to grid nodes ``t_0 < ... < t_n``.

    ``exact`` means the root equals ``t_j``; otherwise it lies strictly in
    ``(t_{j-1}, t_j)``.
    """

    j: int
    exact: bool = False


def locate_in_grid(p: DensePoly, bracket: RootBracket, nodes: Sequence[Fraction]) -> GridCell:
    """Find the grid cell holding the single root isolated by ``bracket``."""
    if bracket.count != 1:
        raise ValueError("bracket must isolate exactly one root")
    if bracket.lo < nodes[0] or bracket.hi > nodes[-1]:
        raise ValueError("bracket must lie inside the grid range")
    if bracket.exact:
        r = bracket.lo
        for j, t in enumerate(nodes):
            if t == r:
                return GridCell(j, exact=True)
            if t > r:
                return GridCell(j)
        raise AssertionError("unreachable: root inside grid range")
    chain = sturm_sequence(p)
    # nodes inside (lo, hi]
    inner = [j for j, t in enumerate(nodes) if bracket.lo < t <= bracket.hi]
    for j in inner:
        if poly_eval(chain[0], nodes[j]) == 0:
            return GridCell(j, exact=True)
    lo = bracket.lo
    for j in inner:
        if _count_with_chain(chain, lo, nodes[j]) == 1:
            return GridCell(j)
        lo = nodes[j]
    # root lies in (last inner node, hi], below the next node
    return GridCell(next(j for j, t in enumerate(nodes) if t > bracket.hi))


# ---------------------------------------------------------------------------
# High precision floating evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BigFloat:
    """A multiprecision value tagged with the precision it was computed at."""

    value: mpmath.mpf
    precision_bits: int = DEFAULT_PRECISION

    def __float__(self) -> float:
        return float(self.value)


def to_bigfloat(x, precision_bits: int = DEFAULT_PRECISION) -> BigFloat:
    with mpmath.workprec(precision_bits):
        x = as_rational(x) if not isinstance(x, mpmath.mpf) else x
        v = mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else +x
    return BigFloat(v, precision_bits)


def poly_eval_bigfloat(p: DensePoly, x, precision_bits: int = DEFAULT_PRECISION) -> BigFloat:
    with mpmath.workprec(precision_bits):
        xv = to_bigfloat(x, precision_bits).value
        acc = mpmath.mpf(0)
        for c in reversed(p.coeffs):
            acc = acc * xv + mpmath.mpf(c.numerator) / c.denominator
    return BigFloat(acc, precision_bits)


def enclosure(x: Fraction, precision_bits: int = DEFAULT_PRECISION):
    """Interval (``mpmath.iv.mpf``) guaranteed to contain the rational ``x``."""
    iv = mpmath.iv
    old = iv.prec
    iv.prec = precision_bits
    try:
        return iv.mpf(x.numerator) / iv.mpf(x.denominator)
    finally:
        iv.prec = old


def interval_sign(v) -> int | None:
    """Sign of an ``iv.mpf`` interval, or ``None`` if it straddles zero."""
    if v.a > 0:
        return 1
    if v.b < 0:
        return -1
    if v.a == 0 and v.b == 0:
        return 0
    return None


def log2_rational(x: Fraction) -> float:
    """``log2`` of a positive rational, safe for huge numerators."""
    x = as_rational(x)
    if x <= 0:
        raise ValueError("log2 of a non-positive number")
    return math.log2(x.numerator) - math.log2(x.denominator)
