"""Krawtchouk polynomials, the inner-product grid and Krawtchouk expansions.

Conventions: a Hamming space ``H(n, q)`` has inner products
``t = 1 - 2d/n`` for distances ``d = 0..n``; the grid node with index ``i``
is ``t_i = -1 + 2i/n`` and corresponds to distance ``n - i``.
Polynomials are always stored in the ``t`` variable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb
from typing import Sequence

import mpmath

from .numkit import DensePoly, as_rational, enclosure

KINDS = ((0, 0), (1, 0), (1, 1), (0, 1))


@dataclass(frozen=True)
class Space:
    n: int
    q: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.q) != self.q:
            raise TypeError("n and q must be integers")
        if self.n < 2 or self.q < 2:
            raise ValueError(f"need n >= 2 and q >= 2, got n={self.n}, q={self.q}")

    def t_of_d(self, d) -> Fraction:
        return 1 - 2 * as_rational(d) / self.n

    def d_of_t(self, t) -> Fraction:
        return self.n * (1 - as_rational(t)) / 2

    def r(self, i: int) -> int:
        """Value ``K_i(0) = (q-1)^i C(n, i)``."""
        return (self.q - 1) ** i * comb(self.n, i)

    @cached_property
    def grid(self) -> Grid:
        return Grid(self)

    @cached_property
    def table(self) -> KrawtchoukTable:
        return KrawtchoukTable(self)


class Grid:
    """The ``n + 1`` attainable inner products ``t_i = -1 + 2i/n``."""

    def __init__(self, space: Space):
        self.space = space
        n = space.n
        self.nodes: tuple[Fraction, ...] = tuple(Fraction(2 * i, n) - 1 for i in range(n + 1))

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, i: int) -> Fraction:
        return self.nodes[i]

    def index_of(self, t) -> int | None:
        """Grid index of ``t`` or ``None`` when ``t`` is not a node."""
        x = (as_rational(t) + 1) * self.space.n / 2
        if x.denominator != 1 or not 0 <= x <= self.space.n:
            return None
        return int(x)

    def t_of_d(self, d: int) -> Fraction:
        return self.nodes[self.space.n - d]

    def d_of_t(self, t) -> int:
        i = self.index_of(t)
        if i is None:
            raise ValueError(f"{t} is not a grid node for n={self.space.n}")
        return self.space.n - i


# ---------------------------------------------------------------------------
# Scalar values by the three-term recurrence
# ---------------------------------------------------------------------------


def kraw_values(N: int, q: int, x, upto: int) -> list:
    """``[K_0^{(N,q)}(x), ..., K_upto^{(N,q)}(x)]`` by the three-term recurrence.

    Integer ``x`` keeps the computation in integers (the values are integral).
    """
    integral = isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)
    if integral:
        x = int(x)
    else:
        x = as_rational(x)
    out = [1]
    if upto >= 1:
        out.append(N * (q - 1) - q * x)
    for i in range(1, upto):
        num = (i + (q - 1) * (N - i) - q * x) * out[i] - (q - 1) * (N - i + 1) * out[i - 1]
        if integral:
            val, rem = divmod(num, i + 1)
            assert rem == 0, "Krawtchouk value at an integer must be integral"
            out.append(val)
        else:
            out.append(num / (i + 1))
    return out


class KrawtchoukTable:
    """Cache of ``K_i^{(n,q)}(d)`` columns keyed by ``d``.

    Columns are extended lazily; population is guarded by a lock so one
    table can be shared between threads.
    """

    def __init__(self, space: Space):
        self.space = space
        self._cols: dict = {}
        self._lock = threading.Lock()

    def column(self, d, upto: int) -> list:
        key = as_rational(d)
        col = self._cols.get(key)
        if col is None or len(col) <= upto:
            with self._lock:
                col = self._cols.get(key)
                if col is None or len(col) <= upto:
                    x = int(key) if key.denominator == 1 else key
                    col = kraw_values(self.space.n, self.space.q, x, max(upto, self.space.n))
                    self._cols[key] = col
        return col

    def k(self, i: int, d) -> Fraction:
        if i < 0:
            raise ValueError("degree must be non-negative")
        return Fraction(self.column(d, i)[i])

    def r(self, i: int) -> int:
        return self.space.r(i)


def k_eval(table: KrawtchoukTable, i: int, d) -> Fraction:
    return table.k(i, d)


def q_eval(table: KrawtchoukTable, i: int, t) -> Fraction:
    """Normalized ``Q_i(t) = K_i(d) / r_i`` with ``d = n(1 - t)/2``."""
    space = table.space
    if not 0 <= i <= space.n:
        raise ValueError(f"Q_i is defined only for 0 <= i <= n, got i={i}")
    return table.k(i, space.d_of_t(t)) / space.r(i)


# ---------------------------------------------------------------------------
# Adjacent systems
# ---------------------------------------------------------------------------


def _kind_params(space: Space, kind: tuple[int, int]) -> tuple[int, int]:
    """Length of the underlying Krawtchouk system and the shift of ``d``."""
    n = space.n
    if kind == (0, 0):
        return n, 0
    if kind == (1, 0):
        return n - 1, -1
    if kind == (1, 1):
        return n - 2, -1
    if kind == (0, 1):
        return n - 1, 0
    raise ValueError(f"unknown adjacent kind {kind!r}")


def adjacent_norm(space: Space, kind: tuple[int, int], i: int) -> int:
    n, q = space.n, space.q
    if kind == (0, 0):
        return space.r(i)
    if kind == (1, 0):
        return sum(comb(n, j) * (q - 1) ** j for j in range(i + 1))
    if kind == (1, 1):
        return sum(comb(n - 1, j) * (q - 1) ** j for j in range(i + 1))
    if kind == (0, 1):
        norm = comb(n - 1, i) * (q - 1) ** i
        if norm == 0:
            raise ValueError(f"Q^(0,1)_{i} undefined for n={n}")
        return norm
    raise ValueError(f"unknown adjacent kind {kind!r}")


def adjacent_values(space: Space, kind: tuple[int, int], t, upto: int) -> list:
    """Unnormalized family values ``K_i^{(N)}(d + shift)`` for ``i <= upto``."""
    N, shift = _kind_params(space, kind)
    return kraw_values(N, space.q, space.d_of_t(t) + shift, upto)


def adjacent_eval(space: Space, kind: tuple[int, int], i: int, t) -> Fraction:
    """Normalized adjacent polynomial ``Q_i^{(a,b,n,q)}(t)``; kind ``(0,0)`` is plain ``Q_i``."""
    if i < 0:
        raise ValueError("degree must be non-negative")
    return Fraction(adjacent_values(space, kind, t, i)[i]) / adjacent_norm(space, kind, i)


_FAMILIES: dict[tuple[int, int, int, int], list[DensePoly]] = {}
_FAMILIES_LOCK = threading.Lock()


def _family_polys(N: int, q: int, n: int, shift: int, upto: int) -> list[DensePoly]:
    """``K_i^{(N,q)}(n(1-t)/2 + shift)`` in ``t`` for ``i <= upto``, cached per family."""
    key = (N, q, n, shift)
    fam = _FAMILIES.get(key)
    if fam is not None and len(fam) > upto:
        return fam
    with _FAMILIES_LOCK:
        fam = _FAMILIES.setdefault(key, [])
        # argument of the Krawtchouk polynomial as a linear polynomial in t
        x = DensePoly([Fraction(n, 2) + shift, Fraction(-n, 2)])
        if not fam:
            fam.append(DensePoly([1]))
        if len(fam) == 1 and upto >= 1:
            fam.append(N * (q - 1) - q * x)
        while len(fam) <= upto:
            i = len(fam) - 1
            nxt = (i + (q - 1) * (N - i) - q * x) * fam[i] - (q - 1) * (N - i + 1) * fam[i - 1]
            fam.append(nxt / (i + 1))
        return fam


def adjacent_poly(space: Space, kind: tuple[int, int], i: int, normalized: bool = True) -> DensePoly:
    N, shift = _kind_params(space, kind)
    p = _family_polys(N, space.q, space.n, shift, i)[i]
    return p / adjacent_norm(space, kind, i) if normalized else p


def krawtchouk_poly(space: Space, i: int) -> DensePoly:
    """``K_i^{(n,q)}(n(1-t)/2)`` as a polynomial in ``t``."""
    return adjacent_poly(space, (0, 0), i, normalized=False)


def q_poly(space: Space, i: int) -> DensePoly:
    if not 0 <= i <= space.n:
        raise ValueError(f"Q_i is defined only for 0 <= i <= n, got i={i}")
    return adjacent_poly(space, (0, 0), i)


# ---------------------------------------------------------------------------
# Expansions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expansion:
    """Coefficients ``f_0..f_m`` of ``f = sum f_i Q_i``."""

    coeffs: tuple[Fraction, ...]

    def __getitem__(self, i):
        return self.coeffs[i]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, space: Space, t) -> Fraction:
        table = space.table
        return sum((c * q_eval(table, i, t) for i, c in enumerate(self.coeffs)), Fraction(0))

    def negative_indices(self, start: int = 1) -> list[int]:
        return [i for i, c in enumerate(self.coeffs) if i >= start and c < 0]


class DegreeTooHighError(ValueError):
    pass


def expand(space: Space, p: DensePoly, method: str = "triangular") -> Expansion:
    """Exact Krawtchouk coefficients of ``p``.

    ``triangular`` peels off leading terms by descending degree;
    ``orthogonality`` uses ``f_i = q^-n sum_z C(n,z)(q-1)^z p(t_z) K_i(z)``.
    """
    if p.degree > space.n:
        raise DegreeTooHighError(f"degree {p.degree} exceeds n={space.n}; reduce mod the grid first")
    if p.is_zero():
        return Expansion((Fraction(0),))
    if method == "triangular":
        return _expand_triangular(space, p)
    if method == "orthogonality":
        return _expand_orthogonality(space, p)
    raise ValueError(f"unknown expansion method {method!r}")


def _expand_triangular(space: Space, p: DensePoly) -> Expansion:
    m = p.degree
    rem = list(p.coeffs)
    out = [Fraction(0)] * (m + 1)
    for i in range(m, -1, -1):
        qi = q_poly(space, i)
        c = rem[i] / qi.lead
        out[i] = c
        if c:
            for k, a in enumerate(qi.coeffs):
                rem[k] -= c * a
    return Expansion(tuple(out))


def _expand_orthogonality(space: Space, p: DensePoly) -> Expansion:
    n, q = space.n, space.q
    m = p.degree
    sums = [Fraction(0)] * (m + 1)
    for z in range(n + 1):
        w = comb(n, z) * (q - 1) ** z * p(space.t_of_d(z))
        if w:
            col = space.table.column(z, m)
            for i in range(m + 1):
                sums[i] += w * col[i]
    qn = q**n
    return Expansion(tuple(s / qn for s in sums))


def expand_enclosure(space: Space, p: DensePoly, precision_bits: int) -> list:
    """Interval enclosures (``mpmath.iv``) of the Krawtchouk coefficients.

    Same triangular elimination as :func:`expand`, carried out in interval
    arithmetic so signs can be certified without exact rationals.
    """
    if p.degree > space.n:
        raise DegreeTooHighError(f"degree {p.degree} exceeds n={space.n}")
    iv = mpmath.iv
    old = iv.prec
    iv.prec = precision_bits
    try:
        rem = [enclosure(c, precision_bits) for c in p.coeffs]
        out = [None] * (p.degree + 1)
        for i in range(p.degree, -1, -1):
            qi = q_poly(space, i)
            qc = [enclosure(c, precision_bits) for c in qi.coeffs]
            c = rem[i] / qc[-1]
            out[i] = c
            for k, a in enumerate(qc):
                rem[k] = rem[k] - c * a
        return out
    finally:
        iv.prec = old


@lru_cache(maxsize=64)
def grid_annihilator(n: int) -> DensePoly:
    """``prod_{i=0}^{n} (t - t_i)``."""
    return DensePoly.from_roots(Fraction(2 * i, n) - 1 for i in range(n + 1))


def reduce_mod_grid(space: Space, p: DensePoly) -> DensePoly:
    """Remainder of ``p`` modulo the grid annihilator; same values on every node."""
    if p.degree <= space.n:
        return p
    return p % grid_annihilator(space.n)


def reconstruct_on_grid(space: Space, expansion: Expansion) -> list[Fraction]:
    """Values ``sum f_i Q_i(t_z)`` at every node, ordered by grid index."""
    return [expansion.evaluate(space, t) for t in space.grid.nodes]


def weights(space: Space) -> Sequence[int]:
    """Distance-class sizes ``C(n, z)(q-1)^z`` for ``z = 0..n``."""
    return [space.r(z) for z in range(space.n + 1)]
