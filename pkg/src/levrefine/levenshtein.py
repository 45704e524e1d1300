"""Levenshtein intervals, bounds and polynomial roots.

For ``m = 2k - 1 + eps`` the interval ``I_m`` runs from the greatest zero
of the adjacent polynomial of kind ``(1, 1 - eps)`` and degree
``k - 1 + eps`` up to the greatest zero of kind ``(1, eps)`` and degree
``k``.  All comparisons with these irrational endpoints are certified by
exact sign-variation counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

from .krawtchouk import Space, adjacent_eval, adjacent_poly, adjacent_values
from .numkit import (
    DensePoly,
    GridCell,
    RootBracket,
    as_rational,
    grid_signs,
    isolate_roots,
    locate_in_grid,
    poly_eval,
    sign,
    sign_variations,
)

ENDPOINT_WIDTH = Fraction(1, 2**40)


class BoundaryError(ArithmeticError):
    """Raised when ``s`` sits on a pole of the Levenshtein formula."""


class RootAnomalyError(ArithmeticError):
    """Root structure differs from the one the theory predicts."""


# ---------------------------------------------------------------------------
# Interval endpoints
# ---------------------------------------------------------------------------


def zeros_above(space: Space, a: int, k: int, x) -> int:
    """Number of zeros of the adjacent polynomial ``Q_k^{(1,a)}`` greater than ``x``.

    The family ``Q_0^{(1,a)}, ..., Q_k^{(1,a)}`` obeys a three-term
    recurrence with positive leading coefficients in ``t``, so it is a
    Sturm chain and the sign variations at ``x`` count the zeros above.
    """
    return sign_variations(adjacent_values(space, (1, a), x, k))


def _degree_of_endpoint(m: int) -> tuple[int, int]:
    """``(k, eps)`` with ``m = 2k - 1 + eps``."""
    eps = (m + 1) % 2
    return (m + 1 - eps) // 2, eps


@lru_cache(maxsize=4096)
def _endpoint_bracket(n: int, q: int, a: int, k: int, width: Fraction) -> RootBracket:
    space = Space(n, q)
    lo, hi = Fraction(-3), Fraction(3)
    if zeros_above(space, a, k, hi) != 0 or zeros_above(space, a, k, lo) != k:
        raise RootAnomalyError(f"adjacent polynomial ({a}, k={k}) has roots outside [-3, 3]")
    # invariant: at least one zero in (lo, hi], none above hi
    while zeros_above(space, a, k, lo) > 1:
        mid = (lo + hi) / 2
        if zeros_above(space, a, k, mid) >= 1:
            lo = mid
        else:
            hi = mid
    while hi - lo > width:
        mid = (lo + hi) / 2
        vals = adjacent_values(space, (1, a), mid, k)
        if vals[k] == 0:
            return RootBracket(mid, mid)
        if sign_variations(vals) >= 1:
            lo = mid
        else:
            hi = mid
    if adjacent_values(space, (1, a), hi, k)[k] == 0:
        return RootBracket(hi, hi)
    return RootBracket(lo, hi)


def endpoint_bracket(space: Space, m: int, width=ENDPOINT_WIDTH) -> RootBracket:
    """Bracket for the right end of ``I_m`` (``m = 0`` gives the left end ``-1``)."""
    if m == 0:
        return RootBracket(Fraction(-1), Fraction(-1))
    if m == 2 * space.n - 1:
        return RootBracket(Fraction(1), Fraction(1))
    if not 0 < m < 2 * space.n - 1:
        raise ValueError(f"m must lie in [0, {2 * space.n - 1}]")
    k, eps = _degree_of_endpoint(m)
    return _endpoint_bracket(space.n, space.q, eps, k, as_rational(width))


def below_endpoint(space: Space, m: int, s) -> bool:
    """Certified test ``s < (right end of I_m)``."""
    if m == 2 * space.n - 1:
        return s < 1
    k, eps = _degree_of_endpoint(m)
    return zeros_above(space, eps, k, s) >= 1


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    """Levenshtein regime of ``s``: ``s`` lies in ``I_m`` with ``m = 2k - 1 + eps``."""

    m: int
    k: int
    eps: int
    lower: RootBracket
    upper: RootBracket
    on_grid: bool = True


def classify(space: Space, s, *, allow_offgrid: bool = True) -> Frame:
    """Locate ``s`` in the partition ``{I_m}`` of ``[-1, 1)``.

    Walks ``m`` upward; each step is one exact sign-variation count.
    """
    s = as_rational(s)
    if not -1 <= s < 1:
        raise ValueError(f"s={s} outside [-1, 1)")
    on_grid = space.grid.index_of(s) is not None
    if not on_grid and not allow_offgrid:
        raise ValueError(f"s={s} is not an inner product of H({space.n},{space.q})")
    m = 1
    while not below_endpoint(space, m, s):
        m += 1
    k, eps = _degree_of_endpoint(m)
    return Frame(
        m=m,
        k=k,
        eps=eps,
        lower=endpoint_bracket(space, m - 1),
        upper=endpoint_bracket(space, m),
        on_grid=on_grid,
    )


def frame_for(space: Space, m: int) -> Frame:
    """Frame for a given ``m`` regardless of where ``s`` lies."""
    k, eps = _degree_of_endpoint(m)
    return Frame(m=m, k=k, eps=eps, lower=endpoint_bracket(space, m - 1),
                 upper=endpoint_bracket(space, m))


def on_left_end(space: Space, frame: Frame, s) -> bool:
    """True when ``s`` equals the left end of ``I_m`` exactly.

    There ``s`` is also the closed right end of ``I_{m-1}``, so the
    degree ``m - 1`` construction applies as well.
    """
    if frame.m < 2:
        return False
    k, eps = _degree_of_endpoint(frame.m - 1)
    s = as_rational(s)
    return adjacent_eval(space, (1, eps), k, s) == 0 and zeros_above(space, eps, k, s) == 0


def distances_in_regime(space: Space, ms) -> list[int]:
    """Distances ``d`` whose ``s = 1 - 2d/n`` lies in ``I_m`` for some ``m`` in ``ms``.

    ``m`` never decreases as ``s`` grows, so the scan runs from ``d = n``
    down and stops once ``m`` passes ``max(ms)``.
    """
    ms = set(ms)
    top = max(ms)
    out = []
    m = 1
    for d in range(space.n, 0, -1):
        s = space.t_of_d(d)
        while not below_endpoint(space, m, s):
            m += 1
        if m > top:
            break
        if m in ms:
            out.append(d)
    return sorted(out)


# ---------------------------------------------------------------------------
# The bound
# ---------------------------------------------------------------------------


def lev_bound(frame: Frame, space: Space, s) -> Fraction:
    """Levenshtein bound ``L_m(n, s; q)`` for ``s`` in ``I_m``.

    ``L = q^eps (1 - Q_{k-1}^{(1,eps)}(s) / Q_k^{(0,eps)}(s)) sum_{j<k} C(n-eps, j)(q-1)^j``.
    """
    s = as_rational(s)
    n, q = space.n, space.q
    k, eps = frame.k, frame.eps
    denom = adjacent_eval(space, (0, eps), k, s)
    if denom == 0:
        raise BoundaryError(f"Q_{k}^(0,{eps}) vanishes at s={s}")
    ratio = adjacent_eval(space, (1, eps), k - 1, s) / denom
    total = sum(comb(n - eps, j) * (q - 1) ** j for j in range(k))
    return q**eps * (1 - ratio) * total


def levenshtein_polynomial_roots_poly(space: Space, frame: Frame, s) -> DensePoly:
    """``P_k(t)P_{k-1}(s) - P_k(s)P_{k-1}(t)`` divided by ``(t - s)``; ``P = Q^{(1,eps)}``.

    Unnormalized family members are used; scaling does not move roots.
    """
    s = as_rational(s)
    kind = (1, frame.eps)
    pk = adjacent_poly(space, kind, frame.k, normalized=False)
    pk1 = adjacent_poly(space, kind, frame.k - 1, normalized=False)
    full = pk * poly_eval(pk1, s) - pk1 * poly_eval(pk, s)
    quo, rem = divmod(full, DensePoly([-s, 1]))
    if not rem.is_zero():
        raise RootAnomalyError("s is not a root of the Levenshtein root equation")
    return quo


# ---------------------------------------------------------------------------
# Roots
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootDescriptor:
    """One root ``alpha_i``: exact value or bracket, plus its grid cell."""

    bracket: RootBracket
    cell: GridCell
    multiplicity: int

    @property
    def exact(self) -> bool:
        return self.bracket.exact

    @property
    def value(self) -> Fraction | None:
        return self.bracket.lo if self.bracket.exact else None

    def __float__(self) -> float:
        return float(self.bracket)


@dataclass(frozen=True)
class RootProfile:
    """Roots ``alpha_0 < ... < alpha_{k-1+eps} = s`` of the Levenshtein polynomial."""

    alphas: tuple[RootDescriptor, ...]
    eps: int
    k: int

    @property
    def interior(self) -> tuple[RootDescriptor, ...]:
        """The double roots, i.e. everything except ``-1`` (when ``eps = 1``) and ``s``."""
        return self.alphas[self.eps : len(self.alphas) - 1]


def j_of_d(space: Space, d) -> int | Fraction:
    """Parameter ``j`` with ``d = n - 1 - (n - 2 + j)/q``."""
    j = space.q * (space.n - 1 - as_rational(d)) - (space.n - 2)
    return int(j) if j.denominator == 1 else j


def _exact_root(space: Space, r: Fraction, multiplicity: int) -> RootDescriptor:
    return RootDescriptor(RootBracket(r, r), _cell_of_rational(space, r), multiplicity)


def _cell_of_rational(space: Space, r: Fraction) -> GridCell:
    nodes = space.grid.nodes
    i = space.grid.index_of(r)
    if i is not None:
        return GridCell(i, exact=True)
    # first node above r
    j = math.floor((r + 1) * space.n / 2) + 1
    if not 0 < j <= space.n:
        raise RootAnomalyError(f"root {r} outside [-1, 1]")
    assert nodes[j - 1] < r < nodes[j]
    return GridCell(j)


def alpha0_closed3(space: Space, j) -> Fraction:
    """Interior root for ``m = 3``: ``-1 + 2j(n-1)/(nq(j+q-1))``."""
    n, q = space.n, space.q
    return -1 + Fraction(2 * (n - 1)) * j / (n * q * (j + q - 1))


def alpha1_closed4(space: Space, j) -> Fraction:
    """Interior root for ``m = 4``: ``-(n-2)(j(q-2)+2(q-1))/(nqj)``."""
    n, q = space.n, space.q
    return -Fraction(n - 2) * (j * (q - 2) + 2 * (q - 1)) / (n * q * j)


def lev_roots(frame: Frame, space: Space, s) -> RootProfile:
    """Roots of the Levenshtein polynomial with certified grid cells."""
    s = as_rational(s)
    alphas: list[RootDescriptor] = []
    if frame.eps == 1:
        alphas.append(_exact_root(space, Fraction(-1), 1))
    if frame.m == 3:
        alphas.append(_exact_root(space, alpha0_closed3(space, j_of_d(space, space.d_of_t(s))), 2))
    elif frame.m == 4:
        alphas.append(_exact_root(space, alpha1_closed4(space, j_of_d(space, space.d_of_t(s))), 2))
    elif frame.k >= 2:
        alphas.extend(_interior_roots(space, frame, s))
    alphas.append(_exact_root(space, s, 1))
    return RootProfile(tuple(alphas), frame.eps, frame.k)


def _interior_roots(space: Space, frame: Frame, s: Fraction) -> list[RootDescriptor]:
    poly = levenshtein_polynomial_roots_poly(space, frame, s)
    want = frame.k - 1
    if poly.degree != want:
        raise RootAnomalyError(f"expected degree {want}, got {poly.degree}")
    found = _roots_by_grid_signs(space, poly, s)
    if found is None:
        found = _roots_by_sturm(space, poly, s)
    if len(found) != want:
        raise RootAnomalyError(f"found {len(found)} interior roots, expected {want}")
    return found


def _roots_by_grid_signs(space: Space, poly: DensePoly, s: Fraction) -> list[RootDescriptor] | None:
    """Cells from sign changes at grid nodes; ``None`` if the count falls short.

    When as many roots are detected as the degree allows, each detected
    cell holds exactly one root, which certifies the location.
    """
    nodes = space.grid.nodes
    top = max(i for i, t in enumerate(nodes) if t <= s)
    signs = grid_signs(poly, space.n, range(top + 1))
    out: list[RootDescriptor] = []
    prev_sign, prev_idx = 0, None
    for i, sg in enumerate(signs):
        if sg == 0:
            out.append(_exact_root(space, nodes[i], 2))
            continue
        if prev_sign and sg != prev_sign:
            if prev_idx != i - 1:
                # zero(s) in between: parity must explain the sign change
                zeros = i - prev_idx - 1
                if zeros % 2 == 0:
                    return None
            else:
                out.append(RootDescriptor(RootBracket(nodes[i - 1], nodes[i]), GridCell(i), 2))
        elif prev_sign and prev_idx != i - 1 and (i - prev_idx - 1) % 2 == 1:
            return None
        prev_sign, prev_idx = sg, i
    if nodes[top] < s:
        ss = sign(poly_eval(poly, s))
        if ss == 0:
            raise RootAnomalyError("s is a multiple root of the Levenshtein root equation")
        if prev_sign and ss != prev_sign:
            out.append(RootDescriptor(RootBracket(nodes[top], s), GridCell(top + 1), 2))
    if len(out) != poly.degree:
        return None
    return sorted(out, key=lambda r: r.bracket.lo)


def _roots_by_sturm(space: Space, poly: DensePoly, s: Fraction) -> list[RootDescriptor]:
    nodes = space.grid.nodes
    out = []
    for br in isolate_roots(poly, Fraction(-1) - Fraction(1, 2 * space.n), s):
        if br.lo < nodes[0]:
            br = RootBracket(nodes[0], br.hi) if poly_eval(poly, nodes[0]) != 0 else RootBracket(nodes[0], nodes[0])
        cell = locate_in_grid(poly, br, nodes)
        if cell.exact:
            br = RootBracket(nodes[cell.j], nodes[cell.j])
        out.append(RootDescriptor(br, cell, 2))
    return out


# ---------------------------------------------------------------------------
# The j-ranges of the m = 3 and m = 4 regimes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RangeParams:
    """``S_1^2 = q^2 + 4(q-1)(n-2)`` and ``S_2^2 = q^2 + 4(q-1)(n-3)`` with exact range tests."""

    space: Space
    s1_squared: int = field(init=False)
    s2_squared: int = field(init=False)

    def __post_init__(self):
        n, q = self.space.n, self.space.q
        object.__setattr__(self, "s1_squared", q * q + 4 * (q - 1) * (n - 2))
        object.__setattr__(self, "s2_squared", q * q + 4 * (q - 1) * (n - 3))

    @staticmethod
    def _sqrt_bracket(x: int) -> RootBracket:
        r = math.isqrt(x)
        return RootBracket(Fraction(r), Fraction(r)) if r * r == x else RootBracket(Fraction(r), Fraction(r + 1))

    @property
    def s1(self) -> RootBracket:
        return self._sqrt_bracket(self.s1_squared)

    @property
    def s2(self) -> RootBracket:
        return self._sqrt_bracket(self.s2_squared)

    def in_j3(self, j) -> bool:
        """``0 <= j < (S_1 - q)/2``."""
        j = as_rational(j)
        x = 2 * j + self.space.q
        return j >= 0 and x * x < self.s1_squared

    def in_j4(self, j) -> bool:
        """``(S_1 - q)/2 <= j < (S_2 + q)/2 - 1``."""
        if self.space.n < 3:
            return False
        j = as_rational(j)
        q = self.space.q
        lo = 2 * j + q
        hi = 2 * j + 2 - q
        return lo >= 0 and lo * lo >= self.s1_squared and (hi < 0 or hi * hi < self.s2_squared)

    def j3_upper(self) -> float:
        return (math.sqrt(self.s1_squared) - self.space.q) / 2

    def d_range(self, which: int) -> list[int]:
        """All integer distances ``d`` in ``[1, n]`` whose ``j`` falls in ``J_3`` or ``J_4``."""
        test = self.in_j3 if which == 3 else self.in_j4
        return [d for d in range(1, self.space.n + 1) if test(j_of_d(self.space, d))]


def range_params(space: Space) -> RangeParams:
    return RangeParams(space)
