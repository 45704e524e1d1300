from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from levrefine.numkit import (
    BigFloat,
    DensePoly,
    GridCell,
    RootBracket,
    SingularSystemError,
    as_rational,
    enclosure,
    format_rational,
    greatest_root,
    grid_signs,
    integer_grid_poly,
    interval_sign,
    isolate_roots,
    locate_in_grid,
    poly_eval,
    poly_eval_bigfloat,
    solve_exact,
    sturm_count,
    to_bigfloat,
)

small_fracs = st.fractions(min_value=-6, max_value=6, max_denominator=9)
int_polys = st.lists(st.integers(-30, 30), min_size=1, max_size=8).map(DensePoly)


def test_as_rational_rejects_floats():
    assert as_rational("-3/11") == Fraction(-3, 11)
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_format_rational():
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(Fraction(-3, 11)) == "-3/11"


def test_from_roots_and_eval():
    p = DensePoly.from_roots([1, Fraction(-1, 2), 3])
    assert p.degree == 3
    for r in (1, Fraction(-1, 2), 3):
        assert poly_eval(p, r) == 0
    assert p(0) == Fraction(3, 2)


@settings(max_examples=80, deadline=None)
@given(a=int_polys, b=int_polys)
def test_divmod_round_trip(a, b):
    if b.is_zero():
        return
    quo, rem = divmod(a, b)
    assert quo * b + rem == a
    assert rem.is_zero() or rem.degree < b.degree


@settings(max_examples=80, deadline=None)
@given(p=int_polys, x=small_fracs)
def test_integer_grid_poly_matches_signs(p, x):
    n = 7
    ip = integer_grid_poly(p, n)
    for i in range(n + 1):
        t = Fraction(2 * i, n) - 1
        assert grid_signs(p, n, [i])[0] == (p(t) > 0) - (p(t) < 0)
    assert (not ip) == p.is_zero()


@settings(max_examples=60, deadline=None)
@given(roots=st.lists(small_fracs, min_size=1, max_size=5), cuts=st.lists(small_fracs, min_size=3, max_size=3))
def test_sturm_counts_distinct_roots_and_is_additive(roots, cuts):
    p = DensePoly.from_roots(roots)
    lo, mid, hi = sorted(cuts)
    if not lo < mid < hi:
        return
    want = len({r for r in roots if lo < r <= hi})
    assert sturm_count(p, lo, hi) == want
    assert sturm_count(p, lo, hi) == sturm_count(p, lo, mid) + sturm_count(p, mid, hi)


def test_isolate_and_greatest_root():
    p = DensePoly([-2, 0, 1])  # t^2 - 2
    brs = isolate_roots(p, -2, 2)
    assert len(brs) == 2
    assert all(br.lo ** 2 <= 2 <= br.hi ** 2 or br.hi ** 2 <= 2 <= br.lo ** 2 for br in brs)
    top = greatest_root(p, width=Fraction(1, 10**6))
    assert top.width <= Fraction(1, 10**6)
    assert top.lo < Fraction(14142136, 10**7) and top.hi > Fraction(14142135, 10**7)


def test_exact_rational_root_is_exact_bracket():
    p = DensePoly.from_roots([Fraction(1, 3)])
    br = greatest_root(p)
    assert br.exact and br.lo == Fraction(1, 3)


def test_locate_in_grid():
    nodes = [Fraction(2 * i, 4) - 1 for i in range(5)]
    p = DensePoly.from_roots([Fraction(1, 5)])
    assert locate_in_grid(p, RootBracket(Fraction(0), Fraction(1, 4)), nodes) == GridCell(3)
    q = DensePoly.from_roots([Fraction(1, 2)])
    assert locate_in_grid(q, RootBracket(Fraction(1, 2), Fraction(1, 2)), nodes) == GridCell(3, exact=True)


def test_solve_exact():
    sol = solve_exact([[2, 1], [1, 3]], [3, 5])
    assert sol == [Fraction(4, 5), Fraction(7, 5)]
    with pytest.raises(SingularSystemError):
        solve_exact([[1, 2], [2, 4]], [1, 2])


@settings(max_examples=40, deadline=None)
@given(p=int_polys, x=small_fracs)
def test_bigfloat_evaluation_tracks_exact(p, x):
    exact = poly_eval(p, x)
    approx = poly_eval_bigfloat(p, x)
    scale = sum(abs(c) * abs(x) ** i for i, c in enumerate(p.coeffs)) + 1
    with mpmath.workprec(256):
        err = abs(approx.value - mpmath.mpf(exact.numerator) / exact.denominator)
        assert err <= mpmath.mpf(2) ** -200 * float(scale)


def test_enclosure_sign():
    assert interval_sign(enclosure(Fraction(1, 3), 128)) == 1
    assert interval_sign(enclosure(Fraction(-1, 10**40), 256)) == -1
    assert isinstance(to_bigfloat(Fraction(1, 3)), BigFloat)
