"""One test per acceptance criterion; each prints a PASS/FAIL line.

The heavier sweeps (criteria 3, 4, 5, 8) take minutes on one core.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from functools import lru_cache
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from levrefine.codes import REFERENCE_TABLE2, enumerate_candidates, missing_reference_rows, reference_row
from levrefine.delsarte_lp import lp_bound
from levrefine.kkt import certify
from levrefine.krawtchouk import Space, expand, q_poly, reconstruct_on_grid
from levrefine.levenshtein import distances_in_regime, range_params
from levrefine.numkit import DensePoly, sturm_count
from levrefine.refine import (
    InfeasibleRefinement,
    asympt3,
    closed3,
    closed4,
    refined_bound,
)


@lru_cache(maxsize=None)
def candidates_upto_300():
    return tuple(enumerate_candidates((2, 3, 4, 5), 300))


# ---------------------------------------------------------------------------


def test_criterion_01_headline_values(record):
    cases = [
        ((3, 14, 8), 237, Fraction(513, 2)),
        ((4, 11, 7), 320, Fraction(364)),
        ((5, 11, 8), 250, Fraction(265)),
    ]
    details, ok = [], True
    for (q, n, d), want, lev in cases:
        start = time.perf_counter()
        rep = refined_bound(Space(n, q), d)
        took = time.perf_counter() - start
        good = rep.integer_bound == want and rep.levenshtein == lev and took < 1.0
        ok &= good
        details.append(f"({q},{n},{d}) -> {rep.value} / L={rep.levenshtein} in {took:.2f}s")
    # the (3,14,8) value is 1188/5 exactly; 237 is its floor
    ok &= refined_bound(Space(14, 3), 8).value == Fraction(1188, 5)
    record(1, "headline refined and Levenshtein values", ok, "; ".join(details))
    assert ok


def test_criterion_02_example_expansion(record):
    rep = refined_bound(Space(11, 4), 7)
    want = (Fraction(63, 5324), Fraction(117, 484), Fraction(45, 44), Fraction(1215, 484))
    got = tuple(rep.polynomial.expansion.coeffs)
    ok = got == want
    record(2, "improving polynomial expansion for (4,11,7)", ok, " ".join(map(str, got)))
    assert ok


@pytest.mark.slow
def test_criterion_03_table2(record):
    start = time.perf_counter()
    rows = [r for r in candidates_upto_300() if r.n <= 100 and r.integrality_pass]
    took = time.perf_counter() - start
    missing = missing_reference_rows(rows, (2, 3, 4, 5), 100)
    extra = [(r.q, r.n, r.d) for r in rows if reference_row(r.q, r.n, r.d) is None]
    flagged = {(r.q, r.n, r.d): r.anomalies for r in rows if r.anomalies}

    # rows with no flagged anomaly must match the printed row in full
    clean_mismatch = []
    for r in rows:
        ref = reference_row(r.q, r.n, r.d)
        if ref and not r.anomalies:
            if r.refined_value != ref[4] or tuple(r.distribution) != tuple(ref[6]):
                clean_mismatch.append((r.q, r.n, r.d))

    must_flag = {
        (2, 12, 5): "wrong sign",
        (5, 25, 18): "exceeds reference L3",
        (5, 16, 12): "malformed",
    }
    undetected = [k for k, key in must_flag.items() if not any(key in a for a in flagged.get(k, ()))]
    ok = not missing and not extra and not clean_mismatch and not undetected and took < 600
    detail = (f"{len(rows)}/{len(REFERENCE_TABLE2)} rows, flagged {sorted(flagged)}, "
              f"missing {missing}, extra {extra}, undetected {undetected}")
    record(3, "putative-code table for n <= 100", ok, detail)
    assert ok


@pytest.mark.slow
def test_criterion_04_integrality_counts(record):
    rows = candidates_upto_300()
    small = [r for r in rows if r.n <= 100]
    ok = True
    parts = []
    reference_counts = {2: (7, 38), 3: (14, 54), 4: (20, 47), 5: (18, 39)}
    for q in (2, 3, 4, 5):
        ref_rows = sum(1 for ref in REFERENCE_TABLE2 if ref[0] == q)
        passing_small = sum(r.integrality_pass for r in small if r.q == q)
        ok &= passing_small == ref_rows
        mine = [r for r in rows if r.q == q]
        passing = sum(r.integrality_pass for r in mine)
        parts.append(f"q={q}: {passing}/{len(mine)} (reference {reference_counts[q][0]}/{reference_counts[q][1]}), "
                     f"n<=100 {passing_small}/{ref_rows}")
    # numerators for n <= 300 are the soft target; report but only the
    # n <= 100 restriction is a hard requirement
    numerators = tuple(sum(r.integrality_pass for r in rows if r.q == q) for q in (2, 3, 4, 5))
    parts.append(f"numerators n<=300 {'match' if numerators == (7, 14, 20, 18) else 'differ'}; "
                 "denominators depend on the candidate criterion")
    record(4, "integrality counts", ok, "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_criterion_05_kkt_exceptions(record):
    start = time.perf_counter()
    exceptions, inconclusive = set(), []
    for q in range(3, 11):
        for n in range(3, 101):
            space = Space(n, q)
            for d in distances_in_regime(space, (3,)):
                cert = certify(space, d)
                if cert.verdict == "inconclusive":
                    inconclusive.append((q, n, d))
                elif not cert.optimal:
                    exceptions.add((q, n))
    took = time.perf_counter() - start
    want = {(3, 5), (3, 7), (3, 8), (3, 9)}
    ok = exceptions == want and not inconclusive and took < 1800
    record(5, "KKT exception set for q=3..10, n<=100", ok,
           f"exceptions {sorted(exceptions)}, inconclusive {len(inconclusive)}, {took:.0f}s")
    assert ok


def test_criterion_06_lp_equivalence(record):
    checked, mismatches = 0, []
    for q in (2, 3, 4, 5):
        for n in range(3, 17):
            space = Space(n, q)
            for d in distances_in_regime(space, (3,)):
                if not certify(space, d).optimal:
                    continue
                checked += 1
                lp = lp_bound(space, d).bound
                ref = refined_bound(space, d).value
                if lp != ref:
                    mismatches.append((q, n, d, lp, ref))
    ok = checked > 0 and not mismatches
    record(6, "exact LP optimum equals refined bound where certified", ok,
           f"{checked} instances, mismatches {mismatches[:3]}")
    assert ok


def _random_instances(which: int, count: int, seed: int):
    rng = random.Random(seed)
    pools: dict[tuple[int, int], list[int]] = {}
    out = []
    while len(out) < count:
        q, n = rng.randint(2, 10), rng.randint(4, 200)
        if (q, n) not in pools:
            pools[(q, n)] = range_params(Space(n, q)).d_range(which)
        if pools[(q, n)]:
            out.append((q, n, rng.choice(pools[(q, n)])))
    return out


def test_criterion_07_closed_forms(record):
    bad3 = []
    for q, n, d in _random_instances(3, 500, seed=3):
        space = Space(n, q)
        if closed3(space, d)[0].value != refined_bound(space, d).value:
            bad3.append((q, n, d))
    # closed4 describes the plain snapped m=4 polynomial; the full pipeline
    # may find a better boundary or simplified plan, never a worse one
    bad4, beaten, feasible4, attempts = [], 0, 0, 0
    rng_instances = iter(_random_instances(4, 2000, seed=4))
    while feasible4 < 200:
        q, n, d = next(rng_instances)
        attempts += 1
        space = Space(n, q)
        try:
            value = closed4(space, d)[0].value
        except InfeasibleRefinement:
            continue
        feasible4 += 1
        plain = refined_bound(space, d, extra_plans=False).value
        full = refined_bound(space, d).value
        if value != plain or full > value:
            bad4.append((q, n, d))
        beaten += full < value
    ok = not bad3 and not bad4
    record(7, "closed forms equal the generic pipeline", ok,
           f"m=3: 500 checked, {len(bad3)} bad; m=4: {feasible4} feasible of {attempts}, "
           f"{len(bad4)} bad, {beaten} improved by extra plans")
    assert ok


@pytest.mark.slow
def test_criterion_08_feasibility_sweeps(record):
    positivity_violations, j3_count = [], 0
    for q in range(2, 11):
        for n in range(q, 201):
            space = Space(n, q)
            for d in range_params(space).d_range(3):
                cf = closed3(space, d)[1]
                _, f1, f2, _ = cf.coefficients()
                j3_count += 1
                if not (f1 > 0 and f2 > 0):
                    positivity_violations.append((q, n, d))
    m5_violations, m5_count = [], 0
    for n in range(6, 2001):
        space = Space(n, 3)
        for d in distances_in_regime(space, (5,)):
            m5_count += 1
            if refined_bound(space, d).method != "refined":
                m5_violations.append((n, d))
    ok = not positivity_violations and not m5_violations
    record(8, "coefficient positivity sweeps", ok,
           f"m=3: {j3_count} instances, {len(positivity_violations)} violations; "
           f"m=5 q=3: {m5_count} instances, {len(m5_violations)} violations")
    assert ok


def test_criterion_09_rates(record):
    space = Space(1000, 2)
    want = (0.386, 0.281, 0.188, 0.110, 0.047)
    got, monotone_ok = [], True
    for frac, target in zip((250, 300, 350, 400, 450), want):
        rep = refined_bound(space, frac, mode="bigfloat")
        got.append(rep.rate())
        monotone_ok &= float(rep.value) <= float(rep.levenshtein)
    close = all(abs(g - w) <= 0.002 for g, w in zip(got, want))
    monotone = all(a > b for a, b in zip(got, got[1:]))
    ok = close and monotone and monotone_ok
    record(9, "rates at n=1000, q=2", ok, " ".join(f"{g:.4f}" for g in got))
    assert ok


def test_criterion_10_asymptotics(record):
    ns = {
        (2, 1): (101, 1001, 10001),
        (2, 2): (100, 1000, 10000),
        (3, 1): (100, 1000, 10000),
        (3, 2): (102, 1002, 10002),
    }
    ok, parts = True, []
    for (q, j), seq in ns.items():
        est = asympt3(q, j=j)
        errs = []
        for n in seq:
            d = n - 1 - Fraction(n - 2 + j, q)
            rep, cf = closed3(Space(n, q), int(d))
            assert cf.j == j
            errs.append(abs(rep.value / est.exact(n) - 1))
        good = errs[-1] <= Fraction(1, 100) and errs[0] >= errs[1] >= errs[2]
        ok &= good
        parts.append(f"q={q} j={j}: {float(errs[-1]):.1e}")
    record(10, "closed form against its large-n estimate", ok, ", ".join(parts))
    assert ok


@settings(max_examples=60, deadline=None)
@given(
    coeffs=st.lists(st.integers(-20, 20), min_size=2, max_size=7),
    a=st.fractions(min_value=-5, max_value=5, max_denominator=7),
    b=st.fractions(min_value=-5, max_value=5, max_denominator=7),
    c=st.fractions(min_value=-5, max_value=5, max_denominator=7),
)
def _kernel_random(coeffs, a, b, c):
    p = DensePoly(coeffs)
    if p.degree < 1:
        return
    lo, mid, hi = sorted((a, b, c))
    if lo < mid < hi:
        assert sturm_count(p, lo, hi) == sturm_count(p, lo, mid) + sturm_count(p, mid, hi)
    divisor = DensePoly([c, 1, a])
    quo, rem = divmod(p, divisor)
    assert quo * divisor + rem == p and rem.degree < divisor.degree


def test_criterion_11_kernel(record):
    failures = []
    for n, q in product(range(2, 13), (2, 3, 4)):
        space = Space(n, q)
        wts = [space.r(z) for z in range(n + 1)]
        table = space.table
        for i in range(n + 1):
            for k in range(i, n + 1):
                inner = sum(w * table.k(i, z) * table.k(k, z) for z, w in enumerate(wts))
                want = q**n * space.r(i) if i == k else 0
                if inner != want:
                    failures.append(("orthogonality", n, q, i, k))
        rng = random.Random(n * 31 + q)
        for _ in range(3):
            p = DensePoly([rng.randint(-9, 9) for _ in range(rng.randint(1, n + 1))])
            exp = expand(space, p)
            back = sum((c * q_poly(space, i) for i, c in enumerate(exp.coeffs)), DensePoly())
            if back != p or reconstruct_on_grid(space, exp) != [p(t) for t in space.grid.nodes]:
                failures.append(("round trip", n, q))
    try:
        _kernel_random()
    except AssertionError as exc:  # pragma: no cover
        failures.append(("sturm/divmod", str(exc)))
    ok = not failures
    record(11, "kernel orthogonality, round trip, Sturm additivity, divmod", ok, f"failures {failures[:3]}")
    assert ok
