from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from levrefine.delsarte_lp import build, compare, dump_lp, g_values, lp_bound, solve, sq_scan
from levrefine.krawtchouk import Space
from levrefine.refine import refined_bound


def highs_value(space, d):
    inst = build(space, d)
    A = np.array([[float(a) for a in row] for row in inst.matrix])
    res = linprog(np.ones(space.n), A_ub=A, b_ub=-np.ones(len(inst.rows)), bounds=(0, None), method="highs")
    assert res.status == 0
    return 1 + res.fun


@pytest.mark.parametrize("q,n", [(2, 8), (2, 12), (3, 9), (4, 11), (5, 7)])
def test_matches_highs(q, n):
    sp = Space(n, q)
    for d in range(1, n + 1):
        exact = lp_bound(sp, d).bound
        assert abs(float(exact) - highs_value(sp, d)) <= 1e-6 * float(exact)


@pytest.mark.parametrize(
    "q,n,d,value", [(4, 11, 7, 320), (3, 14, 8, Fraction(1188, 5)), (2, 12, 5, 40), (2, 6, 1, 64)]
)
def test_known_optima(q, n, d, value):
    assert lp_bound(Space(n, q), d).bound == value


def test_monotone_and_below_refined():
    for q, n in [(2, 14), (3, 12), (4, 10)]:
        sp = Space(n, q)
        values = [lp_bound(sp, d).bound for d in range(1, n + 1)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        for d, v in zip(range(1, n + 1), values):
            rep = refined_bound(sp, d)
            assert v <= rep.value <= rep.levenshtein


def test_optimal_g_conditions():
    sp = Space(11, 4)
    inst = build(sp, 7)
    sol = solve(inst)
    g = g_values(inst, sol)
    assert g[0] == sol.bound
    assert all(g[z] <= 0 for z in range(7, 12))
    assert all(x >= 0 for x in sol.x)
    assert sum(sol.duals.values()) == sol.objective


def test_compare_and_sq_scan():
    c = compare(Space(11, 4), 7)
    assert c.equal and c.lp == 320 and c.certificate == "lp_optimal"
    c2 = compare(Space(12, 2), 5)
    assert c2.equal is False and c2.lp == 40 and c2.refined == 60
    far = compare(Space(80, 3), 52, lp_cap=64)
    assert far.lp is None and far.equal is None
    res = sq_scan(Space(9, 3))
    assert res.mode == "lp"
    assert res.first_failure is None or res.sigma == Space(9, 3).t_of_d(res.first_failure)


def test_dump_lp():
    text = dump_lp(build(Space(5, 3), 3))
    assert text.startswith("\\ Delsarte LP q=3 n=5 d=3")
    assert "Minimize" in text and "End" in text
    assert sum(line.startswith(" row_") for line in text.splitlines()) == 3
    assert "/" in text
