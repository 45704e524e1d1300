"""How much the refinement buys, and how close it gets to the linear program.

Part 1 prints binary rates at n = 1000 for the refined and Levenshtein
bounds (bigfloat mode, a few seconds).  Part 2 compares the refined bound
with the exact LP optimum for small ternary and binary spaces.  For q >= 3
the two usually coincide; for q = 2 the LP is often strictly better.

Run with ``python3 demos/rates_and_lp_gap.py``.
"""

import math

from levrefine import Space, refined_bound
from levrefine.delsarte_lp import compare
from levrefine.levenshtein import distances_in_regime

space = Space(1000, 2)
print("d/n    refined  Levenshtein")
for d in (250, 300, 350, 400, 450):
    rep = refined_bound(space, d, mode="bigfloat")
    lev_rate = math.log2(float(rep.levenshtein)) / space.n
    print(f"{d / space.n:.2f}   {rep.rate():.4f}   {lev_rate:.4f}")

for q in (2, 3):
    print(f"\nq={q}: refined vs exact LP in the m=3 range")
    same = total = 0
    for n in range(5, 17):
        sp = Space(n, q)
        for d in distances_in_regime(sp, (3,)):
            c = compare(sp, d)
            total += 1
            same += bool(c.equal)
            if not c.equal:
                print(f"  n={n:>2} d={d:>2}: refined {float(c.refined):9.2f}  LP {float(c.lp):9.2f}  ({c.certificate})")
    print(f"  equal in {same} of {total} cases")
