"""Search for parameters where the refined bound might be met by an actual code.

For every (q, n, d) whose refined bound is an integer strictly below the
Levenshtein bound, solve for the distance distribution such a code would
need.  Non-integral or negative counts rule the code out.  Rows that
survive are compared with the reference list, and every disagreement is
printed.

Run with ``python3 demos/putative_codes.py [n_max]`` (default 100, ~5 s).
"""

import sys

from levrefine.codes import enumerate_candidates, integrality_counts, missing_reference_rows
from levrefine.numkit import format_rational as fr

n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 100
rows = enumerate_candidates((2, 3, 4, 5), n_max)

print(f"{'q':>2} {'n':>4} {'d':>4} {'refined':>8}  distances -> counts")
for r in rows:
    if not r.integrality_pass:
        continue
    dists = " ".join(fr(t) for t in r.inner_products)
    counts = " ".join(fr(a) for a in r.distribution)
    print(f"{r.q:>2} {r.n:>4} {r.d:>4} {r.refined_value:>8}  [{dists}] -> ({counts})")
    for a in r.anomalies:
        print(f"{'':>23}note: {a}")

print("\npassing / candidates per q:")
for c in integrality_counts(rows):
    print(f"  q={c.q}: {c.passing}/{c.candidates}")

passing = [r for r in rows if r.integrality_pass]
missing = missing_reference_rows(passing, (2, 3, 4, 5), n_max)
print("reference rows not reproduced:", missing or "none")
