"""Walk one instance, q=4, n=11, d=7, through every stage of the pipeline.

Run with ``python3 demos/worked_instance.py``.
"""

from levrefine import Space
from levrefine.codes import putative_code
from levrefine.delsarte_lp import lp_bound
from levrefine.kkt import certify
from levrefine.levenshtein import classify, lev_bound, lev_roots
from levrefine.numkit import format_rational as fr
from levrefine.refine import build, snap

space = Space(11, 4)
d = 7
s = space.t_of_d(d)
print(f"H({space.n},{space.q}), minimum distance {d}: inner products must stay <= s = {fr(s)}")

frame = classify(space, s)
print(f"\ns falls in the Levenshtein regime m = {frame.m} (k = {frame.k}, eps = {frame.eps})")
print(f"Levenshtein bound: {fr(lev_bound(frame, space, s))}")

profile = lev_roots(frame, space, s)
for a in profile.interior:
    print(f"  double root near {float(a):+.5f}, between grid nodes t_{a.cell.j - 1} and t_{a.cell.j}")

# The double root is not a grid value, so it can be split into the two
# neighbouring grid nodes without breaking the sign condition on the grid.
(plan,) = snap(profile, space.grid)
print("\nsnapped roots:", ", ".join(fr(g) for g in plan.gammas))

poly = build(plan, space)
print("Krawtchouk coefficients:", ", ".join(fr(c) for c in poly.expansion))
print("all non-negative:", poly.feasible)
print(f"refined bound f(1)/f_0 = {fr(poly.bound())}")

code = putative_code(space, d)
print(f"\na code meeting the bound would have {code.M} words with distances {code.distances}")
print("and distance distribution", tuple(int(x) for x in code.ordered_distribution()))

cert = certify(space, d)
print(f"\nKKT certificate: {cert.verdict}; multipliers {dict((k, fr(v)) for k, v in cert.mu.items())}")
print(f"exact LP optimum: {fr(lp_bound(space, d).bound)}")
