"""The Delsarte linear program solved exactly.

Primal::

    minimize   x_1 + ... + x_n
    subject to sum_l K_l(i)/r_l x_l <= -1   (i = d..n),   x >= 0

and the bound is ``1 + optimum``.  The solver works on the dual
(``max sum y_i`` with ``-sum_i y_i K_l(i)/r_l <= 1``), whose slack basis
is feasible from the start, using a rational tableau and Bland's rule.
The primal solution is read off the reduced costs of the dual slacks.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction

from .krawtchouk import Space
from .numkit import format_rational


class LPInconsistency(ArithmeticError):
    """The solver reached a state the theory rules out (e.g. unboundedness)."""


@dataclass(frozen=True)
class LPInstance:
    space: Space
    d: int
    rows: tuple[int, ...]  # distances i = d..n
    matrix: tuple[tuple[Fraction, ...], ...]  # matrix[r][l-1] = K_l(i_r)/r_l

    @property
    def n_vars(self) -> int:
        return self.space.n


@dataclass(frozen=True)
class LPSolution:
    x: tuple[Fraction, ...]
    objective: Fraction
    duals: dict[int, Fraction]
    basis: tuple[int, ...]
    pivots: int
    status: str = "optimal"

    @property
    def bound(self) -> Fraction:
        return 1 + self.objective


def build(space: Space, d: int) -> LPInstance:
    if not 1 <= d <= space.n:
        raise ValueError(f"d={d} outside [1, {space.n}]")
    n = space.n
    tab = space.table
    rows = tuple(range(d, n + 1))
    matrix = []
    for i in rows:
        col = tab.column(i, n)
        matrix.append(tuple(Fraction(col[l], tab.r(l)) for l in range(1, n + 1)))
    return LPInstance(space, d, rows, tuple(matrix))


def solve(inst: LPInstance) -> LPSolution:
    """Exact optimum via the dual tableau with Bland's least-index rule."""
    n = inst.n_vars
    k = len(inst.rows)
    # dual constraints, one per primal variable l: sum_r (-a[r][l]) y_r + s_l = 1
    ncols = k + n
    T = []
    for l in range(n):
        row = [-inst.matrix[r][l] for r in range(k)] + [Fraction(0)] * n
        row[k + l] = Fraction(1)
        T.append(row + [Fraction(1)])
    # objective row holds reduced costs of max sum y: z - sum y = 0
    z = [Fraction(-1)] * k + [Fraction(0)] * n + [Fraction(0)]
    basis = [k + l for l in range(n)]
    pivots = 0
    while True:
        enter = next((c for c in range(ncols) if z[c] < 0), None)
        if enter is None:
            break
        best = None
        for r in range(n):
            a = T[r][enter]
            if a > 0:
                ratio = T[r][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:
            raise LPInconsistency("dual unbounded, so the primal would be infeasible")
        _, r = best
        piv = T[r][enter]
        pr = [v / piv for v in T[r]]
        T[r] = pr
        for rr in range(n):
            f = T[rr][enter]
            if rr != r and f:
                T[rr] = [a - f * b for a, b in zip(T[rr], pr)]
        f = z[enter]
        z = [a - f * b for a, b in zip(z, pr)]
        basis[r] = enter
        pivots += 1

    y = [Fraction(0)] * k
    for r, b in enumerate(basis):
        if b < k:
            y[b] = T[r][-1]
    x = tuple(z[k + l] for l in range(n))
    sol = LPSolution(x, z[-1], dict(zip(inst.rows, y)), tuple(basis), pivots)
    verify(inst, sol)
    return sol


def verify(inst: LPInstance, sol: LPSolution) -> None:
    """Exact primal and dual feasibility plus equal objectives."""
    if any(v < 0 for v in sol.x):
        raise LPInconsistency("negative primal variable")
    for r, i in enumerate(inst.rows):
        lhs = sum(a * v for a, v in zip(inst.matrix[r], sol.x))
        if lhs > -1:
            raise LPInconsistency(f"primal row i={i} violated")
    if sum(sol.x) != sol.objective or sum(sol.duals.values()) != sol.objective:
        raise LPInconsistency("primal and dual objectives differ")
    for l in range(inst.n_vars):
        if -sum(inst.matrix[r][l] * y for r, y in enumerate(sol.duals.values())) > 1:
            raise LPInconsistency(f"dual row l={l + 1} violated")


def lp_bound(space: Space, d: int) -> LPSolution:
    return solve(build(space, d))


def g_values(inst: LPInstance, sol: LPSolution) -> list[Fraction]:
    """``g(z) = 1 + sum_l x_l K_l(z)/r_l`` for ``z = 0..n``."""
    space = inst.space
    tab = space.table
    out = []
    for zz in range(space.n + 1):
        col = tab.column(zz, space.n)
        out.append(1 + sum(x * col[l + 1] / tab.r(l + 1) for l, x in enumerate(sol.x) if x))
    return out


# ---------------------------------------------------------------------------
# Comparison with the refined bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    d: int
    s: Fraction
    refined: Fraction
    lp: Fraction | None
    equal: bool | None
    certificate: str


def compare(space: Space, d: int, *, lp_cap: int = 64) -> Comparison:
    """Refined bound against the LP optimum (certificate only above ``lp_cap``)."""
    from .kkt import certify
    from .refine import refined_bound

    rep = refined_bound(space, d)
    cert = certify(space, d).verdict
    if space.n > lp_cap:
        return Comparison(d, rep.s, rep.value, None, None, cert)
    lp = lp_bound(space, d).bound
    return Comparison(d, rep.s, rep.value, lp, lp == rep.value, cert)


@dataclass(frozen=True)
class SqResult:
    n: int
    q: int
    sigma: Fraction
    first_failure: int | None  # distance of the first failing s, if any
    mode: str  # lp | certificate


def sq_scan(space: Space, *, lp_cap: int = 64) -> SqResult:
    """Largest grid ``sigma`` with refined = LP optimum for every grid ``s < sigma``.

    Scans ``s`` upward from ``-1`` and stops at the first mismatch.  Above
    ``lp_cap`` the KKT certificate stands in for the LP.
    """
    n = space.n
    mode = "lp" if n <= lp_cap else "certificate"
    last = None
    for d in range(n, 0, -1):
        c = compare(space, d, lp_cap=lp_cap)
        ok = c.equal if mode == "lp" else c.certificate == "lp_optimal"
        if not ok:
            return SqResult(n, space.q, space.t_of_d(d), d, mode)
        last = space.t_of_d(d)
    return SqResult(n, space.q, last, None, mode)


# ---------------------------------------------------------------------------
# LP file dump
# ---------------------------------------------------------------------------


def dump_lp(inst: LPInstance) -> str:
    """The primal in CPLEX LP text form, coefficients written as ``p/q``."""
    out = io.StringIO()
    n = inst.n_vars
    out.write(f"\\ Delsarte LP q={inst.space.q} n={inst.space.n} d={inst.d}\n")
    out.write("Minimize\n obj: " + " + ".join(f"x{l}" for l in range(1, n + 1)) + "\n")
    out.write("Subject To\n")
    for r, i in enumerate(inst.rows):
        terms = []
        for l, a in enumerate(inst.matrix[r], start=1):
            if a:
                sgn = "-" if a < 0 else "+"
                terms.append(f"{sgn} {format_rational(abs(a))} x{l}")
        body = " ".join(terms).lstrip("+ ") if terms else "0 x1"
        out.write(f" row_{i}: {body} <= -1\n")
    out.write("Bounds\n")
    for l in range(1, n + 1):
        out.write(f" x{l} >= 0\n")
    out.write("End\n")
    return out.getvalue()
