"""Refined Levenshtein bounds.

The Levenshtein polynomial has double roots strictly inside grid cells.
Replacing each double root by the two grid nodes bounding its cell keeps
the polynomial non-positive on every grid node of ``[-1, s]``; if the
Krawtchouk coefficients stay non-negative, ``f(1)/f_0`` is a valid and
usually smaller bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .krawtchouk import Expansion, Space, expand, expand_enclosure, reduce_mod_grid
from .levenshtein import (
    Frame,
    RootProfile,
    classify,
    frame_for,
    j_of_d,
    lev_bound,
    lev_roots,
    on_left_end,
    range_params,
)
from .numkit import DEFAULT_PRECISION, BigFloat, DensePoly, as_rational, interval_sign

METHODS = ("levenshtein", "refined", "closed3", "closed4", "lp")


class UncertifiedCellError(ValueError):
    """A root's grid cell was not certified, so it cannot be snapped."""


class DomainError(ValueError):
    """Input lies outside the range where a closed form applies."""


class InfeasibleRefinement(ArithmeticError):
    def __init__(self, message: str, poly: "ImprovedPolynomial"):
        super().__init__(message)
        self.poly = poly


# ---------------------------------------------------------------------------
# Snapping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SnapPlan:
    """Simple roots ``gamma_1 <= ... <= gamma_{2k-1} = s`` of the improving polynomial."""

    gammas: tuple[Fraction, ...]
    epsilon: int
    tie_break: tuple[str, ...] = ()

    @property
    def degree(self) -> int:
        return len(self.gammas) + self.epsilon

    @property
    def s(self) -> Fraction:
        return self.gammas[-1]


def snap(profile: RootProfile, grid) -> list[SnapPlan]:
    """Replace every interior double root by the grid nodes around it.

    A root inside ``(t_{j-1}, t_j)`` becomes the pair ``(t_{j-1}, t_j)``.
    A root sitting exactly on ``t_j`` gives two choices, ``(t_{j-1}, t_j)``
    and ``(t_j, t_{j+1})``; every combination is returned, lower cells
    first.  Choices that would need a node outside the grid are dropped.
    """
    nodes = grid.nodes
    s = profile.alphas[-1].bracket.lo
    options: list[list[tuple[tuple[Fraction, Fraction], str]]] = []
    for a in profile.interior:
        cell = a.cell
        if cell is None:
            raise UncertifiedCellError("interior root has no grid cell")
        j = cell.j
        if not cell.exact:
            if not 0 < j < len(nodes):
                raise UncertifiedCellError(f"cell {j} outside the grid")
            options.append([((nodes[j - 1], nodes[j]), "")])
            continue
        pair = []
        if j >= 1:
            pair.append(((nodes[j - 1], nodes[j]), f"t_{j} low"))
        if j + 1 < len(nodes) and nodes[j + 1] <= s:
            pair.append(((nodes[j], nodes[j + 1]), f"t_{j} high"))
        if not pair:
            raise UncertifiedCellError(f"no admissible snap for root on t_{j}")
        options.append(pair)
    plans = []
    for combo in itertools.product(*options):
        gammas = [g for pair, _ in combo for g in pair]
        gammas.append(s)
        tags = tuple(tag for _, tag in combo if tag)
        plan = SnapPlan(tuple(sorted(gammas)), profile.eps, tags)
        plans.append(plan)
        simple = simplified(plan)
        if simple is not None:
            plans.append(simple)
    return plans


def simplified(plan: SnapPlan) -> SnapPlan | None:
    """The plan with repeated nodes made simple, or ``None`` if all roots are simple.

    A repeated root at a grid node has the same sign pattern on the grid
    as a simple one, so (A1) is unaffected and the degree drops.
    """
    roots = list(plan.gammas) + ([Fraction(-1)] * plan.epsilon)
    if len(set(roots)) == len(roots):
        return None
    has_minus_one = Fraction(-1) in roots
    rest = sorted(set(roots) - {Fraction(-1)})
    return SnapPlan(tuple(rest), int(has_minus_one), plan.tie_break + ("simple",))


# ---------------------------------------------------------------------------
# Building and checking the polynomial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Feasibility:
    status: str  # feasible | infeasible | uncertified
    negative: tuple[int, ...] = ()
    a1_violations: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == "feasible"


@dataclass(frozen=True)
class ImprovedPolynomial:
    """``(t+1)^eps prod (t - gamma_i)`` with its Krawtchouk expansion and verdict."""

    plan: SnapPlan
    poly: DensePoly
    reduced: DensePoly
    expansion: Expansion | None
    feasibility: Feasibility
    value_at_one: Fraction
    enclosure: tuple | None = None

    @property
    def feasible(self) -> bool:
        return self.feasibility.ok

    @property
    def f0(self):
        if self.expansion is not None:
            return self.expansion[0]
        return self.enclosure[0]

    def bound(self) -> Fraction | BigFloat:
        if self.expansion is not None:
            return self.value_at_one / self.expansion[0]
        with mpmath.workprec(DEFAULT_PRECISION):
            f0 = mpmath.mpf(self.enclosure[0].mid)
            top = mpmath.mpf(self.value_at_one.numerator) / self.value_at_one.denominator
            return BigFloat(top / f0, DEFAULT_PRECISION)


def _sign_on_node(plan: SnapPlan, t: Fraction) -> int:
    if plan.epsilon and t == -1:
        return 0
    neg = 0
    for g in plan.gammas:
        if t == g:
            return 0
        if t < g:
            neg += 1
    return -1 if neg % 2 else 1


def check_a1(plan: SnapPlan, space: Space) -> tuple[int, ...]:
    """Grid indices in ``[-1, s]`` where the polynomial is positive."""
    s = plan.s
    return tuple(
        i for i, t in enumerate(space.grid.nodes) if t <= s and _sign_on_node(plan, t) > 0
    )


def build(plan: SnapPlan, space: Space, *, mode: str = "exact",
          precision_bits: int = DEFAULT_PRECISION) -> ImprovedPolynomial:
    """Construct, reduce, expand and check the improving polynomial.

    ``mode="bigfloat"`` expands with interval arithmetic and only falls
    back to exact rationals when a coefficient sign cannot be certified.
    """
    roots = list(plan.gammas)
    if plan.epsilon:
        roots.insert(0, Fraction(-1))
    poly = DensePoly.from_roots(roots)
    reduced = reduce_mod_grid(space, poly)
    at_one = poly(1)
    a1 = check_a1(plan, space)

    if mode == "bigfloat":
        enc = expand_enclosure(space, reduced, precision_bits)
        signs = [interval_sign(c) for c in enc]
        if all(sg is not None for sg in signs):
            neg = tuple(i for i, sg in enumerate(signs) if i >= 1 and sg < 0)
            verdict = _verdict(neg, signs[0] > 0, a1)
            return ImprovedPolynomial(plan, poly, reduced, None, verdict, at_one, tuple(enc))
    elif mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")

    exp = expand(space, reduced)
    neg = tuple(exp.negative_indices())
    return ImprovedPolynomial(plan, poly, reduced, exp, _verdict(neg, exp[0] > 0, a1), at_one)


def _verdict(neg: tuple[int, ...], f0_positive: bool, a1: tuple[int, ...]) -> Feasibility:
    if neg or not f0_positive or a1:
        bad = neg if f0_positive else (0,) + neg
        return Feasibility("infeasible", bad, a1)
    return Feasibility("feasible")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    space: Space
    d: int
    s: Fraction
    method: str
    value: Fraction | BigFloat
    frame: Frame | None = None
    polynomial: ImprovedPolynomial | None = None
    levenshtein: Fraction | None = None
    diagnostics: tuple[str, ...] = ()
    certified: bool = True

    @property
    def exact(self) -> bool:
        return isinstance(self.value, Fraction)

    def __float__(self) -> float:
        return float(self.value)

    @property
    def integer_bound(self) -> int:
        """Code sizes are integers, so the usable bound is the floor."""
        v = self.value
        if isinstance(v, Fraction):
            return math.floor(v)
        return int(mpmath.floor(v.value))

    def rate(self) -> float:
        """``log2(value)/n``."""
        v = self.value
        if isinstance(v, Fraction):
            return (math.log2(v.numerator) - math.log2(v.denominator)) / self.space.n
        return float(mpmath.log(v.value, 2)) / self.space.n


def _d_and_s(space: Space, d) -> tuple[int, Fraction]:
    d = int(d)
    if not 1 <= d <= space.n:
        raise ValueError(f"d={d} outside [1, {space.n}]")
    return d, space.t_of_d(d)


def levenshtein_report(space: Space, d) -> BoundReport:
    d, s = _d_and_s(space, d)
    frame = classify(space, s)
    val = lev_bound(frame, space, s)
    return BoundReport(space, d, s, "levenshtein", val, frame, levenshtein=val)


def _less(a, b) -> bool:
    return float(a) < float(b) if not (isinstance(a, Fraction) and isinstance(b, Fraction)) else a < b


def refined_bound(space: Space, d, *, mode: str = "exact",
                  precision_bits: int = DEFAULT_PRECISION, extra_plans: bool = True,
                  max_plans: int = 256) -> BoundReport:
    """Run classify, root location, snapping and expansion for distance ``d``.

    With several snap plans the smallest feasible ``f(1)/f_0`` wins and
    ties go to the earlier (lower-cell) plan.  When ``s`` is exactly the
    left end of ``I_m`` the plans for ``m - 1`` are tried too.  When no plan is feasible the
    Levenshtein value is returned with a diagnostic.

    ``extra_plans=False`` keeps only the plain snapped plans of the frame
    holding ``s`` (no simplified repeats, no ``m - 1`` plans); the closed
    forms describe exactly that polynomial.

    Every interior root sitting on a grid node doubles the number of
    plans.  Past ``max_plans`` the snapping is skipped and the Levenshtein
    value is reported; this only happens for ``s`` close to 1, where all
    roots fall on the grid and snapping has never improved the bound.
    """
    d, s = _d_and_s(space, d)
    frame = classify(space, s)
    lev = lev_bound(frame, space, s)
    profile = lev_roots(frame, space, s)
    hits = sum(1 for a in profile.interior if a.cell is not None and a.cell.exact)
    if 2**hits > max_plans:
        note = f"{hits} roots on grid nodes; {2**hits} snap plans exceed max_plans={max_plans}"
        return BoundReport(space, d, s, "levenshtein", lev, frame, None, lev, (note,))
    plans = snap(profile, space.grid)
    if not extra_plans:
        plans = [p for p in plans if "simple" not in p.tie_break]
    elif on_left_end(space, frame, s):
        below = frame_for(space, frame.m - 1)
        plans += [SnapPlan(p.gammas, p.epsilon, p.tie_break + (f"m={below.m}",))
                  for p in snap(lev_roots(below, space, s), space.grid)]

    best = None
    notes: list[str] = []
    for plan in plans:
        imp = build(plan, space, mode=mode, precision_bits=precision_bits)
        if not imp.feasible:
            notes.append(f"plan {plan.tie_break or ('single',)} infeasible: "
                         f"negative f_i at {list(imp.feasibility.negative)}")
            continue
        val = imp.bound()
        if best is None or _less(val, best[0]):
            best = (val, imp)

    if best is None:
        notes.append("falling back to the Levenshtein bound")
        return BoundReport(space, d, s, "levenshtein", lev, frame, None, lev, tuple(notes))
    val, imp = best
    if _less(lev, val):
        notes.append("snapped polynomial is weaker than Levenshtein's; keeping the Levenshtein value")
        return BoundReport(space, d, s, "levenshtein", lev, frame, imp, lev, tuple(notes))
    return BoundReport(space, d, s, "refined", val, frame, imp, lev, tuple(notes),
                       certified=imp.expansion is not None or mode == "bigfloat")


# ---------------------------------------------------------------------------
# Closed forms for m = 3 and m = 4
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedForm3:
    j: Fraction
    e: Fraction
    r: int
    d0: Fraction
    a: Fraction
    A: Fraction
    B: Fraction
    C: Fraction
    D: Fraction
    E: Fraction
    n: int = field(repr=False, default=0)
    q: int = field(repr=False, default=0)

    def coefficients(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """``(f_0, f_1, f_2, f_3)`` from the closed formulas."""
        n, q, j, e = self.n, self.q, self.j, self.e
        f3 = Fraction(8 * (q - 1) ** 3 * (n - 2) * (n - 1), q**3 * n**2)
        f2 = 8 * (q - 1) ** 2 * (n - 1) * self.A / (q**3 * n**2 * (q + j - 1))
        f1 = 8 * (q - 1) * ((e * q - self.B) ** 2 + self.C) / (q**3 * n**2)
        a = self.a
        f0 = 8 * (a * a * (2 - q - j) + self.D * a + self.E) / (q**3 * n**3)
        return f0, f1, f2, f3


def closed3_params(space: Space, d) -> ClosedForm3:
    n, q = space.n, space.q
    j = as_rational(j_of_d(space, d))
    if j.denominator != 1 or not range_params(space).in_j3(j):
        raise DomainError(f"j={j} is not in the m=3 range for (q,n)=({q},{n})")
    j = int(j)
    mod = q * (j + q - 1)
    r = (j * (n - 1)) % mod or mod
    e = Fraction(r, mod)
    d0 = n - Fraction(j * (n - 1), mod)
    assert (d0 + e).denominator == 1
    a = Fraction((n - 1) * (q - 1) * (q + j), q + j - 1) + e * q
    A = -j * j + (2 * e * q - 1) * j + (q - 1) * (2 * n + 2 * e * q + q - 4)
    B = (j * (j - 2) - n * (q - 1) + Fraction(q, 2) * (3 * j + q - 1)) / (j + q - 1)
    C = -j * j + (2 - q) * j + (3 * n - 2) * (q - 1) - Fraction(q * q, 4)
    D = Fraction((j + q - 1) * (2 * n * (q - 1) - q) + q)
    E = Fraction(-n * (n - 1) * (q - 1) ** 2 * (j + q))
    return ClosedForm3(Fraction(j), e, r, d0, a, A, B, C, D, E, n, q)


def closed3(space: Space, d) -> tuple[BoundReport, ClosedForm3]:
    """Closed-form refined bound for the m = 3 range."""
    d, s = _d_and_s(space, d)
    cf = closed3_params(space, d)
    q, a, j = space.q, cf.a, cf.j
    value = a * (a + q) * d * q / (a * a * (2 - q - j) + cf.D * a + cf.E)
    return BoundReport(space, d, s, "closed3", value), cf


@dataclass(frozen=True)
class ClosedForm4:
    j: Fraction
    d0: Fraction
    e: Fraction
    b: int
    C1: Fraction
    C2: Fraction


def closed4_params(space: Space, d) -> ClosedForm4:
    n, q = space.n, space.q
    j = as_rational(j_of_d(space, d))
    if j.denominator != 1 or not range_params(space).in_j4(j):
        raise DomainError(f"j={j} is not in the m=4 range for (q,n)=({q},{n})")
    d0 = n - 1 - (j - q + 1) * (n - 2) / (q * j)
    b = math.floor(d0) + 1
    e = b - d0
    C1 = j * (q - 1) * (2 * n - 1) + j - q
    C2 = (q - 1) * (n - 1) * ((q - 1) * (j + 1) * n + 2 * (j - q + 1))
    return ClosedForm4(j, d0, e, b, C1, C2)


def closed4_polynomial(space: Space, d) -> ImprovedPolynomial:
    """``(t+1)(t-1+2b/n)(t-1+2(b-1)/n)(t-s)`` built and checked."""
    d, s = _d_and_s(space, d)
    cf = closed4_params(space, d)
    n = space.n
    gam = sorted([1 - Fraction(2 * cf.b, n), 1 - Fraction(2 * (cf.b - 1), n), s])
    return build(SnapPlan(tuple(gam), 1), space)


def closed4(space: Space, d, *, check: bool = True) -> tuple[BoundReport, ClosedForm4]:
    """Closed-form refined bound for the m = 4 range.

    The formula is only a bound when the expansion is non-negative, so by
    default that is verified and :class:`InfeasibleRefinement` is raised
    otherwise.
    """
    d, s = _d_and_s(space, d)
    cf = closed4_params(space, d)
    n, q, j, b = space.n, space.q, cf.j, cf.b
    poly = None
    if check:
        poly = closed4_polynomial(space, d)
        if not poly.feasible:
            raise InfeasibleRefinement(
                f"negative coefficients at {list(poly.feasibility.negative)}", poly)
    value = Fraction(q**3 * b * (b - 1)) * (n * (q - 1) - j - q + 2) / (
        (1 - j) * q * q * b * b + cf.C1 * q * b - cf.C2)
    return BoundReport(space, d, s, "closed4", value, polynomial=poly), cf


# ---------------------------------------------------------------------------
# Asymptotics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticEstimate:
    """``sum coef * n**exponent`` with exact coefficients and exponents."""

    label: str
    terms: tuple[tuple[Fraction, Fraction], ...]  # (coefficient, exponent), descending

    @property
    def leading(self) -> tuple[Fraction, Fraction]:
        return self.terms[0]

    def evaluate(self, n) -> float:
        return float(sum(float(c) * float(n) ** float(x) for c, x in self.terms if c))

    def exact(self, n: int) -> Fraction:
        if any(x.denominator != 1 for _, x in self.terms):
            raise ValueError("non-integral exponent; use evaluate()")
        return sum((c * Fraction(n) ** int(x) for c, x in self.terms), Fraction(0))


def _collect(terms) -> tuple[tuple[Fraction, Fraction], ...]:
    acc: dict[Fraction, Fraction] = {}
    for c, x in terms:
        acc[Fraction(x)] = acc.get(Fraction(x), Fraction(0)) + Fraction(c)
    return tuple((c, x) for x, c in sorted(acc.items(), reverse=True) if c)


def asympt3(q: int, *, j=None, alpha=0, c=None) -> AsymptoticEstimate:
    """Large-``n`` estimate of the m = 3 closed form with ``j = c n^alpha``.

    ``alpha < 1/5`` gives ``[(q-1)n-(j+q-2)](j+q)+j(j+q-1)^2`` (for
    ``alpha = 0`` pass ``j``); ``1/5 <= alpha < 1/2`` gives
    ``(q-1)(q+j)n + j^3 + c^5 n^{5alpha-1}/(q-1)``; ``alpha = 1/2`` gives the
    two-term ``n^{3/2}``, ``n`` expansion.
    """
    alpha = Fraction(alpha)
    if not 0 <= alpha <= Fraction(1, 2):
        raise DomainError("alpha must lie in [0, 1/2]")
    if alpha == 0:
        if j is None:
            j = c
        j = Fraction(j)
        lin = (q - 1) * (j + q)
        const = -(j + q - 2) * (j + q) + j * (j + q - 1) ** 2
        return AsymptoticEstimate("m3 alpha<1/5", _collect([(lin, 1), (const, 0)]))
    if c is None:
        raise DomainError("c is required when alpha > 0")
    c = Fraction(c)
    if alpha < Fraction(1, 5):
        # expand [(q-1)n - (j+q-2)](j+q) + j(j+q-1)^2 with j = c n^alpha
        t = [
            ((q - 1) * q, 1), ((q - 1) * c, 1 + alpha),
            (-(q - 2) * q, 0), (-(2 * q - 2) * c, alpha), (-c * c, 2 * alpha),
            (c * (q - 1) ** 2, alpha), (2 * (q - 1) * c * c, 2 * alpha), (c**3, 3 * alpha),
        ]
        return AsymptoticEstimate("m3 alpha<1/5", _collect(t))
    if alpha < Fraction(1, 2):
        t = [((q - 1) * q, 1), ((q - 1) * c, 1 + alpha), (c**3, 3 * alpha),
             (c**5 / (q - 1), 5 * alpha - 1)]
        return AsymptoticEstimate("m3 1/5<=alpha<1/2", _collect(t))
    den = q - 1 - c * c
    if den <= 0:
        raise DomainError("c^2 must be below q-1 when alpha = 1/2")
    lead = c * (q - 1) ** 2 / den
    second = (q - 1) * (c**4 - (q - 1) * (3 * c * c - q * q + q)) / den**2
    return AsymptoticEstimate("m3 alpha=1/2", ((lead, Fraction(3, 2)), (second, Fraction(1))))


def asympt4_c_limit(space: Space) -> float:
    """Upper end of the admissible ``c``: ``(q-1)(1 - 2/(S_1+S_2))``."""
    rp = range_params(space)
    return (space.q - 1) * (1 - 2 / (math.sqrt(rp.s1_squared) + math.sqrt(rp.s2_squared)))


def asympt4(space: Space, c) -> AsymptoticEstimate:
    """``q(q-1)^2 n^2 / (2(q-c))`` for ``j = (S_1-q)/2 + c`` in the m = 4 range."""
    c = Fraction(c)
    if not 0 <= c < asympt4_c_limit(space):
        raise DomainError(f"c={c} outside [0, {asympt4_c_limit(space):.6f})")
    q = space.q
    return AsymptoticEstimate("m4", ((Fraction(q * (q - 1) ** 2, 2) / (q - c), Fraction(2)),))


def asympt4_distance(space: Space, c) -> int:
    """Grid distance in the m = 4 range nearest to ``s = (S_1 - n(q-2) + 2c + q - 4)/(nq)``.

    Plain rounding can land just outside the range (for q = 2 the range
    holds at most one grid point), so only in-range distances compete.
    """
    n, q = space.n, space.q
    rp = range_params(space)
    s = (math.sqrt(rp.s1_squared) - n * (q - 2) + 2 * float(c) + q - 4) / (n * q)
    ds = rp.d_range(4)
    if not ds:
        raise DomainError(f"no grid distance in the m=4 range for (q,n)=({q},{n})")
    return min(ds, key=lambda d: abs(1 - 2 * d / n - s))
