"""KKT certificates of LP optimality for improving polynomials.

With ``g(z) = f(1 - 2z/n)/f_0 = 1 + sum_l (f_l/f_0) K_l(z)/r_l`` the
multipliers ``mu_i`` live on the distances where ``g`` vanishes and are
fixed by ``sum_i mu_i K_l(i)/r_l = -1`` for every ``l`` with ``f_l > 0``.
The remaining ``lambda_l = 1 + sum_i mu_i K_l(i)/r_l`` must be
non-negative, as must every ``mu_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .krawtchouk import Space
from .numkit import SingularSystemError, solve_exact
from .refine import closed3_params, refined_bound


@dataclass(frozen=True)
class WeightParams:
    A: Fraction
    B: Fraction
    C: Fraction
    D: Fraction
    E: Fraction


def weight_params(space: Space, d) -> tuple[WeightParams, Fraction, Fraction, Fraction]:
    """Parameters of the closed-form multipliers plus ``(j, e, d_0)`` for an m = 3 instance."""
    cf = closed3_params(space, d)
    n, q, j, e = space.n, space.q, cf.j, cf.e
    g = j + q - 1
    A = (-(q + j - 2) * (e * q * g) ** 2
         + (n - 1) * (q - 1) * (j + q) * (n * (q - 1) - j * (q + j - 2))
         + e * q * g * ((q * q + j * q - q - 2 * j) * (q + j - 2) + 2 * n * (q - 1)))
    B = (n - 2 + j) * (q - 1) + j * (j - 1) + e * q * g
    C = (n - 1) * (q - 1) * (j + q) + e * q * g
    D = ((n - 1) * (q - 1) + (2 * e - 1) * g * Fraction(q, 2)) ** 2 + g * g * ((n - 1) * (q - 1) - Fraction(q * q, 4))
    E = g**3 * ((n - 1) * (q - 2) + n - j)
    return WeightParams(*(Fraction(x) for x in (A, B, C, D, E))), j, e, cf.d0


def weights3_closed(space: Space, d) -> dict[int, Fraction]:
    """Closed-form multipliers at distances ``d``, ``d_0+e-1`` and ``d_0+e``."""
    p, j, e, d0 = weight_params(space, d)
    n, q = space.n, space.q
    g = q * (j + q - 1)
    if p.B == 0 or p.A == 0 or p.B + g == 0:
        raise SingularSystemError("degenerate parameters (B = 0)")
    b = int(d0 + e)
    return {
        int(d): n * (q - 1) * p.C * p.D * (p.C + g) / (p.A * p.B * (p.B + g)),
        b - 1: e * n * (q - 1) * p.E * (p.C + g) / (p.A * p.B),
        b: (1 - e) * n * (q - 1) * p.C * p.E / (p.A * (p.B + g)),
    }


def weights_solve(space: Space, roots, m: int) -> dict[int, Fraction]:
    """Solve ``sum_i mu_i K_l(i)/r_l = -1`` for ``l = 1..m`` over the given distances."""
    roots = sorted(int(i) for i in roots)
    if len(roots) != m:
        raise ValueError(f"need {m} distances, got {len(roots)}")
    tab = space.table
    rows = [[tab.k(l, i) / tab.r(l) for i in roots] for l in range(1, m + 1)]
    sol = solve_exact(rows, [Fraction(-1)] * m)
    return dict(zip(roots, sol))


def lambdas(space: Space, mu: dict[int, Fraction], through: int | None = None) -> list[Fraction]:
    """``lambda_l = 1 + sum_i mu_i K_l(i)/r_l`` for ``l = 1..through``."""
    through = space.n if through is None else through
    tab = space.table
    cols = {i: tab.column(i, through) for i in mu}
    return [
        1 + sum(w * cols[i][l] for i, w in mu.items()) / tab.r(l)
        for l in range(1, through + 1)
    ]


@dataclass(frozen=True)
class Certificate:
    d: int
    mu: dict[int, Fraction]
    lambdas: tuple[Fraction, ...]
    verdict: str  # lp_optimal | not_optimal | inconclusive
    witness: str = ""
    value: Fraction | None = None

    @property
    def optimal(self) -> bool:
        return self.verdict == "lp_optimal"


def certify(space: Space, d) -> Certificate:
    """Check whether the refined polynomial for ``d`` attains the LP optimum."""
    d = int(d)
    rep = refined_bound(space, d)
    imp = rep.polynomial
    if rep.method != "refined" or imp is None or imp.expansion is None:
        return Certificate(d, {}, (), "inconclusive", "no feasible improving polynomial", rep.value)
    plan = imp.plan
    deg = plan.degree
    nodes = list(plan.gammas) + [Fraction(-1)] * plan.epsilon
    if len(set(nodes)) != len(nodes) or deg > space.n:
        return Certificate(d, {}, (), "inconclusive", "repeated roots or degree above n", rep.value)
    dists = []
    for t in nodes:
        z = space.d_of_t(t)
        assert z.denominator == 1, "snapped node is not an integer distance"
        dists.append(int(z))
    coeffs = imp.expansion.coeffs
    if any(coeffs[l] <= 0 for l in range(1, deg + 1)):
        return Certificate(d, {}, (), "inconclusive", "some f_l vanishes", rep.value)
    try:
        mu = weights_solve(space, dists, deg)
    except SingularSystemError:
        return Certificate(d, {}, (), "inconclusive", "singular multiplier system", rep.value)
    lam = tuple(lambdas(space, mu))
    bad_mu = [i for i in sorted(mu) if mu[i] < 0]
    bad_lam = [l for l, v in enumerate(lam, start=1) if v < 0]
    if bad_mu:
        return Certificate(d, mu, lam, "not_optimal", f"mu_{bad_mu[0]} < 0", rep.value)
    if bad_lam:
        return Certificate(d, mu, lam, "not_optimal", f"lambda_{bad_lam[0]} < 0", rep.value)
    return Certificate(d, mu, lam, "lp_optimal", "", rep.value)
