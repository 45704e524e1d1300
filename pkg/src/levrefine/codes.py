"""Putative codes attaining refined m = 3 bounds.

A code meeting ``f(1)/f_0`` for a cubic improving polynomial only uses
inner products among the roots of ``f`` and is a 3-design, which pins
down the distance distribution seen from every codeword.  When that
distribution is not a vector of non-negative integers, no such code
exists.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .krawtchouk import Space
from .levenshtein import distances_in_regime
from .numkit import format_rational, solve_exact
from .refine import refined_bound

SCHEMA_VERSION = 1


def distance_distribution(space: Space, M, distances) -> dict[int, Fraction]:
    """Solve ``sum_delta A_delta K_l(delta) = -r_l`` for ``l = 1..len(distances)``.

    ``M`` is not needed for the solve; it is only used by
    :class:`PutativeCode` to check that the counts add up to ``M - 1``.
    """
    ds = sorted(int(x) for x in distances)
    m = len(ds)
    tab = space.table
    rows = [[tab.k(l, x) for x in ds] for l in range(1, m + 1)]
    sol = solve_exact(rows, [-space.r(l) for l in range(1, m + 1)])
    return dict(zip(ds, sol))


def integrality_test(distribution) -> bool:
    values = distribution.values() if isinstance(distribution, dict) else distribution
    return all(Fraction(v).denominator == 1 and v >= 0 for v in values)


@dataclass(frozen=True)
class PutativeCode:
    space: Space
    d: int
    M: int
    inner_products: tuple[Fraction, ...]  # ascending
    distribution: dict[int, Fraction]

    @property
    def distances(self) -> tuple[int, ...]:
        return tuple(int(self.space.d_of_t(t)) for t in self.inner_products)

    @property
    def consistent(self) -> bool:
        return sum(self.distribution.values()) == self.M - 1

    @property
    def nonnegative(self) -> bool:
        return all(v >= 0 for v in self.distribution.values())

    @property
    def integral(self) -> bool:
        return integrality_test(self.distribution)

    def ordered_distribution(self) -> tuple[Fraction, ...]:
        """Counts listed by ascending inner product (descending distance)."""
        return tuple(self.distribution[z] for z in self.distances)


def putative_code(space: Space, d: int, report=None) -> PutativeCode | None:
    """The code that would attain the refined bound at ``d``, if that bound is an integer."""
    rep = report or refined_bound(space, d)
    if rep.polynomial is None or not isinstance(rep.value, Fraction) or rep.value.denominator != 1:
        return None
    plan = rep.polynomial.plan
    roots = sorted(set(plan.gammas) | ({Fraction(-1)} if plan.epsilon else set()))
    dists = [space.d_of_t(t) for t in roots]
    dist = distance_distribution(space, int(rep.value), dists)
    return PutativeCode(space, d, int(rep.value), tuple(roots), dist)


# ---------------------------------------------------------------------------
# Reference rows
# ---------------------------------------------------------------------------

# (q, n, d, L3 as printed, refinement, inner products as printed, distribution)
REFERENCE_TABLE2 = (
    (2, 12, 5, "62.50", 60, "-1/2, -1/3, -1/6", (5, 15, 39)),
    (2, 56, 25, "1135", 1100, "-5/28, -1/7, 3/28", (175, 275, 649)),
    (2, 90, 41, "2863.69", 2788, "-2/15, -1/9, 4/45", (492, 697, 1598)),
    (2, 96, 45, "1161", 1155, "-1/6, -7/48, 1/16", (90, 252, 812)),
    (3, 4, 2, "33", 27, "-1, -1/2, 0", (6, 8, 12)),
    (3, 7, 4, "57", 54, "-1, -5/7, -1/7", (4, 14, 35)),
    (3, 20, 12, "312.429", 306, "-7/10, -3/5, -1/5", (16, 85, 204)),
    (3, 25, 15, "531", 513, "-3/5, -13/25, -1/5", (114, 75, 323)),
    (3, 27, 16, "874", 840, "-5/9, -13/27, -5/27", (272, 84, 483)),
    (3, 40, 24, "2421", 2349, "-1/2, -9/20, -1/5", (928, 144, 1276)),
    (3, 52, 32, "2094", 2052, "-1/2, -6/13, -3/13", (608, 208, 1235)),
    (3, 88, 55, "5745", 5670, "-5/11, -19/44, -1/4", (1925, 440, 3304)),
    (4, 4, 2, "83.20", 64, "-1, -1/2, 0", (21, 24, 18)),
    (4, 5, 3, "76", 64, "-1, -3/5, -1/5", (18, 15, 30)),
    (4, 8, 5, "182.50", 160, "-1, -3/4, -1/4", (15, 60, 84)),
    (4, 9, 6, "136", 128, "-1, -7/9, -1/3", (16, 27, 84)),
    (4, 11, 7, "364", 320, "-9/11, -7/11, -3/11", (99, 55, 165)),
    (4, 13, 9, "196", 192, "-1, -11/13, -5/13", (9, 39, 143)),
    (4, 18, 12, "697.6", 640, "-7/9, -2/3, -1/3", (135, 144, 360)),
    (4, 42, 30, "1190.59", 1184, "-16/21, -5/7, -1/7", (36, 259, 888)),
    (4, 49, 35, "1660", 1640, "-5/7, -33/49, -1/7", (205, 245, 1189)),
    (4, 56, 39, "7676.5", 7176, "-9/14, -17/28, -11/28", (1287, 2093, 3795)),
    (5, 4, 2, "167.86", 125, "-1, -1/2, 0", (52, 48, 24)),
    (5, 5, 3, "191.67", 125, "-1, -3/5, -1/5", (44, 40, 40)),
    (5, 6, 4, "145", 125, "-1, -2/3, -1/3", (44, 24, 60)),
    (5, 9, 6, "485", 375, "-1, -7/9, -1/3", (44, 162, 168)),
    (5, 11, 8, "265", 250, "-1, -9/11, -5/11", (40, 44, 165)),
    (5, 16, 12, "385", 375, "-1/ -7/8, -1/2", (30, 64, 280)),
    (5, 21, 16, "505", 500, "-1, -19/21, -11/21", (16, 84, 399)),
    (5, 25, 18, "3621", 3645, "-19/25, -17/25, -11/25", (1638, 132, 1694)),
    (5, 45, 34, "3649", 3250, "-7/9, -11/15, -23/45", (429, 792, 2028)),
    (5, 55, 42, "3705.8", 3675, "-43/55, -41/55, -29/55", (132, 1078, 2464)),
    (5, 72, 56, "3257.26", 3250, "-29/36, -7/9, -5/9", (64, 585, 2600)),
    (5, 75, 57, "12141", 11970, "-53/75, -17/25, -39/75", (4617, 608, 6744)),
    (5, 91, 70, "9725", 9625, "-5/7, -9/13, -49/91", (2695, 780, 6149)),
    (5, 92, 70, "26339.3", 25025, "-16/23, -31/46, -12/23", (7084, 4784, 13156)),
    (5, 100, 76, "55841", 55195, "-17/25, -33/50, -13/25", (26809, 912, 27473)),
)

# rows where the best known upper bound is already met
KNOWN_TIGHT = {(3, 4, 2), (4, 5, 3), (4, 11, 7), (5, 4, 2), (5, 5, 3), (5, 6, 4), (5, 11, 8)}
KNOWN_LOWER = {(4, 11, 7): 128}


def reference_row(q: int, n: int, d: int):
    for row in REFERENCE_TABLE2:
        if row[:3] == (q, n, d):
            return row
    return None


def parse_inner_products(text: str) -> tuple[Fraction, ...] | None:
    """Parse ``"-1/2, -1/3, 1/6"``; ``None`` when the entry is malformed."""
    try:
        return tuple(Fraction(part.strip().replace(" ", "")) for part in text.split(","))
    except (ValueError, ZeroDivisionError):
        return None


def brouwer_cross_note(row: "Table2Row") -> str:
    key = (row.q, row.n, row.d)
    notes = []
    if key in KNOWN_TIGHT:
        notes.append("*")
    if key in KNOWN_LOWER:
        notes.append(f"lower bound {KNOWN_LOWER[key]}")
    return "; ".join(notes)


# ---------------------------------------------------------------------------
# Table rows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Table2Row:
    q: int
    n: int
    d: int
    L3_value: Fraction
    refined_value: int
    inner_products: tuple[Fraction, ...]
    distribution: tuple[Fraction, ...]
    integrality_pass: bool
    nonnegative: bool
    brouwer_note: str = ""
    anomalies: tuple[str, ...] = field(default=())

    def as_record(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "d": self.d,
            "L3": format_rational(self.L3_value),
            "refined": self.refined_value,
            "inner_products": [format_rational(t) for t in self.inner_products],
            "distribution": [format_rational(a) for a in self.distribution],
            "integral": self.integrality_pass,
            "nonnegative": self.nonnegative,
            "note": self.brouwer_note,
            "anomalies": list(self.anomalies),
        }


def reference_anomalies(row: Table2Row) -> tuple[str, ...]:
    """Differences between a computed row and the printed reference, if one exists."""
    ref = reference_row(row.q, row.n, row.d)
    if ref is None:
        return ()
    _, _, _, l3_text, ref_value, ip_text, ref_dist = ref
    out = []
    if ref_value > float(l3_text):
        out.append(f"reference refinement {ref_value} exceeds reference L3 {l3_text}")
    if ref_value != row.refined_value:
        out.append(f"refinement {row.refined_value} differs from reference {ref_value}")
    decimals = len(l3_text.split(".")[1]) if "." in l3_text else 0
    if abs(float(row.L3_value) - float(l3_text)) > 10.0**-decimals:
        out.append(f"L3 {float(row.L3_value):.4f} differs from reference {l3_text}")
    parsed = parse_inner_products(ip_text)
    if parsed is None:
        out.append(f"reference inner products malformed: {ip_text!r}")
    elif parsed != row.inner_products:
        flipped = tuple(sorted(parsed[:-1] + (-parsed[-1],)))
        if flipped == row.inner_products:
            out.append(f"reference lists s with the wrong sign: {ip_text!r}")
        else:
            out.append(f"inner products differ from reference {ip_text!r}")
    if tuple(ref_dist) != tuple(row.distribution):
        out.append(f"distribution differs from reference {ref_dist}")
    return tuple(out)


def enumerate_candidates(q_range, n_max: int, *, n_min: int = 3, strict: bool = True,
                         only_passing: bool = False) -> list[Table2Row]:
    """Rows for every ``(q, n, d)`` whose refined bound could be met by a code.

    A candidate has a cubic improving polynomial and an integral refined
    bound; with ``strict`` it must also beat the Levenshtein bound.
    """
    rows = []
    for q in q_range:
        for n in range(max(n_min, 2), n_max + 1):
            space = Space(n, q)
            for d in distances_in_regime(space, (3, 4)):
                row = candidate_row(space, d, strict=strict)
                if row is not None and (row.integrality_pass or not only_passing):
                    rows.append(row)
    rows.sort(key=lambda r: (r.q, r.n, r.d))
    return rows


def candidate_row(space: Space, d: int, *, strict: bool = True) -> Table2Row | None:
    rep = refined_bound(space, d)
    if rep.method != "refined" or rep.polynomial.plan.degree != 3:
        return None
    if rep.value.denominator != 1 or (strict and not rep.value < rep.levenshtein):
        return None
    code = putative_code(space, d, rep)
    row = Table2Row(
        space.q, space.n, d, rep.levenshtein, int(rep.value), code.inner_products,
        code.ordered_distribution(), code.integral, code.nonnegative,
    )
    note = brouwer_cross_note(row)
    return Table2Row(**{**row.__dict__, "brouwer_note": note, "anomalies": reference_anomalies(row)})


def missing_reference_rows(rows, q_range, n_max: int) -> list[tuple]:
    have = {(r.q, r.n, r.d) for r in rows}
    return [ref[:3] for ref in REFERENCE_TABLE2 if ref[0] in q_range and ref[1] <= n_max and ref[:3] not in have]


@dataclass(frozen=True)
class IntegralityCount:
    q: int
    passing: int
    candidates: int


def integrality_counts(rows) -> list[IntegralityCount]:
    by_q: dict[int, list[Table2Row]] = {}
    for r in rows:
        by_q.setdefault(r.q, []).append(r)
    return [IntegralityCount(q, sum(r.integrality_pass for r in rs), len(rs)) for q, rs in sorted(by_q.items())]


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

CSV_FIELDS = ("q", "n", "d", "L3", "refined", "inner_products", "distribution",
              "integral", "nonnegative", "note", "anomalies")


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        rec = r.as_record()
        w.writerow([
            rec["q"], rec["n"], rec["d"], rec["L3"], rec["refined"],
            " ".join(rec["inner_products"]), " ".join(rec["distribution"]),
            int(rec["integral"]), int(rec["nonnegative"]), rec["note"], " | ".join(rec["anomalies"]),
        ])
    return buf.getvalue()


def to_json(rows) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, "rows": [r.as_record() for r in rows]},
                      indent=2, sort_keys=True)
