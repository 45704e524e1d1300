"""Command-line front end.

Exit status: 0 on success, 2 for invalid input, 3 when an internal
consistency check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import codes, delsarte_lp, kkt, refine
from .krawtchouk import Space
from .levenshtein import RootAnomalyError, classify, distances_in_regime
from .numkit import DEFAULT_PRECISION, format_rational, log2_rational

WORKERS_ENV = "LEVREFINE_WORKERS"
EXACT_LIMIT = 400
SCHEMA_VERSION = 1


class InputError(ValueError):
    pass


class Inconsistency(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def int_range(text: str) -> list[int]:
    """``"5"``, ``"2..5"`` or ``"2,3,7"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _space(q: int, n: int) -> Space:
    try:
        return Space(n, q)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _check_d(space: Space, d: int) -> None:
    if not 1 <= d <= space.n:
        raise InputError(f"d={d} must lie in [1, {space.n}] for n={space.n}")


def _mode(args, n: int) -> str:
    if args.mode == "auto":
        return "exact" if n <= EXACT_LIMIT else "bigfloat"
    return args.mode


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    if hasattr(v, "value"):  # BigFloat
        return str(float(v))
    return str(v)


def workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Ordered map, optionally over a process pool; output order never depends on workers."""
    items = list(items)
    w = workers()
    if w == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * w))))


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def emit(rows: list[dict], fields: list[str], fmt: str, out) -> None:
    if fmt == "json":
        payload = {"schema_version": SCHEMA_VERSION,
                   "rows": [{k: _json_value(r.get(k)) for k in fields} for r in rows]}
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r.get(k)) for k in fields])
    else:
        for r in rows:
            out.write("  ".join(f"{k}={_fmt(r.get(k))}" for k in fields) + "\n")


def _json_value(v):
    if isinstance(v, (Fraction,)) or hasattr(v, "precision_bits"):
        return _fmt(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _bound_row(space: Space, d: int, method: str, mode: str) -> dict:
    row = {"q": space.q, "n": space.n, "d": d, "s": space.t_of_d(d)}
    if method in ("levenshtein", "all", "refined"):
        lev = refine.levenshtein_report(space, d)
        row["m"] = lev.frame.m
        row["levenshtein"] = lev.value
    if method in ("refined", "all"):
        rep = refine.refined_bound(space, d, mode=mode, precision_bits=DEFAULT_PRECISION)
        row["refined"] = rep.value
        row["refined_method"] = rep.method
        row["integer_bound"] = rep.integer_bound
        if rep.polynomial is not None:
            imp = rep.polynomial
            row["roots"] = [format_rational(g) for g in
                            ([Fraction(-1)] * imp.plan.epsilon + list(imp.plan.gammas))]
            if imp.expansion is not None:
                row["expansion"] = [format_rational(c) for c in imp.expansion.coeffs]
            row["feasible"] = imp.feasibility.status
        if rep.diagnostics:
            row["diagnostics"] = list(rep.diagnostics)
        if isinstance(rep.value, Fraction) and rep.value > rep.levenshtein:
            raise Inconsistency(f"refined bound {rep.value} exceeds Levenshtein {rep.levenshtein}")
    if method in ("closed3", "all"):
        try:
            row["closed3"] = refine.closed3(space, d)[0].value
        except refine.DomainError as exc:
            if method == "closed3":
                raise InputError(str(exc)) from exc
    if method in ("closed4", "all"):
        try:
            row["closed4"] = refine.closed4(space, d)[0].value
        except (refine.DomainError, refine.InfeasibleRefinement) as exc:
            if method == "closed4":
                raise InputError(str(exc)) from exc
    if method in ("lp", "all"):
        row["lp"] = delsarte_lp.lp_bound(space, d).bound
    return row


BOUND_FIELDS = ["q", "n", "d", "s", "m", "levenshtein", "refined", "refined_method", "integer_bound",
                "closed3", "closed4", "lp", "roots", "expansion", "feasible", "diagnostics"]


def cmd_bound(args, out) -> None:
    space = _space(args.q, args.n)
    if args.s is not None:
        s = Fraction(args.s)
        if space.grid.index_of(s) is None:
            raise InputError(f"s={args.s} is not an inner product of H({args.n},{args.q})")
        d = int(space.d_of_t(s))
    else:
        d = args.d
    _check_d(space, d)
    row = _bound_row(space, d, args.method, _mode(args, space.n))
    fields = [f for f in BOUND_FIELDS if f in row]
    if args.format == "text":
        for f in fields:
            v = row[f]
            out.write(f"{f}: {' '.join(v) if isinstance(v, list) else _fmt(v)}\n")
    else:
        emit([row], fields, args.format, out)


def _scan_task(task):
    q, n, d, method, mode = task
    space = Space(n, q)
    return _bound_row(space, d, method, mode)


def cmd_scan(args, out) -> None:
    tasks = []
    for n in int_range(args.n):
        space = _space(args.q, n)
        if args.m:
            ds = distances_in_regime(space, int_range(args.m))
        elif args.d:
            ds = [d for d in int_range(args.d) if 1 <= d <= n]
        else:
            ds = list(range(1, n + 1))
        tasks.extend((args.q, n, d, args.method, _mode(args, n)) for d in ds)
    rows = parallel_map(_scan_task, tasks)
    fields = ["q", "n", "d", "s", "m", "levenshtein", "refined", "refined_method", "closed3",
              "closed4", "lp", "feasible"]
    fields = [f for f in fields if any(f in r for r in rows)] or ["q", "n", "d"]
    emit(rows, fields, args.format, out)


def cmd_rate(args, out) -> None:
    space = _space(args.q, args.n)
    rows = []
    for ratio in (Fraction(x) for x in args.ratios.split(",")):
        d = round(ratio * space.n)
        _check_d(space, d)
        lev = refine.levenshtein_report(space, d)
        rep = refine.refined_bound(space, d, mode=_mode(args, space.n))
        rows.append({
            "ratio": format_rational(ratio), "d": d, "m": lev.frame.m,
            "levenshtein_rate": f"{log2_rational(lev.value) / space.n:.3f}",
            "refined_rate": f"{rep.rate():.3f}",
            "levenshtein_rate_full": repr(log2_rational(lev.value) / space.n),
            "refined_rate_full": repr(rep.rate()),
        })
    fields = ["ratio", "d", "m", "levenshtein_rate", "refined_rate"]
    if args.format == "json":
        fields += ["levenshtein_rate_full", "refined_rate_full"]
    emit(rows, fields, args.format, out)


def _certify_task(task):
    q, n, d = task
    c = kkt.certify(Space(n, q), d)
    neg = [l for l, v in enumerate(c.lambdas, start=1) if v < 0]
    return {"q": q, "n": n, "d": d, "verdict": c.verdict, "witness": c.witness,
            "value": c.value, "negative_lambdas": " ".join(map(str, neg))}


def cmd_certify(args, out) -> None:
    tasks = []
    for n in int_range(args.n):
        space = _space(args.q, n)
        if args.d and not args.all_d:
            ds = [d for d in int_range(args.d) if 1 <= d <= n]
        else:
            ds = distances_in_regime(space, (3,))
        tasks.extend((args.q, n, d) for d in ds)
    rows = parallel_map(_certify_task, tasks)
    emit(rows, ["q", "n", "d", "value", "verdict", "witness", "negative_lambdas"], args.format, out)


def cmd_table2(args, out) -> None:
    qs = int_range(args.q)
    rows = codes.enumerate_candidates(qs, args.n_max, strict=not args.all_integral,
                                      only_passing=not args.include_failing)
    if args.format == "json":
        out.write(codes.to_json(rows) + "\n")
    elif args.format == "csv":
        out.write(codes.to_csv(rows))
    else:
        for r in rows:
            rec = r.as_record()
            out.write(f"{rec['q']} {rec['n']} {rec['d']} L3={rec['L3']} refined={rec['refined']} "
                      f"ip=[{', '.join(rec['inner_products'])}] dist=[{', '.join(rec['distribution'])}]"
                      f"{' ' + rec['note'] if rec['note'] else ''}"
                      f"{' !' + ' | '.join(rec['anomalies']) if rec['anomalies'] else ''}\n")
    missing = codes.missing_reference_rows(rows, qs, args.n_max)
    if missing:
        sys.stderr.write(f"reference rows not reproduced: {missing}\n")


def _compare_task(task):
    q, n, d, cap = task
    c = delsarte_lp.compare(Space(n, q), d, lp_cap=cap)
    return {"q": q, "n": n, "d": d, "s": c.s, "refined": c.refined, "lp": c.lp,
            "equal": c.equal, "certificate": c.certificate}


def cmd_compare(args, out) -> None:
    tasks = []
    for n in int_range(args.n):
        space = _space(args.q, n)
        ds = [d for d in int_range(args.d) if 1 <= d <= n] if args.d else list(range(1, n + 1))
        tasks.extend((args.q, n, d, args.lp_cap) for d in ds)
    rows = parallel_map(_compare_task, tasks)
    emit(rows, ["q", "n", "d", "s", "refined", "lp", "equal", "certificate"], args.format, out)


def _sq_task(task):
    q, n, cap = task
    r = delsarte_lp.sq_scan(Space(n, q), lp_cap=cap)
    return {"q": q, "n": n, "sigma": r.sigma, "sigma_float": f"{float(r.sigma):.6f}",
            "first_failure_d": r.first_failure if r.first_failure is not None else "none",
            "mode": r.mode}


def cmd_sq(args, out) -> None:
    tasks = [(args.q, n, args.lp_cap) for n in int_range(args.n) if n >= 2]
    rows = parallel_map(_sq_task, tasks)
    emit(rows, ["q", "n", "sigma", "sigma_float", "first_failure_d", "mode"], args.format, out)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levrefine", description="Levenshtein-type bounds for q-ary codes")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="text"):
        sp.add_argument("--format", choices=("text", "csv", "json"), default=fmt)
        sp.add_argument("--mode", choices=("auto", "exact", "bigfloat"), default="auto")

    b = sub.add_parser("bound", help="bounds for a single (q, n, d)")
    b.add_argument("--q", type=int, required=True)
    b.add_argument("--n", type=int, required=True)
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--d", type=int)
    g.add_argument("--s", help="inner product p/q; must be a grid value")
    b.add_argument("--method", choices=("refined", "levenshtein", "closed3", "closed4", "lp", "all"),
                   default="refined")
    common(b)
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("scan", help="bounds over ranges of n and d")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--n", required=True, help="e.g. 5..40")
    s.add_argument("--d", help="distance range; default all")
    s.add_argument("--m", help="restrict to Levenshtein regimes, e.g. 5 or 3,4")
    s.add_argument("--method", choices=("refined", "levenshtein", "closed3", "closed4", "lp", "all"),
                   default="refined")
    common(s, "csv")
    s.set_defaults(func=cmd_scan)

    r = sub.add_parser("rate", help="rates log2(bound)/n at given d/n ratios")
    r.add_argument("--q", type=int, default=2)
    r.add_argument("--n", type=int, default=1000)
    r.add_argument("--ratios", default="0.25,0.30,0.35,0.40,0.45")
    common(r, "csv")
    r.set_defaults(func=cmd_rate)

    c = sub.add_parser("certify", help="KKT certificates in the m = 3 range")
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--n", required=True)
    c.add_argument("--d")
    c.add_argument("--all-d", action="store_true")
    common(c, "csv")
    c.set_defaults(func=cmd_certify)

    t = sub.add_parser("table2", help="putative codes meeting the refined m = 3 bound")
    t.add_argument("--q", default="2..5")
    t.add_argument("--n-max", type=int, default=100)
    t.add_argument("--include-failing", action="store_true", help="also list rows failing integrality")
    t.add_argument("--all-integral", action="store_true",
                   help="do not require a strict improvement over the Levenshtein bound")
    common(t, "csv")
    t.set_defaults(func=cmd_table2)

    cp = sub.add_parser("compare", help="refined bound against the exact LP optimum")
    cp.add_argument("--q", type=int, required=True)
    cp.add_argument("--n", required=True)
    cp.add_argument("--d")
    cp.add_argument("--lp-cap", type=int, default=64)
    common(cp, "csv")
    cp.set_defaults(func=cmd_compare)

    sq = sub.add_parser("sq", help="largest s below which refined = LP, per n")
    sq.add_argument("--q", type=int, required=True)
    sq.add_argument("--n", required=True)
    sq.add_argument("--lp-cap", type=int, default=64)
    common(sq, "csv")
    sq.set_defaults(func=cmd_sq)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except (InputError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (Inconsistency, RootAnomalyError, delsarte_lp.LPInconsistency, AssertionError) as exc:
        sys.stderr.write(f"internal inconsistency: {exc}\n")
        return 3
    out.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
