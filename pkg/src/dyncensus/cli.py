"""Command-line front end.

Subcommands: field (print a field descriptor), census (run and verify a
family census), verify (recheck stored reports or a built-in grid),
search-connected (one-component quadratic maps per prime), and export
(functional graph of a single map as DOT or JSON).

Exit codes: 0 success, 1 verification failure, 2 usage or parameter
error, 3 budget or resource exhaustion.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import os
import sys

from . import __version__
from .census import BudgetExceededError, DEFAULT_BUDGET, run_census
from .dynmaps import FamilySpec, InvalidSpecError, PolyMap, RationalMap
from .funcgraph import analyze, build_graph, export_dot, stats_json
from .gfq import DomainTooLargeError, NonPrimeError, make_field
from .theory import verify_report

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

CSV_COLUMNS = ["p", "k", "q", "family", "params", "total", "classes", "best_bound", "exact", "pass"]


def _field_or_exit(p, k):
    try:
        return make_field(p, k)
    except (NonPrimeError, DomainTooLargeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from exc


def _family_from_args(args) -> FamilySpec:
    field = _field_or_exit(args.p, args.k)
    kw = {}
    if args.family in ("all-degree-d", "power"):
        if args.d is None:
            raise InvalidSpecError(f"--d is required for {args.family}")
        kw["d"] = args.d
    elif args.family == "sparse":
        if not args.exps:
            raise InvalidSpecError("--exps is required for sparse")
        kw["exps"] = tuple(int(e) for e in args.exps.split(","))
    elif args.family == "linearised":
        if args.n is None:
            raise InvalidSpecError("--n is required for linearised")
        kw["n"] = args.n
    elif args.family == "frobenius-affine":
        kw["norm_filter"] = args.norm
    elif args.family == "rational":
        if args.m is None or args.n is None:
            raise InvalidSpecError("--m and --n are required for rational")
        kw.update(m=args.m, n=args.n, alpha=args.alpha, model=args.model)
    return FamilySpec(kind=args.family, field=field, **kw)


def _report_json(report, config: dict) -> dict:
    out = report.to_json(with_meta=False)
    verification = verify_report(report)
    out["theory"] = verification.to_json()["checks"]
    out["pass"] = verification.overall
    out["config"] = config
    out["version"] = __version__
    out["meta"] = {
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "wall_time_s": report.wall_time,
        "workers": report.workers,
    }
    return out


def _best_bound(theory_checks):
    bounds = [
        c["value"]
        for c in theory_checks
        if c["kind"] == "upper_bound" and isinstance(c["value"], int)
    ]
    return min(bounds) if bounds else ""


def _exact_value(theory_checks):
    for c in theory_checks:
        if c["kind"] == "exact":
            return c["value"]
    return ""


def _append_csv(path, row):
    exists = os.path.exists(path)
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if not exists:
            writer.writeheader()
        writer.writerow(row)


def _cache_key(spec: FamilySpec) -> str:
    blob = json.dumps(
        {"family": spec.to_json(), "version": __version__}, sort_keys=True
    )
    return hashlib.sha256(blob.encode()).hexdigest()


def cmd_field(args) -> int:
    field = _field_or_exit(args.p, args.k)
    out = field.to_json()
    out["q"] = field.q
    out["primitive_element"] = field.primitive_element
    if field.q <= 64:
        out["norm_table"] = [field.norm(x) for x in range(field.q)]
        out["trace_table"] = [field.trace(x) for x in range(field.q)]
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_census(args) -> int:
    try:
        spec = _family_from_args(args)
    except InvalidSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    config = {
        "p": args.p, "k": args.k, "family": args.family, "d": args.d,
        "exps": args.exps, "n": args.n, "m": args.m, "alpha": args.alpha,
        "model": args.model, "norm": args.norm, "workers": args.workers,
        "budget": args.budget, "reduce": args.reduce, "verbose": args.verbose,
    }

    cache_file = None
    if args.cache:
        os.makedirs(args.cache, exist_ok=True)
        cache_file = os.path.join(args.cache, _cache_key(spec) + ".json")
    if cache_file and os.path.exists(cache_file):
        with open(cache_file) as fh:
            out = json.load(fh)
        out["config"] = config  # echo the invocation, not the cached one
    else:
        try:
            report = run_census(
                spec,
                workers=args.workers,
                budget=args.budget,
                reduce=args.reduce,
                checkpoint_path=args.checkpoint,
                collect_members=args.verbose,
            )
        except BudgetExceededError as exc:
            print(f"error: {exc}", file=sys.stderr)
            if exc.checkpoint_path:
                print(f"checkpoint: {exc.checkpoint_path}", file=sys.stderr)
            return EXIT_BUDGET
        out = _report_json(report, config)
        if cache_file:
            with open(cache_file, "w") as fh:
                json.dump(out, fh, sort_keys=True)

    text = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)

    if args.csv:
        _append_csv(args.csv, {
            "p": args.p, "k": args.k, "q": out["field"]["p"] ** out["field"]["k"],
            "family": args.family, "params": spec.params_label(),
            "total": out["total"], "classes": out["classes"],
            "best_bound": _best_bound(out["theory"]),
            "exact": _exact_value(out["theory"]),
            "pass": out["pass"],
        })
    return EXIT_OK if out["pass"] else EXIT_VERIFY_FAILED


def _verify_stored(path) -> bool:
    """Recheck a stored report: recompute the census for its family and
    compare both the stored observation and the theory predictions."""
    with open(path) as fh:
        stored = json.load(fh)
    fam = stored["family"]
    field = make_field(fam["field"]["p"], fam["field"]["k"])
    kw = {}
    for name in ("d", "n", "m"):
        if name in fam:
            kw[name] = fam[name]
    if "exps" in fam:
        kw["exps"] = tuple(fam["exps"])
    if "alpha" in fam:
        kw["alpha"] = fam["alpha"]
        kw["model"] = fam["model"]
    if "norm" in fam:
        kw["norm_filter"] = fam["norm"]
    spec = FamilySpec(kind=fam["kind"], field=field, **kw)
    report = run_census(spec)
    result = verify_report(report)
    ok = result.overall and report.distinct_classes == stored["classes"]
    status = "ok" if ok else "FAIL"
    print(f"{path}: stored={stored['classes']} recomputed={report.distinct_classes} {status}")
    return ok


GRIDS = {
    "exact-small": (
        [("linear", {"p": p, "k": k}) for p, k in
         [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1), (13, 1),
          (2, 4), (5, 2), (3, 3)]]
        + [("power", {"p": p, "k": k, "d": d})
           for p, k in [(5, 1), (7, 1), (3, 2), (13, 1)] for d in range(2, 9)]
    ),
}


def cmd_verify(args) -> int:
    ok = True
    if args.grid:
        for kind, params in GRIDS[args.grid]:
            field = _field_or_exit(params["p"], params["k"])
            spec = FamilySpec(kind=kind, field=field,
                              **{k: v for k, v in params.items() if k == "d"})
            result = verify_report(run_census(spec))
            label = f"{kind}({spec.params_label()}) over F_{field.q}"
            print(f"{label}: observed={result.observed} "
                  f"{'ok' if result.overall else 'FAIL'}")
            ok = ok and result.overall
    for path in args.reports:
        ok = _verify_stored(path) and ok
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_search_connected(args) -> int:
    from .census import single_component_search

    table = single_component_search(args.p_min, args.p_max)
    for p, hits in table.items():
        print(f"p={p}: count={len(hits)} a={hits}")
    return EXIT_OK


def cmd_export(args) -> int:
    field = _field_or_exit(args.p, args.k)
    try:
        coeffs = [int(c) % field.q for c in args.coeffs.split(",")]
        if args.denom:
            denom = [int(c) % field.q for c in args.denom.split(",")]
            mp = RationalMap(field, PolyMap(field, coeffs), PolyMap(field, denom),
                             alpha=args.alpha, model=args.model)
        else:
            mp = PolyMap(field, coeffs)
            if mp.degree < 0:
                raise InvalidSpecError("zero polynomial has empty graph provenance")
    except (InvalidSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    graph = build_graph(mp)
    if args.format == "dot":
        text = export_dot(graph)
    else:
        record = {"succ": list(graph.succ), "stats": stats_json(graph, analyze(graph))}
        text = json.dumps(record, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyncensus", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_field_args(sp):
        sp.add_argument("--p", type=int, required=True, help="characteristic (prime)")
        sp.add_argument("--k", type=int, default=1, help="extension degree")

    sp = sub.add_parser("field", help="print a field descriptor")
    add_field_args(sp)
    sp.set_defaults(func=cmd_field)

    sp = sub.add_parser("census", help="classify a map family")
    add_field_args(sp)
    sp.add_argument("--family", required=True, choices=[
        "all-degree-d", "sparse", "linearised", "linear", "power",
        "frobenius-affine", "rational"])
    sp.add_argument("--d", type=int, help="degree for all-degree-d / power")
    sp.add_argument("--exps", help="comma-separated exponents for sparse")
    sp.add_argument("--n", type=int, help="linearised degree index or denominator degree")
    sp.add_argument("--m", type=int, help="numerator degree for rational")
    sp.add_argument("--alpha", type=int, default=0, help="pole image for affine-model rational")
    sp.add_argument("--model", choices=["affine", "projective"], default="affine")
    sp.add_argument("--norm", choices=["any", "norm1", "normne1"], default="any")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp.add_argument("--reduce", choices=["none", "scaling", "affine", "frobenius", "auto"],
                    default="none")
    sp.add_argument("--out", help="write the JSON report here instead of stdout")
    sp.add_argument("--csv", help="append a one-line summary to this CSV file")
    sp.add_argument("--cache", help="directory for the canonical-key cache")
    sp.add_argument("--checkpoint", help="checkpoint file for resumable runs")
    sp.add_argument("--verbose", action="store_true",
                    help="include full member index lists per class")
    sp.set_defaults(func=cmd_census)

    sp = sub.add_parser("verify", help="recheck stored reports or a built-in grid")
    sp.add_argument("reports", nargs="*", help="JSON reports written by census")
    sp.add_argument("--grid", choices=sorted(GRIDS), help="run a built-in census grid")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("search-connected", help="one-component quadratic maps per prime")
    sp.add_argument("--p-min", type=int, default=2)
    sp.add_argument("--p-max", type=int, required=True)
    sp.set_defaults(func=cmd_search_connected)

    sp = sub.add_parser("export", help="export one map's functional graph")
    add_field_args(sp)
    sp.add_argument("--coeffs", required=True, help="polynomial coefficients c0,c1,...")
    sp.add_argument("--denom", help="monic denominator coefficients for a rational map")
    sp.add_argument("--alpha", type=int, default=0)
    sp.add_argument("--model", choices=["affine", "projective"], default="affine")
    sp.add_argument("--format", choices=["dot", "json"], default="dot")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
