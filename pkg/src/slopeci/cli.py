"""Command-line front end: ``slopeci fit|coverage|exact-n5|dist``.

Exit codes: 0 success, 2 invalid input or parameters, 3 unachievable
confidence level. Timing information goes to stderr so that stdout is
byte-identical between runs with the same seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import exact5, mc
from .errors import InvalidDataset, InvalidParameter, SlopeCIError, TooLarge, UnachievableLevel
from .exactdist import (
    as_fraction,
    kendall_null_distribution,
    kendall_upper_quantile,
    signed_rank_null_distribution,
    signed_rank_upper_quantile,
)
from .geometry import format_hrep
from .intervals import TUKEY_WARNING, theil_ci, tukey_ci
from .slopes import Dataset, pairwise_slopes, theil_estimate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNACHIEVABLE = 3

_DESIGNS = {"evenly": "evenly_spaced", "two-clusters": "two_clusters"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _num(v) -> float:
    """Shared numeric rendering for csv and json (12 significant digits)."""
    return float(f"{float(v):.12g}")


def _fmt(v) -> str:
    return repr(_num(v))


# ---------------------------------------------------------------- input


def read_xy_csv(path: str | Path) -> Dataset:
    text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise InvalidDataset("empty CSV")
    header = [c.strip().lower() for c in rows[0]]
    if header != ["x", "y"]:
        raise InvalidDataset(f"CSV header must be 'x,y', got {','.join(rows[0])!r}")
    xs, ys = [], []
    for line, r in enumerate(rows[1:], start=2):
        if len(r) != 2:
            raise InvalidDataset(f"line {line}: expected 2 fields, got {len(r)}")
        try:
            xs.append(float(r[0]))
            ys.append(float(r[1]))
        except ValueError:
            raise InvalidDataset(f"line {line}: non-numeric value in {','.join(r)!r}") from None
    if len(set(xs)) != len(xs):
        dup = sorted({v for v in xs if xs.count(v) > 1})
        raise InvalidDataset(f"duplicate x values: {', '.join(map(repr, dup))}")
    return Dataset.from_unsorted(xs, ys)


# ---------------------------------------------------------------- output


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: "" if v is None else v for k, v in r.items()})
    return buf.getvalue()


def _table(rows: list[dict], columns: list[str]) -> str:
    cells = [[("" if r.get(c) is None else str(r.get(c))) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- fit


def _interval_record(iv) -> dict:
    rec = {
        "method": iv.method,
        "level": iv.level,
        "lower": _num(iv.lower),
        "upper": _num(iv.upper),
        "lower_index": iv.lower_index,
        "upper_index": iv.upper_index,
        "quantile": iv.quantile,
        "achieved_confidence": None if iv.achieved_confidence is None else _num(iv.achieved_confidence),
        "achieved_confidence_exact": None if iv.achieved_confidence is None else str(iv.achieved_confidence),
        "degenerate": iv.degenerate,
    }
    if iv.method == "tukey":
        rec["quantile_exact"] = iv.quantile_exact
    return rec


def _unachievable_record(e: UnachievableLevel) -> dict:
    return {
        "method": e.method,
        "level": float(e.level),
        "status": "unachievable",
        "message": str(e),
        "max_level": None if e.max_level is None else _num(e.max_level),
        "max_level_exact": None if e.max_level is None else str(e.max_level),
    }


def cmd_fit(args) -> int:
    ds = read_xy_csv(args.csv)
    ss = pairwise_slopes(ds)
    methods = ["theil", "tukey"] if args.method == "both" else [args.method]
    report = {"n": ds.n, "slopes": ss.N, "estimate": _num(theil_estimate(ss)),
              "ties": ss.tie_flag, "intervals": []}
    code = EXIT_OK
    for m in methods:
        try:
            iv = (theil_ci if m == "theil" else tukey_ci)(ds, args.level, slopes=ss)
            report["intervals"].append(_interval_record(iv))
        except UnachievableLevel as e:
            report["intervals"].append(_unachievable_record(e))
            code = EXIT_UNACHIEVABLE
    if ds.n == 2:
        report["degenerate"] = True
        report["note"] = "a single pairwise slope: the estimate is that slope and no interval has positive confidence"
    has_tukey = "tukey" in methods
    if args.format == "json":
        if has_tukey:
            report["warning"] = TUKEY_WARNING
        _emit(args, json.dumps(report, indent=2) + "\n")
    elif args.format == "csv":
        if has_tukey:
            print(TUKEY_WARNING, file=sys.stderr)
        rows = [{"n": report["n"], "estimate": report["estimate"], **{
            k: r.get(k) for k in ("method", "level", "lower", "upper", "lower_index", "upper_index",
                                  "achieved_confidence", "status", "max_level")}}
                for r in report["intervals"]]
        _emit(args, _csv_text(rows))
    else:
        lines = [f"n = {ds.n}  ({ss.N} pairwise slopes)",
                 f"Theil estimate (median slope): {_fmt(theil_estimate(ss))}"]
        if ss.tie_flag:
            lines.append("note: tied pairwise slopes")
        for r in report["intervals"]:
            if r.get("status") == "unachievable":
                lines.append(f"{r['method']}: level {r['level']} unachievable. {r['message']}")
                continue
            line = (f"{r['method']} {r['level']:g} CI: ({_fmt(r['lower'])}, {_fmt(r['upper'])})"
                    f"  order statistics {r['lower_index']} and {r['upper_index']}")
            if r["achieved_confidence"] is not None:
                line += f"  true confidence {r['achieved_confidence_exact']} = {r['achieved_confidence']:.6f}"
            lines.append(line)
        if "note" in report:
            lines.append(report["note"])
        if has_tukey:
            lines += ["", TUKEY_WARNING]
        _emit(args, "\n".join(lines) + "\n")
    return code


# ---------------------------------------------------------------- coverage


def cmd_coverage(args) -> int:
    if args.reps < 1:
        raise InvalidParameter(f"--reps must be >= 1, got {args.reps}")
    design = _DESIGNS[args.design]
    rows = []
    t0 = time.perf_counter()
    for n in args.n:
        rep = mc.coverage(args.method, mc.DesignSpec(design, n), mc.ErrorSpec.standard(args.errors),
                          args.level, args.reps, args.seed, workers=args.workers)
        rows.append({
            "method": rep.method, "design": args.design, "errors": rep.errors.family, "n": n,
            "level": rep.level, "reps": rep.reps, "seed": rep.seed,
            "coverage": _num(rep.coverage), "std_error": _num(rep.std_error),
            "hits": rep.hits, "boundary_hits": rep.boundary_hits,
            "theil_exact": None if rep.theil_exact is None else _num(rep.theil_exact),
        })
    print(f"coverage: {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    tukey = args.method == "tukey"
    if args.format == "json":
        doc = {"rows": rows}
        if tukey:
            doc["warning"] = TUKEY_WARNING
        _emit(args, json.dumps(doc, indent=2) + "\n")
    elif args.format == "csv":
        if tukey:
            print(TUKEY_WARNING, file=sys.stderr)
        _emit(args, _csv_text(rows))
    else:
        shown = [dict(r, coverage=f"{r['coverage']:.4f}", std_error=f"{r['std_error']:.4f}",
                      theil_exact="" if r["theil_exact"] is None else f"{r['theil_exact']:.3f}")
                 for r in rows]
        text = _table(shown, ["method", "design", "errors", "n", "reps", "coverage",
                              "std_error", "boundary_hits", "theil_exact"])
        if tukey:
            text += "\n" + TUKEY_WARNING + "\n"
        _emit(args, text)
    return EXIT_OK


# ---------------------------------------------------------------- exact-n5


def cmd_exact_n5(args) -> int:
    t0 = time.perf_counter()
    res = exact5.compute_bound(mode=args.mode, workers=args.workers)
    print(f"exact-n5 ({args.mode}): {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    doc = res.as_dict()
    if args.dump_polytopes:
        _dump_polytopes(Path(args.dump_polytopes), res)
    if args.mc_check:
        t1 = time.perf_counter()
        est = exact5.mc_condition_probabilities(samples=args.mc_check, seed=args.seed)
        print(f"mc-check: {time.perf_counter() - t1:.2f} s", file=sys.stderr)
        check = {}
        for k, (p, se) in est.items():
            exact = res.bound if k == "bound" else getattr(res, k)
            z = (p - float(exact)) / se if se > 0 else 0.0
            check[k] = {"estimate": _num(p), "std_error": _num(se), "z": _num(z)}
        doc["mc_check"] = {"samples": args.mc_check, "seed": args.seed, **check}
    if args.format == "json":
        _emit(args, json.dumps(doc, indent=2) + "\n")
    elif args.format == "csv":
        rows = [{"quantity": k, "value": doc[k], "exact": doc["exact"][k],
                 "derived": k in doc["derived"]} for k in ("p1", "p2", "p3", "p4", "bound")]
        if "mc_check" in doc:
            for r in rows:
                m = doc["mc_check"][r["quantity"]]
                r.update(mc_estimate=m["estimate"], mc_std_error=m["std_error"], mc_z=m["z"])
        _emit(args, _csv_text(rows))
    else:
        lines = [f"admissible slope orderings: {res.orderings}",
                 f"mode: {res.mode}"]
        for k in ("p1", "p2", "p3", "p4", "bound"):
            tag = "  (by symmetry)" if k in res.derived else ""
            lines.append(f"{k:>5} = {doc[k]}  exact {doc['exact'][k]}{tag}")
        if "mc_check" in doc:
            m = doc["mc_check"]
            lines.append(f"Monte Carlo check, {m['samples']} samples, seed {m['seed']}:")
            for k in ("p1", "p2", "p3", "p4", "bound"):
                lines.append(f"{k:>5} ~ {m[k]['estimate']:.7f} +- {m[k]['std_error']:.7f}  z = {m[k]['z']:+.2f}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _dump_polytopes(root: Path, res: exact5.BoundResult) -> None:
    root.mkdir(parents=True, exist_ok=True)
    conds = [None, *(c for c in exact5.CONDITIONS if c not in res.derived)]
    for i, o in enumerate(exact5.admissible_orderings()):
        for c in conds:
            p = exact5.compile_polytope(o, c, res.x, res.half_width)
            (root / f"{c or 'order'}_{i:03d}.ine").write_text(format_hrep(p))
    print(f"wrote polytopes to {root}", file=sys.stderr)


# ---------------------------------------------------------------- dist


def cmd_dist(args) -> int:
    a = as_fraction(args.alpha)
    if args.kind == "kendall":
        dist = kendall_null_distribution(args.n)
        q = kendall_upper_quantile(args.n, a)
    else:
        dist = signed_rank_null_distribution(args.n)
        q = signed_rank_upper_quantile(args.n, a, method="exact")
    rows = [{"value": k, "pmf": str(dist.pmf(k)), "pmf_decimal": _num(dist.pmf(k)),
             "upper_tail": str(dist.sf(k)), "upper_tail_decimal": _num(dist.sf(k))}
            for k in dist.support]
    qtext = "none" if q is None else q
    if args.format == "json":
        doc = {"kind": args.kind, "n": args.n, "alpha": str(a), "quantile": qtext, "rows": rows}
        _emit(args, json.dumps(doc, indent=2) + "\n")
    elif args.format == "csv":
        _emit(args, _csv_text([dict(r, quantile=qtext) for r in rows]))
    else:
        text = _table(rows, ["value", "pmf", "pmf_decimal", "upper_tail", "upper_tail_decimal"])
        text += f"\nupper {a} quantile: {qtext}\n"
        _emit(args, text)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _level(v: str) -> float:
    f = float(v)
    if not 0 < f < 1:
        raise argparse.ArgumentTypeError(f"level must lie in (0, 1), got {v}")
    return f


def _n_list(v: str) -> list[int]:
    return [int(p) for p in v.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="slopeci", description="Nonparametric confidence intervals for a regression slope.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=False):
        sp.add_argument("--format", choices=("text", "csv", "json"), default="text")
        sp.add_argument("--out", help="write output to this file instead of stdout")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--workers", type=int, default=None,
                            help="worker processes (default: SLOPECI_THREADS or CPU count)")

    f = sub.add_parser("fit", help="Theil estimate and confidence intervals for an x,y CSV")
    f.add_argument("csv", help="CSV file with header x,y ('-' for stdin)")
    f.add_argument("--level", type=_level, default=0.95)
    f.add_argument("--method", choices=("theil", "tukey", "both"), default="both")
    common(f)

    c = sub.add_parser("coverage", help="Monte Carlo coverage of the intervals")
    c.add_argument("--method", choices=("theil", "tukey"), default="tukey")
    c.add_argument("--design", choices=tuple(_DESIGNS), default="evenly")
    c.add_argument("--errors", choices=("normal", "cauchy", "uniform"), default="normal")
    c.add_argument("--n", type=_n_list, nargs="+", default=[[5]],
                   help="sample sizes, space or comma separated")
    c.add_argument("--reps", type=int, default=10_000)
    c.add_argument("--level", type=_level, default=0.95)
    common(c, seed=True)

    e = sub.add_parser("exact-n5", help="exact coverage bound of the a-la-Tukey interval at n=5")
    e.add_argument("--mode", choices=("fast", "full"), default="fast")
    e.add_argument("--mc-check", type=int, default=0, metavar="SAMPLES")
    e.add_argument("--dump-polytopes", metavar="DIR")
    common(e, seed=True)

    d = sub.add_parser("dist", help="exact null distribution and upper quantile")
    d.add_argument("kind", choices=("kendall", "signed-rank"))
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--alpha", type=float, default=0.025)
    common(d)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "coverage":
        args.n = [n for group in args.n for n in group]
    handler = {"fit": cmd_fit, "coverage": cmd_coverage,
               "exact-n5": cmd_exact_n5, "dist": cmd_dist}[args.command]
    try:
        return handler(args)
    except UnachievableLevel as e:
        print(f"slopeci: unachievable level: {e}", file=sys.stderr)
        return EXIT_UNACHIEVABLE
    except (InvalidDataset, InvalidParameter, TooLarge, OSError) as e:
        print(f"slopeci: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except SlopeCIError as e:
        print(f"slopeci: error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
