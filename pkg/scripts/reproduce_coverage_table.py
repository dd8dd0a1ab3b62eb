"""Monte Carlo coverage of the a-la-Tukey interval next to the exact Theil confidence.

    python3 scripts/reproduce_coverage_table.py --n 6 10 20 50 --reps 10000 --seed 1
"""
import argparse
import csv
import sys
import time

from slopeci import mc

DESIGNS = ("evenly_spaced", "two_clusters")
FAMILIES = ("normal", "cauchy", "uniform")
FULL_N = (6, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150, 160, 170, 180, 190, 200)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[6, 10, 20, 50])
    ap.add_argument("--full", action="store_true", help="all sample sizes up to 200 (slow)")
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    ns = FULL_N if args.full else args.n

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", *(f"{d}/{f}" for d in DESIGNS for f in FAMILIES), "theil_exact"])
    for n in ns:
        t0 = time.perf_counter()
        row = [n]
        for d in DESIGNS:
            for f in FAMILIES:
                rep = mc.coverage("tukey", mc.DesignSpec(d, n), mc.ErrorSpec.standard(f),
                                  reps=args.reps, seed=args.seed, workers=args.workers)
                row.append(f"{float(rep.coverage):.4f}")
        row.append(f"{float(mc.theil_reference(n)):.5f}")
        w.writerow(row)
        out.flush()
        print(f"n={n}: {time.perf_counter() - t0:.1f} s", file=sys.stderr)


if __name__ == "__main__":
    main()
