"""Exact n=5 coverage bound for uniform errors, with an optional Monte Carlo check.

    python3 scripts/exact_n5.py --mode full --mc 1000000
"""
import argparse
import json
import time

from slopeci import exact5, mc


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mode", choices=("fast", "full"), default="fast")
    ap.add_argument("--mc", type=int, default=0, help="Monte Carlo samples for the p_i check")
    ap.add_argument("--coverage-reps", type=int, default=0,
                    help="also simulate the interval's coverage with this many replicates")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    res = exact5.compute_bound(mode=args.mode)
    doc = res.as_dict()
    doc["seconds"] = round(time.perf_counter() - t0, 1)
    if args.mc:
        doc["mc"] = {k: {"estimate": p, "std_error": se} for k, (p, se)
                     in exact5.mc_condition_probabilities(samples=args.mc, seed=args.seed).items()}
    if args.coverage_reps:
        rep = mc.coverage("tukey", mc.DesignSpec("evenly_spaced", 5), mc.ErrorSpec.standard("uniform"),
                          reps=args.coverage_reps, seed=args.seed)
        doc["simulated_coverage"] = {"reps": rep.reps, "coverage": float(rep.coverage),
                                     "std_error": rep.std_error}
    print(json.dumps(doc, indent=2))


if __name__ == "__main__":
    main()
