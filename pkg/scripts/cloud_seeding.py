"""Worked example: rainfall ratio against year (five observations)."""
from pathlib import Path

from slopeci import Dataset, kendall_slope_test, pairwise_slopes, theil_ci, theil_estimate, tukey_ci
from slopeci.cli import read_xy_csv

DATA = Path(__file__).resolve().parent.parent / "data" / "cloud_seeding.csv"


def main():
    ds: Dataset = read_xy_csv(DATA)
    ss = pairwise_slopes(ds)
    print("sorted slopes:", " ".join(f"{s:.4f}" for s in ss.slopes))
    print(f"Theil estimate: {theil_estimate(ss):.5f}")
    th = theil_ci(ds, slopes=ss)
    print(f"Theil 95% CI: ({th.lower:.3f}, {th.upper:.3f}), true confidence {th.achieved_confidence}")
    tk = tukey_ci(ds, slopes=ss)
    print(f"a-la-Tukey 95% CI: ({tk.lower:.3f}, {tk.upper:.3f}), Walsh ranks {tk.lower_index}, {tk.upper_index}")
    t = kendall_slope_test(ds, 0.0)
    print(f"Kendall test of zero slope: K = {t.K}, critical value {t.critical_value}, reject = {t.reject}")


if __name__ == "__main__":
    main()
