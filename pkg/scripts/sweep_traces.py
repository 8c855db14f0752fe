"""Three-way trace sweep over fundamental D in [lo, -3], m = 1..3; writes CSV and prints the worst deviations.

    python scripts/sweep_traces.py --lo -500 --out sweep.csv
"""

import argparse
import csv
import time
import warnings

from singmod.characters import is_fundamental
from singmod.quadforms import DiscFactorization
from singmod.traces import compare


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--lo", type=int, default=-500)
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()
    warnings.simplefilter("ignore")
    t0 = time.perf_counter()
    worst = {"series": 0.0, "rect": 0.0, "margin": 0.0}
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["D", "m", "direct", "series_dev", "rect_dev", "margin", "series_cutoff", "rect_cmax", "ms"])
        for D in range(-3, args.lo - 1, -1):
            if not is_fundamental(D):
                continue
            f = DiscFactorization.of(D)
            for m in (3, 2, 1):
                t = time.perf_counter()
                r = compare(f, m)
                es, er = float(abs(r.series - r.direct)), float(abs(r.rect - r.direct))
                worst["series"] = max(worst["series"], es)
                worst["rect"] = max(worst["rect"], er)
                if D not in (-3, -4):
                    worst["margin"] = max(worst["margin"], r.margin)
                w.writerow([D, m, r.direct.value, f"{es:.3e}", f"{er:.3e}", f"{r.margin:.3e}", r.series_cutoff,
                            r.rect_cmax, round(1000 * (time.perf_counter() - t))])
    print({k: f"{v:.3e}" for k, v in worst.items()}, f"{time.perf_counter() - t0:.0f} s")


if __name__ == "__main__":
    main()
