"""Plain partial sums against the windowed + Richardson sinh series, error against the direct trace.

    python scripts/series_window_study.py -23 -303 -2003
"""

import sys
import warnings

from singmod.quadforms import DiscFactorization
from singmod.traces import SeriesConfig, trace_direct, trace_sinh_series


def main():
    warnings.simplefilter("ignore")
    Ds = [int(a) for a in sys.argv[1:]] or [-23, -303, -1003]
    print("D,m,mode,cutoff,error")
    for D in Ds:
        f = DiscFactorization.of(D)
        for m in (1, 2):
            ref = trace_direct(f, m)
            for mode, cfg in (("window", SeriesConfig()), ("plain", SeriesConfig(smooth=False))):
                try:
                    s = trace_sinh_series(f, m, config=cfg)
                    print(f"{D},{m},{mode},{s.cutoff},{float(abs(s.value - ref)):.3e}")
                except Exception as exc:  # plain mode may hit the ceiling
                    print(f"{D},{m},{mode},,{type(exc).__name__}")


if __name__ == "__main__":
    main()
