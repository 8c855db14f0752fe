"""Rectangle sum for D = -303, m = 1 as Y shrinks; shows where the value settles near the trace.

    python scripts/rect_y_scan.py > rect_scan.csv
"""

import math

import mpmath

from singmod.quadforms import DiscFactorization
from singmod.traces import trace_direct, trace_rect


def main():
    f = DiscFactorization.of(-303)
    exact = trace_direct(f, 1)
    print("exponent,Y,cmax,rect,rect_minus_trace")
    for e in (0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0, 1.01, 1.05, 1.1, 1.2):
        Y = 303 ** -e
        r = trace_rect(f, 1, Y=Y)
        print(f"{e},{Y:.6e},{r.cmax},{mpmath.nstr(r.value.value, 30)},{float(r.value - exact):.6f}")


if __name__ == "__main__":
    main()
