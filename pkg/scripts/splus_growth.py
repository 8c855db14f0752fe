"""Growth slopes of S^+ partial sums over x in [1e3, 1e5] for seeded random (m, f).

    python scripts/splus_growth.py --draws 10 --seed 7
"""

import argparse
import random

import numpy as np

from singmod.characters import fundamental_divisors
from singmod.expsums import HALF, SSeries, growth_slope, partial_sums
from singmod.quadforms import DiscFactorization


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--draws", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--x", type=int, default=10 ** 5)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    Ds = [D for D in range(-3, -300, -1) if D % 4 in (0, 1)]
    slopes = []
    print("D,d,m,slope")
    for _ in range(args.draws):
        D = rng.choice(Ds)
        f = DiscFactorization.of(D, rng.choice(fundamental_divisors(D)))
        m = rng.randint(1, 5)
        s = growth_slope(partial_sums(SSeries(HALF, f.dprime, m * m * f.d), args.x), 1e3, args.x)
        slopes.append(s)
        print(f"{D},{f.d},{m},{s:.4f}")
    print(f"# mean slope {np.mean(slopes):.4f}")


if __name__ == "__main__":
    main()
