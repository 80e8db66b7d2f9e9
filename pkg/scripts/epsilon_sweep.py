"""Epsilon-scheme sweep: ratio and two-photon factors vs their small-epsilon limits."""
import argparse

import numpy as np

from photon_distill.search import ratio_factor, sweep_epsilon_scheme, two_photon_factor


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--modes", type=int, nargs="+", default=[4, 5, 6, 7, 8, 10])
    ap.add_argument("--p", type=float, default=0.01)
    ap.add_argument("--epsilons", type=float, nargs="+", default=list(np.geomspace(1e-1, 1e-3, 5)))
    args = ap.parse_args()
    print(f"{'N':>3} {'D':>3} {'eps':>10} {'r10/R':>10} {'limit':>8} {'r21/r10':>9} {'limit':>8} {'herald':>10}")
    for n in args.modes:
        d = (n + 1) // 2
        for row in sweep_epsilon_scheme(n, args.p, d, args.epsilons):
            print(f"{n:3d} {d:3d} {row.epsilon:10.3e} {row.ratio_10_over_odds:10.6f} {ratio_factor(n, d):8.5f} "
                  f"{row.ratio_21_over_ratio_10:9.6f} {two_photon_factor(n, d):8.5f} {row.herald_prob:10.3e}")


if __name__ == "__main__":
    main()
