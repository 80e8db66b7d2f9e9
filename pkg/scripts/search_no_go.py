"""Multi-start search for heralded gain on small networks.

For N = 2, 3 the best c_1 should stay at p; for N = 4 the ratio should
approach 4/3 of the input odds.
"""
import argparse

from photon_distill.conditional import InputEnsemble
from photon_distill.search import Objective, SearchProblem, optimize, peak_factor


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--budget", type=int, default=100_000)
    ap.add_argument("--restarts", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    for n, p in ((2, 0.3), (3, 0.3)):
        prob = SearchProblem(n, InputEnsemble.uniform(n, p), Objective.MAX_C1, args.budget, args.seed,
                             restarts=args.restarts)
        r = optimize(prob, threads=args.threads)
        print(f"N={n} p={p}: best c1 = {r.best_value:.12f} at {r.best_pattern.counts} "
              f"({r.evaluations_used} evaluations)")
    for n in (4, 5):
        ens = InputEnsemble.uniform(n, 0.01)
        prob = SearchProblem(n, ens, Objective.MAX_RATIO_10, args.budget, args.seed, restarts=args.restarts)
        r = optimize(prob, threads=args.threads)
        print(f"N={n} p=0.01: best ratio = {r.best_value / ens.odds:.5f} R (epsilon scheme {peak_factor(n):.5f} R) "
              f"at {r.best_pattern.counts} ({r.evaluations_used} evaluations)")


if __name__ == "__main__":
    main()
