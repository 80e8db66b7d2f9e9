"""Random-scenario check of the ratio bound and the no-improvement cases."""
import argparse
import time

from photon_distill.cli import verify_trial


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--modes", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--p-high", type=float, default=0.95)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for n in args.modes:
        t0 = time.perf_counter()
        checked = bad = 0
        tightest = float("inf")
        for t in range(args.trials):
            _, reports = verify_trial(n, args.p_high, args.seed, t)
            for r in reports:
                checked += 1
                bad += not r.satisfied
                if r.slack is not None:
                    tightest = min(tightest, r.slack)
        print(f"N={n}: {checked} checks, {bad} violations, min slack {tightest:.3e}, "
              f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
