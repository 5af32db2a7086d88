"""Simulated broadcast time on K_n against the regime estimate, one line per k.

    python3 scripts/complete_regimes.py --n 2000 --k 2 20 200 2000 20000 --runs 300
"""

import argparse

import numpy as np

from walkcast import classify_and_predict, simulate_kn
from walkcast.experiment import derive_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--k", type=int, nargs="+", default=[2, 20, 200, 2000, 20000, 190000])
    ap.add_argument("--runs", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'k':>8} {'case':>4} {'estimate':>11} {'mean':>11} {'ratio':>7}")
    for k in args.k:
        pred = classify_and_predict(args.n, k)
        rounds = np.array([simulate_kn(args.n, k, seed=derive_seed(args.seed + k, i)).rounds
                           for i in range(args.runs)])
        mean = rounds.mean()
        print(f"{k:>8} {pred.case_label.value:>4} {pred.estimate:>11.2f} {mean:>11.2f} "
              f"{mean / pred.estimate:>7.3f}")


if __name__ == "__main__":
    main()
