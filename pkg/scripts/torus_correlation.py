"""Run a sweep spec and print mean rounds against n ln k / k with Pearson r.

    python3 scripts/torus_correlation.py scripts/specs/torus30.yaml
"""

import argparse

from walkcast import experiment as X


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("spec")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    spec = X.load_sweep_spec(args.spec)
    stats = X.summarize(X.run_sweep(spec, X.resolve_threads(args.threads)))
    for key, st in stats.items():
        n, k = key[1], key[4]
        print(f"k={k:>5} jump={key[5]!s:>5} mean={st.mean:10.1f} q05={st.q05:>7} q95={st.q95:>7} "
              f"caps={st.cap_hits} predictor={X.predictor(n, k):10.1f}")
    rep = X.correlate(stats)
    print(f"r = {rep.r:.5f}  slope = {rep.slope:.4f}  intercept = {rep.intercept:.2f}")


if __name__ == "__main__":
    main()
