"""Jump-over on/off on a discretized ring road.

The ring has 200 junctions joined by 100 m roads plus one 150 m road, so at
d = 50 the discretized cycle has an odd number of vertices and two walkers can
meet without jump-over.

    python3 scripts/jump_over_cycle.py --d 50 --runs 200
"""

import argparse
import tempfile
from pathlib import Path

from walkcast import experiment as X
from walkcast.graph import RoadGraph, save_network


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=float, default=50)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--k", type=int, nargs="+", default=[10, 20, 40, 80, 160, 320, 640])
    args = ap.parse_args()

    edges = [(i, (i + 1) % 200, 150.0 if i == 199 else 100.0) for i in range(200)]
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "ring.net"
        save_network(RoadGraph.from_edges(200, edges), path)
        spec = X.SweepSpec(graph=f"file:{path}", discretize=[args.d], k_values=args.k,
                           jump_over=[True, False], replications=args.runs, master_seed=2,
                           max_rounds=10**6)
        stats = X.summarize(X.run_sweep(spec))
    by = {(key[4], key[5]): st for key, st in stats.items()}
    for k in args.k:
        yes, no = by[(k, True)], by[(k, False)]
        print(f"k={k:>4} jump-over {yes.mean:9.1f}  without {no.mean:9.1f}  "
              f"reduction {1 - yes.mean / no.mean:6.1%}")


if __name__ == "__main__":
    main()
