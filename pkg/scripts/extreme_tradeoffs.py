#!/usr/bin/env python3
"""Single-configuration SAfairKM runs at the ends of the trade-off.

For each preset and seed, runs (n_a, n_b) in {(4,0), (10,1), (0,4)} from the
same random labeling and prints final cost and balance. (4,0) should settle
near zero balance, (0,4) near perfect balance, (10,1) in between.

    python scripts/extreme_tradeoffs.py --seeds 5 --iters 400 --out extremes.csv
"""

import argparse
import csv
import sys

import numpy as np

from fairkm.datasets import generate_gaussian_mixture, load_presets, preset_spec
from fairkm.kmeans_core import init_state
from fairkm.metrics import balance_of_labels, cost_of_labels
from fairkm.pareto import AlternationConfig, child_seed, safairkm_run

CONFIGS = [(4, 0), (10, 1), (0, 4)]


def run_one(ds, K, n_a, n_b, iters, seed):
    rng = np.random.default_rng(child_seed(seed, 0))
    state = init_state(ds, K, rng)
    safairkm_run(ds, state, AlternationConfig(n_a, n_b, q=iters), rng)
    return (cost_of_labels(ds.points, state.labels, K),
            balance_of_labels(ds.group_of, state.labels, K, ds.J))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--presets", default=",".join(sorted(load_presets())))
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--iters", type=int, default=400)
    ap.add_argument("-K", type=int, default=2)
    ap.add_argument("--out", default=None, help="optional CSV of every run")
    args = ap.parse_args(argv)

    rows = []
    for name in args.presets.split(","):
        for seed in range(args.seeds):
            ds = generate_gaussian_mixture(preset_spec(name, seed=seed))
            for n_a, n_b in CONFIGS:
                cost, bal = run_one(ds, args.K, n_a, n_b, args.iters, seed)
                rows.append((name, seed, n_a, n_b, cost, bal))

    print(f"{'preset':18s} {'(n_a,n_b)':>9s} {'balance min/median/max':>26s} {'cost median':>12s}")
    for name in args.presets.split(","):
        for n_a, n_b in CONFIGS:
            sel = [r for r in rows if r[0] == name and r[2:4] == (n_a, n_b)]
            b = np.array([r[5] for r in sel])
            c = np.median([r[4] for r in sel])
            print(f"{name:18s} {f'({n_a},{n_b})':>9s} "
                  f"{b.min():8.3f} {np.median(b):8.3f} {b.max():8.3f} {c:12.4f}")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["preset", "seed", "n_a", "n_b", "cost", "balance"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
