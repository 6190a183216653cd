"""Maximal difference of every algorithm on one dataset, with bounds.

Default parameters are used for single runs; ``--sweep`` adds a
best-in-hindsight row for each tunable algorithm.

    python scripts/compare_algorithms.py --data football.csv --outcomes 3 \\
        --experts B365,BS,BW,GB,IW,LB,SB,WH --sweep
    python scripts/compare_algorithms.py --synthetic "N=2000,K=4,n=2,seed=1"
"""

import argparse

import numpy as np

from briergame import experiment as ex
from briergame.odds import Schema, read_matches

GRIDS = {
    "saa": np.linspace(0.05, 1.0, 20),
    "wdaa": np.linspace(0.5, 12.0, 24),
    "wkaa": np.linspace(0.05, 5.0, 20),
    "hedge": np.linspace(0.0, 0.95, 20),
    "saa_ha": np.linspace(0.05, 0.95, 19),
}


def load(args):
    if args.synthetic:
        preds, outcomes = ex.synthetic_game(ex.parse_synthetic(args.synthetic))
        return preds, outcomes, None
    schema = Schema(args.outcomes, tuple(args.experts.split(",")))
    records, diags = read_matches(args.data, schema)
    for d in diags:
        print(f"# {d}")
    preds, outcomes, dates = ex.records_to_game(records)
    return preds, outcomes, dates if args.batch_by_date else None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data")
    ap.add_argument("--outcomes", type=int)
    ap.add_argument("--experts")
    ap.add_argument("--synthetic")
    ap.add_argument("--batch-by-date", action="store_true")
    ap.add_argument("--sweep", action="store_true")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--format", choices=["csv", "json"], default="csv")
    args = ap.parse_args()
    if not args.synthetic and not (args.data and args.outcomes and args.experts):
        ap.error("give --synthetic or --data with --outcomes and --experts")

    preds, outcomes, keys = load(args)
    if outcomes is None:
        algo = ex.make_algorithm("saa", preds.shape[1], preds.shape[2])
        outcomes = ex.run_protocol(algo, preds, adversary=ex.adversarial_outcome).outcomes
    K, n = preds.shape[1], preds.shape[2]
    results = []
    for name in ex.ALGORITHMS:
        param = ex.default_param(name, n)
        traj = ex.run_protocol(ex.make_algorithm(name, K, n, param), preds, outcomes, batch_keys=keys)
        results.append(ex.RunResult(name, param, traj, n))
    if args.sweep:
        for name, grid in GRIDS.items():
            results.append(ex.sweep(name, grid, preds, outcomes, batch_keys=keys, workers=args.workers))
    print(ex.emit_report(results, args.format), end="")


if __name__ == "__main__":
    main()
