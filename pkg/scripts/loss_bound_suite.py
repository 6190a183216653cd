"""Randomised check of the SAA and WdAA loss bounds on synthetic games.

Plays batches of games for every (K, n) in the chosen ranges, with i.i.d. and
adversarial outcomes, and prints the worst regret minus the bound per setting.

    python scripts/loss_bound_suite.py --steps 500 --games 14
"""

import argparse
import time

import numpy as np

from briergame.experiment import (
    SyntheticSpec,
    adversarial_outcome,
    make_algorithm,
    max_difference,
    run_protocol,
    synthetic_game,
    theoretical_bound,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--algo", choices=["saa", "wdaa"], default="saa")
    ap.add_argument("--param", type=float, default=None)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--games", type=int, default=14, help="games per (K, n, mode)")
    ap.add_argument("--k-max", type=int, default=10)
    ap.add_argument("--n-max", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    start = time.perf_counter()
    worst = -np.inf
    print("mode,K,n,bound,max_regret_minus_bound")
    for mode in ("iid", "adversarial"):
        for K in range(2, args.k_max + 1):
            for n in range(2, args.n_max + 1):
                spec = SyntheticSpec(args.steps, K, n, seed=args.seed + 100 * K + n, outcomes=mode)
                preds, outcomes = synthetic_game(spec, batch_shape=(args.games,))
                algo = make_algorithm(args.algo, K, n, args.param, batch_shape=(args.games,))
                if outcomes is None:
                    t = run_protocol(algo, preds, adversary=adversarial_outcome)
                else:
                    t = run_protocol(algo, preds, outcomes)
                bound = theoretical_bound(args.algo, K, n, args.param)
                excess = float(np.max(max_difference(t))) - bound
                worst = max(worst, excess)
                print(f"{mode},{K},{n},{bound:.4f},{excess:.4f}")
    print(f"# worst excess {worst:.4g} in {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
