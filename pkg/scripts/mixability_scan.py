"""Curvature minimum and grid-search verdict across learning rates.

    python scripts/mixability_scan.py --n 2 --etas 0.9,1.0,1.02,1.05,1.1
"""

import argparse

from briergame.mixability import curvature_sign_sweep, mixability_search


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--etas", default="0.5,0.9,0.99,1.0,1.01,1.05,1.25")
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--resolution", type=int, default=100, help="grid search resolution (n = 2 or 3)")
    args = ap.parse_args()

    print("eta,curvature_min,verdict,worst_violation")
    for eta in (float(x) for x in args.etas.split(",")):
        lo, _ = curvature_sign_sweep(args.n, eta, args.samples)
        verdict, violation = "", ""
        if args.n in (2, 3):
            rep = mixability_search(eta, args.n, args.resolution)
            verdict = rep.verdict
            violation = f"{rep.witness.violation:.3e}" if rep.witness else ""
        print(f"{eta},{lo:.6f},{verdict},{violation}")


if __name__ == "__main__":
    main()
