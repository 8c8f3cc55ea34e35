#!/usr/bin/env python3
"""Seeded random-metric checks of the normalized-eigenvalue upper bounds.

Random boundary densities exp(sum_m a_m cos + b_m sin) on the disk are tested
against sigma_bar_k <= 2*pi*k, and on the cylinder against 2*pi*(k+1).  The
seed fully determines the report.
"""

import argparse

from steklov import bound_check
from steklov.experiments import write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=20240811)
    ap.add_argument("--k-max", type=int, default=5)
    ap.add_argument("--out", default="steklov-out")
    args = ap.parse_args()

    for kind, trials in (("hps-disk", args.trials),
                         ("karpukhin-annulus", max(args.trials // 2, 1))):
        report = bound_check(kind, trials=trials, seed=args.seed, k_max=args.k_max)
        print(f"{kind}: {trials} trials, worst ratio {report['worst_ratio']:.4f} "
              f"-> {report['verdict']}")
        write_report(args.out, f"bounds-{kind}",
                     {"trials": trials, "seed": args.seed, "k_max": args.k_max},
                     report["rows"], report["verdict"])


if __name__ == "__main__":
    main()
