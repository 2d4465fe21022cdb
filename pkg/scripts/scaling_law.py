"""Median condition value of a D/4 block against D, with log-log slopes.

    python3 scripts/scaling_law.py --dims 100 200 400 800 --trials 100
"""

import argparse
import json

from qergodic.sampling import SeedSpec
from qergodic.typicality import run_scaling_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[100, 200, 400, 800])
    ap.add_argument("--fraction", type=float, default=0.25)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=6)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = run_scaling_experiment(args.dims, args.fraction, args.trials, SeedSpec(args.seed), args.threads)
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
