"""Run every preset experiment and drop the CSVs into one directory.

    python scripts/run_presets.py --out results --horizon 1000000
"""

import argparse
import sys

from qswitch.presets import PRESETS, run_preset


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--horizon", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("names", nargs="*", default=sorted(PRESETS))
    args = ap.parse_args()
    for name in args.names:
        run_preset(name, args.out, horizon=args.horizon, jobs=args.jobs,
                   log=lambda s: print(s, file=sys.stderr))


if __name__ == "__main__":
    main()
