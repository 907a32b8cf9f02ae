"""Print the binned empirical Lyapunov drift for one configuration.

    python scripts/drift_table.py configs/fig2.yaml --horizon 1000000 --bins 10
"""

import argparse

import numpy as np

from qswitch.config import load_config
from qswitch.sim import drift_summary, run


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--horizon", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bins", type=int, default=10)
    ap.add_argument("--percentile", type=float, default=0.0,
                    help="only bin norms above this percentile of visited norms")
    ap.add_argument("--method", choices=("quantile", "width"), default="quantile")
    args = ap.parse_args()

    cfg = load_config(args.config)
    tr = run(cfg.topology, cfg.arrivals, horizon=args.horizon, seed=args.seed)
    lower = float(np.percentile(tr.drift_norms, args.percentile)) if args.percentile else None
    print("norm_lo,norm_hi,count,mean_drift")
    for b in drift_summary(tr, args.bins, lower, args.method):
        print(f"{b.norm_lo:.6g},{b.norm_hi:.6g},{b.count},{b.mean_drift:.6g}")


if __name__ == "__main__":
    main()
