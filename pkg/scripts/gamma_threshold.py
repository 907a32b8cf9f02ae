"""Locate the link-probability threshold and contrast queues on either side.

Sets every link probability to gamma on the three-user switch, finds the
gamma where the LP scaling factor crosses 1, then simulates Max-Weight a
distance ``--offset`` below and above it.
"""

import argparse

import numpy as np

from qswitch.capacity import SweepSpec, capacity, sweep_scalar
from qswitch.model import ArrivalSpec, figure1_topology
from qswitch.sim import run


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--rates", type=float, nargs=3, default=(0.35, 0.2, 0.15))
    ap.add_argument("--horizon", type=int, default=1_000_000)
    ap.add_argument("--offset", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    topo = figure1_topology()
    grid = tuple(np.round(np.arange(0.05, 1.0001, 0.05), 4))
    sweep = sweep_scalar(topo, args.rates, SweepSpec("p_all", grid, resolution=1e-6))
    if sweep.crossing is None:
        print("rho* never crosses 1 on the grid")
        return
    g = sweep.crossing
    print(f"LP crossing gamma* = {g:.6f}")
    for value in (g - args.offset, g + args.offset):
        t = topo.with_link_success([value] * 3)
        rho = capacity(t, args.rates).rho_star
        tr = run(t, ArrivalSpec(tuple(args.rates)), horizon=args.horizon, seed=args.seed)
        print(f"gamma={value:.4f} rho*={rho:.4f} mean_qbar={tr.mean_qbar:.5g} "
              f"second_half={tr.mean_qbar_second_half:.5g}")


if __name__ == "__main__":
    main()
