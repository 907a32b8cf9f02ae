"""Command-line entry point: ``qswitch <subcommand> ...``.

Exit codes: 0 success, 2 bad input or config, 3 solver/enumeration caps or
queue overflow.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from qswitch import output
from qswitch.capacity import PIVOT_TOL, RHO_CAP, SWEEP_FAMILIES, VERDICT_TOL, SweepSpec, build_lp, solve, sweep_scalar
from qswitch.config import load_config
from qswitch.errors import CapacityExceededError, ConfigError, QueueOverflowError, SolverError
from qswitch.matching import enumerate_maximal
from qswitch.model import validate
from qswitch.presets import PRESETS, run_preset
from qswitch.scheduler import POLICIES
from qswitch.sim import SimOptions, run


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (inclusive stop) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(round((stop - start) / step))
            return tuple(round(start + k * step, 12) for k in range(n + 1))
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:step or a,b,c") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qswitch", description="Quantum switch scheduling simulator and capacity LP")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the switch and write trace/summary CSVs")
    sim.add_argument("config")
    sim.add_argument("--policy", choices=POLICIES, default="maxweight")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--horizon", type=int, default=1_000_000)
    sim.add_argument("--stride", type=int, default=None, help="trace row stride (default horizon/1000)")
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--stamp", action="store_true", help="add a timestamp comment line")

    cap = sub.add_parser("capacity", help="solve the capacity LP for the configured rates")
    cap.add_argument("config")
    cap.add_argument("--tolerance", type=float, default=PIVOT_TOL, help="pivot tolerance")
    cap.add_argument("--band", type=float, default=VERDICT_TOL, help="verdict band around rho*=1")
    cap.add_argument("--witness", default=None, help="write the optimal mixture to this CSV")

    sw = sub.add_parser("sweep", help="solve the LP along a one-parameter grid")
    sw.add_argument("config")
    sw.add_argument("--family", choices=SWEEP_FAMILIES, default="p_all")
    sw.add_argument("--index", type=int, default=None)
    sw.add_argument("--grid", type=parse_grid, default=parse_grid("0.5:1.0:0.05"))
    sw.add_argument("--resolution", type=float, default=1e-4)
    sw.add_argument("--tolerance", type=float, default=PIVOT_TOL)
    sw.add_argument("--band", type=float, default=VERDICT_TOL)
    sw.add_argument("--out", default=None, help="CSV path (default stdout)")

    mt = sub.add_parser("matchings", help="list maximal matchings as 0/1 rows")
    mt.add_argument("config")
    mt.add_argument("--out", default=None)

    pr = sub.add_parser("preset", help="run one of the canned experiments")
    pr.add_argument("name", choices=sorted(PRESETS))
    pr.add_argument("--seed", type=int, action="append", default=None,
                    help="seed to run (repeatable; default the preset's seed list)")
    pr.add_argument("--horizon", type=int, default=None)
    pr.add_argument("--out", default=".")
    pr.add_argument("--jobs", type=int, default=None, help="worker processes")
    pr.add_argument("--stamp", action="store_true")
    return ap


def cmd_simulate(args) -> None:
    cfg = load_config(args.config)
    report = validate(cfg.topology, cfg.arrivals)
    if not report.passed:
        raise ConfigError(report.describe(), key="arrivals.rates")
    if args.horizon < 1:
        raise ConfigError("--horizon must be at least 1")
    stride = args.stride or max(1, args.horizon // 1000)
    trace = run(cfg.topology, cfg.arrivals, args.policy, args.horizon, args.seed,
                SimOptions(queue_stride=stride))
    out = Path(args.out)
    head = output.header_lines(cfg, args.seed, args.policy, {"horizon": args.horizon}, args.stamp)
    cols, rows = output.trace_table(trace)
    output.write(out / "trace.csv", output.render(head, cols, rows))
    M = cfg.topology.num_types
    output.write(out / "summary.csv",
                 output.render(head, output.summary_columns(M), [output.summary_row(trace)]))
    print(f"mean_qbar={trace.mean_qbar:.6g} deprates={[round(float(x), 6) for x in trace.departure_rates]}")


def cmd_capacity(args) -> None:
    cfg = load_config(args.config)
    result = solve(build_lp(cfg.topology, cfg.arrivals.rates), args.tolerance, args.band)
    head = output.header_lines(cfg, extra={"rho_cap": RHO_CAP})
    cols, rows = output.capacity_table(result)
    output.write(None, output.render(head, cols, rows))
    if args.witness:
        cols, rows = output.witness_table(result, cfg.topology.num_links)
        output.write(args.witness, output.render(head, cols, rows))


def cmd_sweep(args) -> None:
    cfg = load_config(args.config)
    spec = SweepSpec(args.family, args.grid, args.index, args.resolution)
    result = sweep_scalar(cfg.topology, cfg.arrivals.rates, spec, args.tolerance, args.band)
    extra = {"sweep": args.family}
    if args.index is not None:
        extra["index"] = args.index
    extra["crossing"] = "-" if result.crossing is None else f"{result.crossing:.6f}"
    cols, rows = output.sweep_table(result)
    output.write(args.out, output.render(output.header_lines(cfg, extra=extra), cols, rows))


def cmd_matchings(args) -> None:
    cfg = load_config(args.config)
    ms = enumerate_maximal(cfg.topology)
    cols = [f"pi_{i + 1}" for i in range(cfg.topology.num_types)]
    output.write(args.out, output.render(output.header_lines(cfg), cols, ms))


def cmd_preset(args) -> None:
    if args.horizon is not None and args.horizon < 1:
        raise ConfigError("--horizon must be at least 1")
    run_preset(args.name, args.out, args.seed, args.horizon, args.jobs, args.stamp,
               log=lambda s: print(s, file=sys.stderr))


COMMANDS = {
    "simulate": cmd_simulate,
    "capacity": cmd_capacity,
    "sweep": cmd_sweep,
    "matchings": cmd_matchings,
    "preset": cmd_preset,
}


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        where = f" (key: {exc.key})" if exc.key else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return 2
    except (CapacityExceededError, SolverError, QueueOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
