"""Canned experiments on the three-user example switch.

fig2 and fig3 run Max-Weight at a moderate and a heavy load. fig4 and fig5
sweep a common link probability gamma, pairing the simulated mean queue with
the LP scaling factor at each grid point.
"""

from __future__ import annotations

import os
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from qswitch import output
from qswitch.capacity import SweepSpec, capacity, sweep_scalar
from qswitch.config import SwitchConfig
from qswitch.model import ArrivalSpec, figure1_topology
from qswitch.sim import SimOptions, SimTrace, run

FIG_P = (0.7, 0.8, 0.6)
FIG_Q = (0.9, 0.8, 0.7)
MODERATE_RATES = (0.35, 0.2, 0.15)
HEAVY_RATES = (0.45, 0.35, 0.25)


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    config: SwitchConfig
    horizon: int
    seeds: tuple[int, ...]
    grid: tuple[float, ...] = ()
    policy: str = "maxweight"


def _config(rates, p=FIG_P) -> SwitchConfig:
    return SwitchConfig(figure1_topology(p, FIG_Q), ArrivalSpec(rates))


PRESETS = {
    "fig2": ExperimentPreset("fig2", _config(MODERATE_RATES), 1_000_000, (0, 1, 2, 3, 4)),
    "fig3": ExperimentPreset("fig3", _config(HEAVY_RATES), 1_000_000, (0, 1, 2, 3, 4)),
    "fig4": ExperimentPreset(
        "fig4", _config(MODERATE_RATES), 1_000_000, (0,),
        grid=tuple(np.round(np.arange(0.50, 1.0001, 0.05), 4)),
    ),
    "fig5": ExperimentPreset(
        "fig5", _config(MODERATE_RATES), 1_000_000, (0,),
        grid=tuple(np.round(np.arange(0.75, 1.0001, 0.025), 4)),
    ),
}


def get_preset(name: str, seeds: Sequence[int] | None = None, horizon: int | None = None) -> ExperimentPreset:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    preset = PRESETS[name]
    if seeds is not None:
        preset = replace(preset, seeds=tuple(seeds))
    if horizon is not None:
        preset = replace(preset, horizon=horizon)
    return preset


def _run_job(args) -> SimTrace:
    config, policy, horizon, seed, stride = args
    return run(config.topology, config.arrivals, policy, horizon, seed,
               SimOptions(queue_stride=stride))


def fan_out(jobs: list, jobs_n: int | None) -> list[SimTrace]:
    workers = min(jobs_n or os.cpu_count() or 1, len(jobs))
    if workers <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs))


def run_stability(preset: ExperimentPreset, out: Path, jobs: int | None = None,
                  stamp: bool = False, log: Callable[[str], None] = print) -> list[SimTrace]:
    """fig2/fig3: one run per seed; a trace CSV per seed plus one summary CSV."""
    cfg = preset.config
    stride = max(1, preset.horizon // 1000)
    traces = fan_out([(cfg, preset.policy, preset.horizon, s, stride) for s in preset.seeds], jobs)
    M = cfg.topology.num_types
    for tr in traces:
        cols, rows = output.trace_table(tr)
        head = output.header_lines(cfg, tr.seed, preset.policy,
                                   {"preset": preset.name, "horizon": preset.horizon}, stamp)
        output.write(out / f"{preset.name}_trace_seed{tr.seed}.csv", output.render(head, cols, rows))
    seeds = ";".join(map(str, preset.seeds))
    head = output.header_lines(cfg, seeds, preset.policy,
                               {"preset": preset.name, "horizon": preset.horizon}, stamp)
    text = output.render(head, output.summary_columns(M), [output.summary_row(t) for t in traces])
    output.write(out / f"{preset.name}_summary.csv", text)
    res = capacity(cfg.topology, cfg.arrivals.rates)
    cols, rows = output.capacity_table(res)
    output.write(out / f"{preset.name}_capacity.csv",
                 output.render(output.header_lines(cfg, None, None, {"preset": preset.name}, stamp),
                               cols, rows))
    for t in traces:
        log(f"{preset.name} seed={t.seed} mean_qbar={t.mean_qbar:.4g} "
            f"halves={t.mean_qbar_first_half:.4g}/{t.mean_qbar_second_half:.4g}")
    log(f"{preset.name} rho_star={res.rho_star:.6g} verdict={res.verdict.value}")
    return traces


def run_gamma(preset: ExperimentPreset, out: Path, jobs: int | None = None,
              stamp: bool = False, log: Callable[[str], None] = print) -> list[list]:
    """fig4/fig5: simulate and solve the LP with every link probability set to gamma."""
    cfg = preset.config
    topo, rates = cfg.topology, cfg.arrivals.rates
    sweep = sweep_scalar(topo, rates, SweepSpec("p_all", preset.grid, resolution=1e-4))
    job_list = []
    for g in preset.grid:
        gcfg = SwitchConfig(topo.with_link_success([g] * topo.num_links), cfg.arrivals)
        for s in preset.seeds:
            job_list.append((gcfg, preset.policy, preset.horizon, s, 0))
    traces = fan_out(job_list, jobs)
    rows = []
    n_seeds = len(preset.seeds)
    for k, (g, point) in enumerate(zip(preset.grid, sweep.rows)):
        chunk = traces[k * n_seeds : (k + 1) * n_seeds]
        mean_qbar = float(np.mean([t.mean_qbar for t in chunk]))
        rows.append([float(g), mean_qbar, point.rho_star, point.verdict.value])
    seeds = ";".join(map(str, preset.seeds))
    extra = {"preset": preset.name, "horizon": preset.horizon, "sweep": "p_all",
             "crossing": "-" if sweep.crossing is None else f"{sweep.crossing:.6f}"}
    head = output.header_lines(cfg, seeds, preset.policy, extra, stamp)
    text = output.render(head, ["gamma", "mean_qbar", "rho_star", "verdict"], rows)
    output.write(out / f"{preset.name}_gamma.csv", text)
    for r in rows:
        log(f"{preset.name} gamma={r[0]:.3f} mean_qbar={r[1]:.4g} rho_star={r[2]:.4f} {r[3]}")
    if sweep.crossing is not None:
        log(f"{preset.name} LP crossing gamma*={sweep.crossing:.4f}")
    return rows


def run_preset(name: str, out: str | Path = ".", seeds: Sequence[int] | None = None,
               horizon: int | None = None, jobs: int | None = None, stamp: bool = False,
               log: Callable[[str], None] = print):
    preset = get_preset(name, seeds, horizon)
    out = Path(out)
    if preset.grid:
        return run_gamma(preset, out, jobs, stamp, log)
    return run_stability(preset, out, jobs, stamp, log)
