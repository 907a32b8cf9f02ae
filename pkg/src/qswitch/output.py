"""CSV writers.

Every file opens with a comment line carrying the config hash, seed, arrival
law and policy, followed by a comment line with the full config as JSON, so
the header alone is enough to rerun the experiment.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from datetime import datetime, timezone
from pathlib import Path

from qswitch.capacity import CapacityResult, SweepResult
from qswitch.config import SwitchConfig
from qswitch.sim import SimTrace


def header_lines(
    config: SwitchConfig,
    seed: int | str | None = None,
    policy: str | None = None,
    extra: dict | None = None,
    stamp: bool = False,
) -> list[str]:
    first = [f"config_hash={config.digest()}"]
    first.append(f"seed={'-' if seed is None else seed}")
    first.append(f"arrivals={config.arrivals.distribution.value}")
    first.append(f"policy={policy or '-'}")
    for k, v in (extra or {}).items():
        first.append(f"{k}={v}")
    lines = ["# " + " ".join(first), "# config=" + config.canonical_json()]
    if stamp:
        lines.append("# created=" + datetime.now(timezone.utc).isoformat(timespec="seconds"))
    return lines


def fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def render(header: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write(path: str | Path | None, text: str) -> None:
    """Write to ``path``, or to stdout when it is None or '-'."""
    if path is None or str(path) == "-":
        print(text, end="")
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def trace_table(trace: SimTrace) -> tuple[list[str], list[list]]:
    M = trace.final_queues.size
    cols = ["slot", *(f"Q_{i + 1}" for i in range(M)), "qbar", *(f"cumdep_{i + 1}" for i in range(M))]
    rows = []
    for slot, q, d in zip(trace.queue_slots, trace.queue_series, trace.cumdep_series):
        rows.append([int(slot), *map(int, q), float(q.sum()) / M, *map(int, d)])
    return cols, rows


def summary_columns(M: int) -> list[str]:
    return [
        "seed",
        "horizon",
        "mean_qbar",
        *(f"deprate_{i + 1}" for i in range(M)),
        "mean_qbar_first_half",
        "mean_qbar_second_half",
    ]


def summary_row(trace: SimTrace) -> list:
    return [
        trace.seed,
        trace.horizon,
        trace.mean_qbar,
        *map(float, trace.departure_rates),
        trace.mean_qbar_first_half,
        trace.mean_qbar_second_half,
    ]


def capacity_table(result: CapacityResult) -> tuple[list[str], list[list]]:
    return ["rho_star", "verdict"], [[result.rho_star, result.verdict.value]]


def witness_table(result: CapacityResult, num_links: int) -> tuple[list[str], list[list]]:
    rows = []
    for (a, pi), b in sorted(result.witness.items(), key=lambda kv: (kv[0][0], [1 - f for f in kv[0][1]])):
        bits = "".join(str((a >> j) & 1) for j in range(num_links))
        rows.append([bits, "".join(map(str, pi)), b])
    return ["a_bits", "pi_flags", "b"], rows


def sweep_table(result: SweepResult) -> tuple[list[str], list[list]]:
    rows = []
    for r in result.rows:
        if r.rho_star is None:
            rows.append([r.value, "", f"error: {r.error}"])
        else:
            rows.append([r.value, r.rho_star, r.verdict.value])
    return ["value", "rho_star", "verdict"], rows
