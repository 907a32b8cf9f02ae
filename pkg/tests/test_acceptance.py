"""Exit criteria for the package, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from qswitch.capacity import SweepSpec, Verdict, capacity, sweep_scalar
from qswitch.cli import run_cli
from qswitch.matching import enumerate_maximal
from qswitch.model import ArrivalSpec, Topology, figure1_topology
from qswitch.scheduler import max_weight
from qswitch.sim import drift_summary, run

from conftest import ACCEPTANCE, random_topology
from test_matching import brute_force_maximal

FIG2_RATES = (0.35, 0.2, 0.15)
FIG3_RATES = (0.45, 0.35, 0.25)
SEEDS = (0, 1, 2, 3, 4)
N = 1_000_000


def record(name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[name] = (ok, detail)
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def fig2_traces():
    topo = figure1_topology()
    return [run(topo, ArrivalSpec(FIG2_RATES), "maxweight", N, s) for s in SEEDS]


@pytest.fixture(scope="module")
def fig3_traces():
    topo = figure1_topology()
    return [run(topo, ArrivalSpec(FIG3_RATES), "maxweight", N, s) for s in SEEDS]


@pytest.fixture(scope="module")
def gamma_crossing():
    topo = figure1_topology()
    grid = tuple(np.round(np.arange(0.5, 1.0001, 0.05), 4))
    return sweep_scalar(topo, FIG2_RATES, SweepSpec("p_all", grid, resolution=1e-5)).crossing


def test_1_matching_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        topo = random_topology(rng, max_links=6, max_types=10)
        if enumerate_maximal(topo) != brute_force_maximal(topo):
            mismatches += 1
    elapsed = time.perf_counter() - start
    record("1 matching oracle equivalence", mismatches == 0 and elapsed < 10.0,
           f"{mismatches} mismatches over 200 topologies in {elapsed:.2f}s (limit 10s)")


def test_2_fig1_matching_set():
    got = enumerate_maximal(figure1_topology())
    record("2 fig1 matching set", set(got) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)} and len(got) == 3,
           f"got {got}")


def test_3_single_type_capacity_formula():
    rng = np.random.default_rng(99)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        K = int(rng.integers(1, 7))
        links = tuple(rng.choice(K, size=int(rng.integers(1, K + 1)), replace=False).tolist())
        p = rng.uniform(0.05, 1.0, K)
        q = float(rng.uniform(0.05, 1.0))
        lam = float(rng.uniform(0.01, 1.0))
        expected = q * float(np.prod(p[list(links)])) / lam
        got = capacity(Topology(tuple(p), (q,), (links,)), (lam,)).rho_star
        worst = max(worst, abs(got - expected))
    elapsed = time.perf_counter() - start
    record("3 single-type capacity formula", worst <= 1e-9 and elapsed < 5.0,
           f"max |rho* - q*prod(p)/lam| = {worst:.2e} (tol 1e-9) in {elapsed:.2f}s (limit 5s)")


def test_4_fig2_stability(fig2_traces):
    lines, ok = [], True
    for tr in fig2_traces:
        h1, h2 = tr.mean_qbar_first_half, tr.mean_qbar_second_half
        half_gap = abs(h2 - h1) / h1 if h1 > 0 else float("inf")
        rate_err = np.abs(tr.departure_rates - FIG2_RATES) / FIG2_RATES
        seed_ok = half_gap < 0.10 and (rate_err < 0.02).all()
        ok &= bool(seed_ok)
        lines.append(f"seed {tr.seed}: halves {h1:.4g}/{h2:.4g} (gap {half_gap:.1%}), "
                     f"max rate error {rate_err.max():.1%}")
    record("4 fig2 stability", ok, "; ".join(lines))


def test_5_fig3_instability(fig3_traces):
    ratios = [tr.qbar_at(N) / tr.qbar_at(100_000) for tr in fig3_traces]
    res = capacity(figure1_topology(), FIG3_RATES)
    ok = all(r >= 5 for r in ratios) and res.verdict is Verdict.EXTERIOR
    record("5 fig3 instability", ok,
           f"qbar(1e6)/qbar(1e5) = {[round(r, 2) for r in ratios]} (need >= 5); "
           f"rho*={res.rho_star:.4f} {res.verdict.value}")


def test_6a_gamma_threshold_location(gamma_crossing):
    g = gamma_crossing
    record("6 gamma threshold (LP crossing)", g is not None and 0.70 <= g <= 0.80,
           f"LP crossing gamma* = {g} (need within [0.70, 0.80])")


def test_6b_gamma_threshold_simulation(gamma_crossing):
    g = gamma_crossing
    assert g is not None
    topo = figure1_topology()
    lo = run(topo.with_link_success([g - 0.1] * 3), ArrivalSpec(FIG2_RATES), "maxweight", N, 0)
    hi = run(topo.with_link_success([g + 0.1] * 3), ArrivalSpec(FIG2_RATES), "maxweight", N, 0)
    ratio = lo.mean_qbar / hi.mean_qbar
    record("6 gamma threshold (simulation contrast)", ratio >= 10,
           f"mean_qbar at gamma*-0.1={g - 0.1:.3f}: {lo.mean_qbar:.4g}, "
           f"at gamma*+0.1={g + 0.1:.3f}: {hi.mean_qbar:.4g}, ratio {ratio:.3g} (need >= 10)")


def test_7_drift_negative(fig2_traces):
    lines, ok = [], True
    for tr in fig2_traces:
        cut = float(np.percentile(tr.drift_norms, 90))
        bins = drift_summary(tr, bins=10, lower=cut)
        positive = [b for b in bins if b.mean_drift >= 0]
        ok &= bool(bins) and not positive
        worst = max(b.mean_drift for b in bins)
        lines.append(f"seed {tr.seed}: {len(positive)}/{len(bins)} bins nonnegative, max mean drift {worst:.4g}")
    record("7 drift property", ok, "; ".join(lines))


def test_8_argmax_invariance():
    rng = np.random.default_rng(8)
    failures = 0
    cache = {}
    for draw in range(1000):
        key = draw % 50
        if key not in cache:
            topo = random_topology(rng, max_links=5, max_types=7)
            cache[key] = (topo, enumerate_maximal(topo))
        topo, ms = cache[key]
        T = tuple(rng.integers(0, 2, topo.num_links).tolist())
        Q = rng.integers(0, 100, topo.num_types)
        chosen = max_weight(T, tuple(Q.tolist()), ms, topo).chosen
        c = int(rng.integers(2, 10_000))
        scaled = max_weight(T, tuple((c * Q).tolist()), ms, topo).chosen
        perm = [ms[k] for k in rng.permutation(len(ms))]
        permuted = max_weight(T, tuple(Q.tolist()), perm, topo).chosen
        failures += (scaled != chosen) + (permuted != chosen)
    record("8 argmax invariance", failures == 0, f"{failures} changed choices over 1000 draws")


def test_9_determinism(tmp_path):
    for d in ("a", "b"):
        assert run_cli(["preset", "fig2", "--seed", "42", "--out", str(tmp_path / d)]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = names == sorted(p.name for p in (tmp_path / "b").iterdir()) and all(
        (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in names
    )
    record("9 determinism", same, f"{len(names)} files compared byte for byte: {', '.join(names)}")
