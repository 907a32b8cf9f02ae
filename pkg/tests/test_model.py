import warnings

import numpy as np
import pytest
from hypothesis import given

from qswitch.config import load_config, parse_config
from qswitch.errors import ConfigError
from qswitch.model import ArrivalLaw, ArrivalSpec, Topology, figure1_topology, validate

from conftest import topologies

FIG_RATES = (0.35, 0.2, 0.15)


def test_fig1_passes(fig1):
    report = validate(fig1, ArrivalSpec(FIG_RATES))
    assert report.passed
    assert report.offending_types == ()


def test_zero_swap_probability_fails():
    topo = figure1_topology(q=(0.9, 0.0, 0.7))
    report = validate(topo, ArrivalSpec(FIG_RATES))
    assert not report.passed
    assert report.offending_types == (1,)
    assert "types 2" in report.describe()


def test_dead_link_fails():
    topo = Topology((0.0,), (0.9,), ((0,),))
    report = validate(topo, ArrivalSpec((0.1,)))
    assert report.offending_types == (0,)


def test_zero_rate_type_is_not_checked():
    topo = figure1_topology(q=(0.9, 0.0, 0.7))
    assert validate(topo, ArrivalSpec((0.35, 0.0, 0.15))).passed


@given(topologies())
def test_validate_implies_positive_service_probability(topo):
    arrivals = ArrivalSpec(tuple(0.1 for _ in range(topo.num_types)))
    report = validate(topo, arrivals)
    assert report == validate(topo, arrivals)
    if report.passed:
        for i in range(topo.num_types):
            prod = topo.swap_success[i] * np.prod([topo.link_success[j] for j in topo.type_links[i]])
            assert prod > 0


@given(topologies())
def test_link_types_consistent(topo):
    for j, users in enumerate(topo.link_types):
        for i in range(topo.num_types):
            assert (i in users) == (j in topo.type_links[i])


@pytest.mark.parametrize(
    "kwargs, key",
    [
        (dict(link_success=(0.5,), swap_success=(0.5,), type_links=((),)), "types[0].links"),
        (dict(link_success=(0.5,), swap_success=(0.5,), type_links=((1,),)), "types[0].links"),
        (dict(link_success=(1.5,), swap_success=(0.5,), type_links=((0,),)), "links.p"),
        (dict(link_success=(0.5,), swap_success=(0.5, 0.5), type_links=((0,),)), "types[].q"),
    ],
)
def test_structural_errors(kwargs, key):
    with pytest.raises(ConfigError) as exc:
        Topology(**kwargs)
    assert exc.value.key == key


def test_duplicates_warn_or_reject():
    with pytest.warns(UserWarning, match="distinct queues"):
        topo = Topology((0.5,), (0.5, 0.5), ((0,), (0,)))
    assert topo.duplicate_types() == [(0, 1)]
    with pytest.raises(ConfigError):
        Topology((0.5,), (0.5, 0.5), ((0,), (0,)), allow_duplicate_types=False)


def test_bernoulli_rate_above_one_rejected():
    with pytest.raises(ConfigError):
        ArrivalSpec((1.2,))
    assert ArrivalSpec((1.2,), ArrivalLaw.POISSON).rates == (1.2,)
    with pytest.raises(ConfigError):
        ArrivalSpec((-0.1,))
    with pytest.raises(ConfigError):
        ArrivalSpec((float("nan"),), "poisson")


@pytest.mark.parametrize("law", ["bernoulli", "poisson"])
def test_arrival_sampling_mean(law):
    spec = ArrivalSpec((0.3, 0.05), law)
    a = spec.sample(np.random.default_rng(1), 200_000)
    assert a.dtype == np.int64
    np.testing.assert_allclose(a.mean(axis=0), spec.rates, rtol=0.03)
    if law == "bernoulli":
        assert a.max() <= 1


def test_figure1_sets(fig1):
    assert fig1.link_types == ((0, 2), (0, 1, 2), (1, 2))
    assert fig1.type_users == (("u1", "u2"), ("u2", "u3"), ("u1", "u2", "u3"))


BASE = {
    "links": {"p": [0.7, 0.8, 0.6]},
    "types": [{"links": [0, 1], "q": 0.9}, {"links": [1, 2], "q": 0.8}, {"links": [0, 1, 2], "q": 0.7}],
    "arrivals": {"rates": [0.35, 0.2, 0.15], "distribution": "bernoulli"},
}


def test_parse_config_roundtrip(fig1):
    cfg = parse_config(BASE)
    assert cfg.topology.type_links == fig1.type_links
    assert cfg.arrivals.rates == FIG_RATES
    assert parse_config(cfg.to_dict()) == cfg
    assert len(cfg.digest()) == 16


@pytest.mark.parametrize(
    "mutate, key",
    [
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d["links"].update(q=[1]), "links.q"),
        (lambda d: d["types"][1].update(rate=1), "types[1].rate"),
        (lambda d: d["arrivals"].update(distribution="uniform"), "arrivals.distribution"),
        (lambda d: d["arrivals"].update(rates=[0.1]), "arrivals.rates"),
        (lambda d: d["types"][0].pop("q"), "types[0].q"),
        (lambda d: d["types"][0].update(links=[0, 9]), "types[0].links"),
    ],
)
def test_parse_config_rejects(mutate, key):
    import copy

    data = copy.deepcopy(BASE)
    mutate(data)
    with pytest.raises(ConfigError) as exc:
        parse_config(data)
    assert exc.value.key == key


def test_load_shipped_configs():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cfg = load_config(root / "fig2.yaml")
    assert cfg.arrivals.rates == FIG_RATES
    assert load_config(root / "fig3.yaml").arrivals.rates == (0.45, 0.35, 0.25)
