"""Loading switch configurations from YAML (or JSON) files.

Schema::

    links:
      p: [0.7, 0.8, 0.6]          # one generation probability per link
      labels: [u1, u2, u3]        # optional
    types:
      - links: [0, 1]             # 0-based link indices
        q: 0.9
      - links: [1, 2]
        q: 0.8
    arrivals:
      rates: [0.35, 0.2]          # one rate per type
      distribution: bernoulli     # or poisson; default bernoulli
    allow_duplicate_types: true   # optional

Unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from qswitch.errors import ConfigError
from qswitch.model import ArrivalLaw, ArrivalSpec, Topology

TOP_KEYS = {"links", "types", "arrivals", "allow_duplicate_types"}
LINK_KEYS = {"p", "labels"}
TYPE_KEYS = {"links", "q"}
ARRIVAL_KEYS = {"rates", "distribution"}


@dataclass(frozen=True)
class SwitchConfig:
    topology: Topology
    arrivals: ArrivalSpec

    def to_dict(self) -> dict:
        d = self.topology.to_dict()
        d["arrivals"] = self.arrivals.to_dict()
        if not self.topology.allow_duplicate_types:
            d["allow_duplicate_types"] = False
        return d

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where or 'config'} must be a mapping", key=where or None)
    for key in section:
        if key not in allowed:
            name = f"{where}.{key}" if where else str(key)
            raise ConfigError(f"unknown config key {name!r}", key=name)


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing config key {where}.{key}", key=f"{where}.{key}")
    return section[key]


def _float_list(value, key: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key} must be a nonempty list of numbers", key=key)
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must contain only numbers", key=key) from None


def parse_config(data) -> SwitchConfig:
    _check_keys(data, TOP_KEYS, "")
    links = _require(data, "links", "")
    _check_keys(links, LINK_KEYS, "links")
    p = _float_list(_require(links, "p", "links"), "links.p")
    labels = links.get("labels")

    types = data.get("types")
    if not isinstance(types, list) or not types:
        raise ConfigError("types must be a nonempty list", key="types")
    type_links, q = [], []
    for i, entry in enumerate(types):
        where = f"types[{i}]"
        _check_keys(entry, TYPE_KEYS, where)
        ls = _require(entry, "links", where)
        if not isinstance(ls, list) or not all(isinstance(j, int) and not isinstance(j, bool) for j in ls):
            raise ConfigError(f"{where}.links must be a list of integers", key=f"{where}.links")
        type_links.append(tuple(ls))
        try:
            q.append(float(_require(entry, "q", where)))
        except (TypeError, ValueError):
            raise ConfigError(f"{where}.q must be a number", key=f"{where}.q") from None

    arrivals = _require(data, "arrivals", "")
    _check_keys(arrivals, ARRIVAL_KEYS, "arrivals")
    rates = _float_list(_require(arrivals, "rates", "arrivals"), "arrivals.rates")
    law = arrivals.get("distribution", "bernoulli")
    try:
        law = ArrivalLaw(str(law).lower())
    except ValueError:
        raise ConfigError(f"unknown arrival distribution {law!r}", key="arrivals.distribution") from None

    allow = data.get("allow_duplicate_types", True)
    if not isinstance(allow, bool):
        raise ConfigError("allow_duplicate_types must be true or false", key="allow_duplicate_types")

    topology = Topology(tuple(p), tuple(q), tuple(type_links),
                        tuple(labels) if labels is not None else None, allow)
    if len(rates) != topology.num_types:
        raise ConfigError(
            f"expected {topology.num_types} arrival rates, got {len(rates)}", key="arrivals.rates"
        )
    return SwitchConfig(topology, ArrivalSpec(tuple(rates), law))


def load_config(path: str | Path) -> SwitchConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    return parse_config(data)
