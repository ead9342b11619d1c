"""Scenario configuration: network, primary traffic and simulation settings.

A scenario file is YAML with a ``schema_version`` and three optional
sections.  Every field inside a section is optional and falls back to the
repository default scenario below; unknown keys are rejected.  The SINR
threshold may be given in dB as ``sinr_threshold_db``; it is converted to
linear once, on load, and always serialised back as linear.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import yaml

from .aoi import PolicyKind
from .channel import RadioParams
from .geometry import Region

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Invalid scenario content; the message names the field and the constraint."""


@dataclass(frozen=True)
class NetworkConfig:
    coverage_radius: float = 500.0      # R [m]
    pr_distance: float = 200.0          # d_p [m]
    sr_distance: float = 20.0           # d_s [m]
    st_density: float = 1e-3            # λ_s [1/m^2]
    eh_radius: float = 80.0             # r_eh [m]
    gz_radius: float = 120.0            # r_gz [m]
    primary_power: float = 1.0          # P_p [W]
    secondary_power: float = 1e-3       # P_s [W]
    pathloss_exponent: float = 4.0      # α
    noise_power: float = 1e-10          # σ^2 [W]
    sinr_threshold: float = 1.0         # θ, linear
    access_prob: float = 0.5            # p_s

    def __post_init__(self):
        try:
            self.region
            self.radio
        except ValueError as exc:
            raise ScenarioError(f"network: {exc}") from None
        if not (self.st_density >= 0 and math.isfinite(self.st_density)):
            raise ScenarioError(f"network.st_density must be >= 0, got {self.st_density}")
        if not self.sr_distance > 0:
            raise ScenarioError(f"network.sr_distance must be > 0, got {self.sr_distance}")
        if not 0 <= self.access_prob <= 1:
            raise ScenarioError(f"network.access_prob must lie in [0, 1], got {self.access_prob}")

    @property
    def region(self) -> Region:
        return Region(self.coverage_radius, self.pr_distance, self.eh_radius, self.gz_radius)

    @property
    def radio(self) -> RadioParams:
        return RadioParams(self.primary_power, self.secondary_power, self.pathloss_exponent,
                           self.noise_power, self.sinr_threshold)


@dataclass(frozen=True)
class TrafficConfig:
    policy: str = "all"                     # fcfs | qr | gw | all
    arrival_rate: float = 0.2               # λ, Bernoulli per slot
    sampling_rate: Optional[float] = None   # q for GW; None means q = λ

    def __post_init__(self):
        if self.policy != "all":
            try:
                object.__setattr__(self, "policy", PolicyKind.parse(self.policy).value)
            except ValueError as exc:
                raise ScenarioError(f"traffic.policy: {exc}") from None
        if not 0 < self.arrival_rate < 1:
            raise ScenarioError(f"traffic.arrival_rate must lie in (0, 1), got {self.arrival_rate}")
        if self.sampling_rate is not None and not 0 < self.sampling_rate <= 1:
            raise ScenarioError(f"traffic.sampling_rate must lie in (0, 1], got {self.sampling_rate}")

    @property
    def q(self) -> float:
        return self.arrival_rate if self.sampling_rate is None else self.sampling_rate

    @property
    def policies(self) -> list[PolicyKind]:
        if self.policy == "all":
            return list(PolicyKind)
        return [PolicyKind(self.policy)]


@dataclass(frozen=True)
class SimSettings:
    slots: int = 1_000_000
    replications: int = 5
    seed: int = 1
    batches: int = 20
    warmup_fraction: float = 0.1
    harvest: str = "always"        # always | pt_active
    qr_handoff: str = "freshest"   # freshest | fifo

    def __post_init__(self):
        if self.slots < 10_000:
            raise ScenarioError(f"sim.slots must be >= 10000, got {self.slots}")
        if self.replications < 1:
            raise ScenarioError(f"sim.replications must be >= 1, got {self.replications}")
        if self.seed < 0:
            raise ScenarioError(f"sim.seed must be >= 0, got {self.seed}")
        if self.batches < 20:
            raise ScenarioError(f"sim.batches must be >= 20, got {self.batches}")
        if not 0 <= self.warmup_fraction < 1:
            raise ScenarioError(f"sim.warmup_fraction must lie in [0, 1), got {self.warmup_fraction}")
        if self.harvest not in ("always", "pt_active"):
            raise ScenarioError(f"sim.harvest must be 'always' or 'pt_active', got {self.harvest!r}")
        if self.qr_handoff not in ("freshest", "fifo"):
            raise ScenarioError(f"sim.qr_handoff must be 'freshest' or 'fifo', got {self.qr_handoff!r}")


@dataclass(frozen=True)
class Scenario:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    sim: SimSettings = field(default_factory=SimSettings)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, data: Any) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a mapping")
        data = dict(data)
        version = data.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise ScenarioError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
        unknown = set(data) - {"network", "traffic", "sim"}
        if unknown:
            raise ScenarioError(f"unknown top-level key(s): {sorted(unknown)}")
        net = data.get("network") or {}
        if not isinstance(net, dict):
            raise ScenarioError("network must be a mapping")
        net = dict(net)
        if "sinr_threshold_db" in net:
            if "sinr_threshold" in net:
                raise ScenarioError("network: give sinr_threshold or sinr_threshold_db, not both")
            db = _number("network", "sinr_threshold_db", net.pop("sinr_threshold_db"))
            net["sinr_threshold"] = 10.0 ** (db / 10.0)
        return cls(
            network=_build(NetworkConfig, "network", net),
            traffic=_build(TrafficConfig, "traffic", data.get("traffic") or {}),
            sim=_build(SimSettings, "sim", data.get("sim") or {}),
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "network": dataclasses.asdict(self.network),
            "traffic": dataclasses.asdict(self.traffic),
            "sim": dataclasses.asdict(self.sim),
        }

    def with_overrides(self, **changes) -> "Scenario":
        """Return a copy with ``section.field`` style or bare field overrides applied."""
        net, tr, sim = {}, {}, {}
        for key, value in changes.items():
            for target, cls_ in ((net, NetworkConfig), (tr, TrafficConfig), (sim, SimSettings)):
                if key in {f.name for f in fields(cls_)}:
                    target[key] = value
                    break
            else:
                raise ScenarioError(f"unknown parameter {key!r}")
        return Scenario(dataclasses.replace(self.network, **net),
                        dataclasses.replace(self.traffic, **tr),
                        dataclasses.replace(self.sim, **sim),
                        self.schema_version)


def _number(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{section}.{key} must be a number, got {value!r}")
    return value


def _build(cls_, section: str, raw: Any):
    if not isinstance(raw, dict):
        raise ScenarioError(f"{section} must be a mapping")
    known = {f.name: f for f in fields(cls_)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ScenarioError(f"unknown key(s) in {section}: {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        default = known[key].default
        if isinstance(default, str):
            if not isinstance(value, str):
                raise ScenarioError(f"{section}.{key} must be a string, got {value!r}")
        elif isinstance(default, int) and not isinstance(default, bool):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ScenarioError(f"{section}.{key} must be an integer, got {value!r}")
        elif value is not None or default is not None:
            value = float(_number(section, key, value))
            if not math.isfinite(value):
                raise ScenarioError(f"{section}.{key} must be finite, got {value!r}")
        kwargs[key] = value
    return cls_(**kwargs)


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from None
    return Scenario.from_dict(data)


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario.to_dict(), sort_keys=False)
