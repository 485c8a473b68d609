"""Network geometry: access points, devices, and scenario files.

A scenario is a JSON file describing AP positions and power limits, device
positions and battery parameters, and the channel-model constants. All
objects here are immutable; stochastic behaviour lives in the channel layer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .errors import ScenarioError

_TOP_KEYS = {"aps", "devices", "channel"}
_AP_KEYS = {"id", "x", "y", "antennas", "power_budget_dbm", "power_restriction_dbm"}
_DEVICE_KEYS = {
    "id",
    "x",
    "y",
    "xi",
    "battery_mah",
    "voltage_v",
    "discharge_mw_per_hour",
    "adapter_efficiency",
    "body_mass_kg",
}
_CHANNEL_KEYS = {"path_loss_exponent", "reference_distance_m", "rician_k_db"}


@dataclass(frozen=True)
class Position:
    """A point in the room plane, in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"position coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: Position) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class AccessPoint:
    """A multi-antenna power-transmitting access point."""

    id: int
    position: Position
    antenna_count: int
    power_budget_dbm: float
    power_restriction_dbm: float

    def __post_init__(self):
        if self.antenna_count < 1:
            raise ValueError(f"AP {self.id}: antenna_count must be >= 1, got {self.antenna_count}")
        for name in ("power_budget_dbm", "power_restriction_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"AP {self.id}: {name} must be finite")

    @property
    def effective_power_dbm(self) -> float:
        """Usable transmit power: the tighter of the regulatory cap and the energy budget."""
        return min(self.power_restriction_dbm, self.power_budget_dbm)


@dataclass(frozen=True)
class Device:
    """An energy-harvesting device with its battery parameters."""

    id: int
    position: Position
    conversion_efficiency: float
    battery_capacity_mah: float
    battery_voltage_v: float
    discharge_mw_per_hour: float
    adapter_efficiency: float
    body_mass_kg: float

    def __post_init__(self):
        if not 0.0 <= self.conversion_efficiency <= 1.0:
            raise ValueError(f"device {self.id}: conversion efficiency must lie in [0, 1]")
        if not 0.0 < self.adapter_efficiency <= 1.0:
            raise ValueError(f"device {self.id}: adapter efficiency must lie in (0, 1]")
        if self.battery_capacity_mah <= 0 or self.battery_voltage_v <= 0 or self.body_mass_kg <= 0:
            raise ValueError(f"device {self.id}: battery capacity, voltage and body mass must be positive")
        if self.discharge_mw_per_hour < 0:
            raise ValueError(f"device {self.id}: discharge rate must be nonnegative")


@dataclass(frozen=True)
class Topology:
    """Immutable scene description: APs, devices, and channel constants.

    APs and devices are normalized to ascending id order so that positional
    indices and id order agree everywhere downstream.
    """

    aps: tuple[AccessPoint, ...]
    devices: tuple[Device, ...]
    path_loss_exponent: float = 1.7
    reference_distance_m: float = 1.0
    rician_k_db: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "aps", tuple(sorted(self.aps, key=lambda a: a.id)))
        object.__setattr__(self, "devices", tuple(sorted(self.devices, key=lambda d: d.id)))
        if not self.aps or not self.devices:
            raise ValueError("topology needs at least one AP and one device")
        ap_ids = [a.id for a in self.aps]
        dev_ids = [d.id for d in self.devices]
        if len(set(ap_ids)) != len(ap_ids):
            raise ValueError("duplicate AP ids")
        if len(set(dev_ids)) != len(dev_ids):
            raise ValueError("duplicate device ids")
        if self.reference_distance_m <= 0:
            raise ValueError("reference distance must be positive")
        if self.path_loss_exponent < 0:
            raise ValueError("path loss exponent must be nonnegative")
        for ap in self.aps:
            for dev in self.devices:
                d = ap.position.distance_to(dev.position)
                if d < self.reference_distance_m:
                    raise ValueError(
                        f"AP {ap.id} and device {dev.id} are {d:.3g} m apart, "
                        f"closer than the reference distance {self.reference_distance_m} m"
                    )

    @property
    def ap_ids(self) -> tuple[int, ...]:
        return tuple(a.id for a in self.aps)

    @property
    def device_ids(self) -> tuple[int, ...]:
        return tuple(d.id for d in self.devices)

    def ap(self, ap_id: int) -> AccessPoint:
        for a in self.aps:
            if a.id == ap_id:
                return a
        raise KeyError(f"no AP with id {ap_id}")

    def device(self, device_id: int) -> Device:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(f"no device with id {device_id}")


def with_uniform_antennas(topology: Topology, antenna_count: int) -> Topology:
    """Copy of the topology with every AP set to the same antenna count."""
    aps = tuple(replace(ap, antenna_count=antenna_count) for ap in topology.aps)
    return replace(topology, aps=aps)


def with_effective_power(topology: Topology, power_dbm: float) -> Topology:
    """Copy of the topology with every AP's budget and restriction set to power_dbm.

    Setting both fields makes the effective per-AP power exactly the requested
    level, which keeps power sweeps linear in the corresponding watts.
    """
    aps = tuple(
        replace(ap, power_budget_dbm=power_dbm, power_restriction_dbm=power_dbm)
        for ap in topology.aps
    )
    return replace(topology, aps=aps)


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ScenarioError(f"missing required key '{key}' in {where}")
    return mapping[key]


def _reject_unknown(mapping: dict, allowed: set, where: str):
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ScenarioError(f"unknown key '{unknown[0]}' in {where}")


def _number(value, key: str, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"key '{key}' in {where} must be a number, got {value!r}")
    return float(value)


def scenario_from_dict(data: dict) -> Topology:
    """Build a Topology from parsed scenario JSON, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario root must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "scenario root")
    ap_entries = _require(data, "aps", "scenario root")
    dev_entries = _require(data, "devices", "scenario root")
    if not isinstance(ap_entries, list) or not isinstance(dev_entries, list):
        raise ScenarioError("'aps' and 'devices' must be lists")

    aps = []
    for i, entry in enumerate(ap_entries):
        where = f"aps[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where} must be an object")
        _reject_unknown(entry, _AP_KEYS, where)
        try:
            aps.append(
                AccessPoint(
                    id=int(_require(entry, "id", where)),
                    position=Position(
                        _number(_require(entry, "x", where), "x", where),
                        _number(_require(entry, "y", where), "y", where),
                    ),
                    antenna_count=int(_require(entry, "antennas", where)),
                    power_budget_dbm=_number(
                        _require(entry, "power_budget_dbm", where), "power_budget_dbm", where
                    ),
                    power_restriction_dbm=_number(
                        _require(entry, "power_restriction_dbm", where), "power_restriction_dbm", where
                    ),
                )
            )
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from exc

    devices = []
    for i, entry in enumerate(dev_entries):
        where = f"devices[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where} must be an object")
        _reject_unknown(entry, _DEVICE_KEYS, where)
        try:
            devices.append(
                Device(
                    id=int(_require(entry, "id", where)),
                    position=Position(
                        _number(_require(entry, "x", where), "x", where),
                        _number(_require(entry, "y", where), "y", where),
                    ),
                    conversion_efficiency=_number(_require(entry, "xi", where), "xi", where),
                    battery_capacity_mah=_number(
                        _require(entry, "battery_mah", where), "battery_mah", where
                    ),
                    battery_voltage_v=_number(_require(entry, "voltage_v", where), "voltage_v", where),
                    discharge_mw_per_hour=_number(
                        _require(entry, "discharge_mw_per_hour", where), "discharge_mw_per_hour", where
                    ),
                    adapter_efficiency=_number(
                        _require(entry, "adapter_efficiency", where), "adapter_efficiency", where
                    ),
                    body_mass_kg=_number(_require(entry, "body_mass_kg", where), "body_mass_kg", where),
                )
            )
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from exc

    channel = data.get("channel", {})
    if not isinstance(channel, dict):
        raise ScenarioError("'channel' must be an object")
    _reject_unknown(channel, _CHANNEL_KEYS, "channel")
    kwargs = {}
    if "path_loss_exponent" in channel:
        kwargs["path_loss_exponent"] = _number(channel["path_loss_exponent"], "path_loss_exponent", "channel")
    if "reference_distance_m" in channel:
        kwargs["reference_distance_m"] = _number(channel["reference_distance_m"], "reference_distance_m", "channel")
    if "rician_k_db" in channel:
        kwargs["rician_k_db"] = _number(channel["rician_k_db"], "rician_k_db", "channel")

    try:
        return Topology(aps=tuple(aps), devices=tuple(devices), **kwargs)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path: str | Path) -> Topology:
    """Load and validate a scenario file.

    Raises:
        ScenarioError: on JSON syntax errors (with line diagnostics), unknown
            or missing keys, or invariant violations.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data)


def default_scenario_path() -> Path:
    """Path of the packaged 3-AP, 5-device example scenario."""
    return Path(str(resources.files("cellless_wpt") / "scenarios" / "default.json"))
