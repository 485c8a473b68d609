"""Harvest, charging and RF-exposure metrics for one solved network.

Powers are reported in milliwatts. Charging follows the linear battery
model: recharged energy per hour net of standby discharge, divided by the
battery's charge at its nominal voltage. Exposure compares the incident
power integrated over a 6-minute window against the 0.08 W/kg whole-body
absorption limit for the device owner's mass.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import ChannelRealization
from .errors import UndefinedRatioError
from .optimizer import BeamAllocation, beamed_power
from .topology import Topology

SAR_LIMIT_W_PER_KG = 0.08
SIX_MINUTES_S = 360.0
SECONDS_PER_HOUR = 3600.0

CSV_COLUMNS = ("device_id", "eh_mw", "beamed_mw", "per_hour_pct", "exposure_w", "limit_w", "pass")


class ChargingResult(NamedTuple):
    percent: float
    discharging: bool


class SarVerdict(NamedTuple):
    exposure_w: float
    limit_w: float
    passed: bool


@dataclass(frozen=True)
class MetricsReport:
    """Per-device harvest, charging and exposure figures for one realization."""

    device_ids: tuple[int, ...]
    eh_per_device_mw: tuple[float, ...]
    beamed_per_device_mw: tuple[float, ...]
    total_transmit_mw: float
    efficiency: float
    charge_percent_per_hour: tuple[float, ...]
    exposure_w_per_6min: tuple[float, ...]
    exposure_limit_w: tuple[float, ...]
    exposure_pass: tuple[bool, ...]

    @property
    def total_eh_mw(self) -> float:
        return float(sum(self.eh_per_device_mw))

    def csv_rows(self) -> list[tuple]:
        rows = []
        for i, dev_id in enumerate(self.device_ids):
            rows.append(
                (
                    dev_id,
                    self.eh_per_device_mw[i],
                    self.beamed_per_device_mw[i],
                    self.charge_percent_per_hour[i],
                    self.exposure_w_per_6min[i],
                    self.exposure_limit_w[i],
                    self.exposure_pass[i],
                )
            )
        return rows

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(CSV_COLUMNS) + "\n")
        for row in self.csv_rows():
            cells = [str(row[0])]
            cells += [repr(float(v)) for v in row[1:6]]
            cells.append("true" if row[6] else "false")
            out.write(",".join(cells) + "\n")
        return out.getvalue()

    def summary(self) -> str:
        lines = [
            f"total transmit power: {self.total_transmit_mw:.6g} mW",
            f"total harvest rate:   {self.total_eh_mw:.6g} mW",
            f"transfer efficiency:  {100.0 * self.efficiency:.4g} %",
            "per device:",
        ]
        for i, dev_id in enumerate(self.device_ids):
            verdict = "ok" if self.exposure_pass[i] else "OVER LIMIT"
            lines.append(
                f"  device {dev_id}: harvest {self.eh_per_device_mw[i]:.6g} mW, "
                f"charge {self.charge_percent_per_hour[i]:.4g} %/h, "
                f"exposure {self.exposure_w_per_6min[i]:.6g} W vs {self.exposure_limit_w[i]:.6g} W ({verdict})"
            )
        return "\n".join(lines) + "\n"


def eh_per_device(
    allocation: BeamAllocation, realization: ChannelRealization, devices
) -> list[float]:
    """Harvest rate of each device in milliwatts, device-id order."""
    by_id = {d.id: d for d in devices}
    if set(by_id) != set(allocation.device_ids):
        raise ValueError("device list does not match the allocation's device ids")
    xi = np.array([by_id[d].conversion_efficiency for d in allocation.device_ids])
    incident_w = beamed_power(allocation, realization)
    return [float(v) for v in 1000.0 * xi * incident_w]


def transfer_efficiency(total_eh_mw: float, allocation: BeamAllocation) -> float:
    """Harvested power divided by transmitted power.

    Raises:
        UndefinedRatioError: if the allocation transmits no power at all.
    """
    transmit_w = allocation.total_transmit_watts()
    if transmit_w <= 0.0:
        raise UndefinedRatioError("transfer efficiency is undefined with zero transmit power")
    return float(total_eh_mw / (1000.0 * transmit_w))


def recharged_energy_per_hour(eh_mw: float, adapter_efficiency: float) -> float:
    """Energy put into the battery over one hour of harvesting at eh_mw."""
    if eh_mw < 0:
        raise ValueError(f"harvest rate must be nonnegative, got {eh_mw}")
    if not 0.0 < adapter_efficiency <= 1.0:
        raise ValueError(f"adapter efficiency must lie in (0, 1], got {adapter_efficiency}")
    return adapter_efficiency * eh_mw * SECONDS_PER_HOUR


def charging_percent(
    er_mwh_per_h: float, ed_mwh_per_h: float, voltage_v: float, capacity_mah: float
) -> ChargingResult:
    """Battery percentage gained per hour; negative when discharge wins.

    The value is returned as-is (not clamped), with a flag marking net
    discharge.
    """
    if voltage_v <= 0 or capacity_mah <= 0:
        raise ValueError("voltage and capacity must be positive")
    percent = ((er_mwh_per_h - ed_mwh_per_h) / voltage_v) / capacity_mah * 100.0
    return ChargingResult(percent=float(percent), discharging=percent < 0.0)


def sar_exposure(beamed_mw: float, body_mass_kg: float) -> SarVerdict:
    """Exposure over a 6-minute window against the whole-body absorption limit.

    Worst case: the person absorbs the full power beamed at their device.
    Equality with the limit passes.
    """
    if body_mass_kg <= 0:
        raise ValueError(f"body mass must be positive, got {body_mass_kg}")
    if beamed_mw < 0:
        raise ValueError(f"beamed power must be nonnegative, got {beamed_mw}")
    exposure_w = beamed_mw / 1000.0 * SIX_MINUTES_S
    limit_w = SAR_LIMIT_W_PER_KG * body_mass_kg
    return SarVerdict(exposure_w=float(exposure_w), limit_w=float(limit_w), passed=exposure_w <= limit_w)


def compute_metrics(
    topology: Topology,
    realization: ChannelRealization,
    allocation: BeamAllocation,
    serving: dict[int, int] | None = None,
) -> MetricsReport:
    """Full metrics report for one solved realization.

    serving restricts the harvest accounting to each device's serving AP
    (small-cell own-cell mode); by default all incident beams count.
    """
    incident_w = beamed_power(allocation, realization, serving=serving)
    beamed_mw = 1000.0 * incident_w
    xi = np.array([d.conversion_efficiency for d in topology.devices])
    eh_mw = xi * beamed_mw

    charge = []
    exposure = []
    limits = []
    verdicts = []
    for dev, eh, beamed in zip(topology.devices, eh_mw, beamed_mw):
        er = recharged_energy_per_hour(float(eh), dev.adapter_efficiency)
        charge.append(
            charging_percent(
                er, dev.discharge_mw_per_hour, dev.battery_voltage_v, dev.battery_capacity_mah
            ).percent
        )
        sar = sar_exposure(float(beamed), dev.body_mass_kg)
        exposure.append(sar.exposure_w)
        limits.append(sar.limit_w)
        verdicts.append(sar.passed)

    total_eh = float(np.sum(eh_mw))
    return MetricsReport(
        device_ids=topology.device_ids,
        eh_per_device_mw=tuple(float(v) for v in eh_mw),
        beamed_per_device_mw=tuple(float(v) for v in beamed_mw),
        total_transmit_mw=1000.0 * allocation.total_transmit_watts(),
        efficiency=transfer_efficiency(total_eh, allocation),
        charge_percent_per_hour=tuple(charge),
        exposure_w_per_6min=tuple(exposure),
        exposure_limit_w=tuple(limits),
        exposure_pass=tuple(verdicts),
    )
