"""Small-cell comparison network: each device belongs to its nearest AP.

Every AP optimizes its beam over its own cell's channels only. Harvest can
be accounted physically (devices capture all incident RF, the default) or
pessimistically (a device only counts its serving AP's beams).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .optimizer import (
    BeamAllocation,
    beamed_power,
    build_gram,
    effective_power_watts,
    largest_eigenpair,
    objective_value,
    select_target_device,
)
from .topology import AccessPoint, Device, Topology

HARVEST_MODES = ("physical", "own-cell")


@dataclass(frozen=True)
class CellAssignment:
    """Device-to-AP mapping with the harvest accounting mode."""

    mapping: dict[int, int]
    mode: str = "physical"

    def __post_init__(self):
        if self.mode not in HARVEST_MODES:
            raise ValueError(f"unknown harvest mode {self.mode!r}, expected one of {HARVEST_MODES}")

    def cell_of(self, ap_id: int) -> list[int]:
        return [dev for dev, ap in self.mapping.items() if ap == ap_id]


def nearest_ap_id(x: float, y: float, aps: list[AccessPoint]) -> int:
    """Id of the closest AP; ties go to the lowest AP id."""
    best_id = None
    best_d = np.inf
    for ap in sorted(aps, key=lambda a: a.id):
        d = np.hypot(ap.position.x - x, ap.position.y - y)
        if d < best_d:
            best_d = d
            best_id = ap.id
    return best_id


def assign_cells(topology: Topology, mode: str = "physical") -> CellAssignment:
    """Nearest-AP cell partition of the devices."""
    mapping = {
        dev.id: nearest_ap_id(dev.position.x, dev.position.y, list(topology.aps))
        for dev in topology.devices
    }
    return CellAssignment(mapping=mapping, mode=mode)


def solve_smallcell(
    topology: Topology, realization: ChannelRealization, assignment: CellAssignment
) -> BeamAllocation:
    """Per-cell beam design: each AP only sees its own cell's channels.

    Transmitting APs use full effective power; an AP with an empty cell stays
    silent (zero beams, zero selection row).
    """
    if set(assignment.mapping) != set(topology.device_ids):
        raise ValueError("assignment does not cover exactly the topology's devices")
    for ap_id in assignment.mapping.values():
        if ap_id not in topology.ap_ids:
            raise ValueError(f"assignment references unknown AP id {ap_id}")

    device_ids = topology.device_ids
    beams: dict[tuple[int, int], np.ndarray] = {}
    selection = np.zeros((len(topology.aps), len(device_ids)), dtype=np.int8)
    targets: dict[int, int] = {}
    for i, ap in enumerate(topology.aps):
        cell = [d for d in topology.devices if assignment.mapping[d.id] == ap.id]
        for dev_id in device_ids:
            beams[(ap.id, dev_id)] = np.zeros(ap.antenna_count, dtype=complex)
        if not cell:
            continue
        channels = [realization.vector(ap.id, d.id) for d in cell]
        weights = [d.conversion_efficiency for d in cell]
        pair = largest_eigenpair(build_gram(channels, weights, ap_id=ap.id))
        beam = np.sqrt(effective_power_watts(ap)) * pair.eigenvector.conj()
        target_id = cell[select_target_device(channels)].id
        beams[(ap.id, target_id)] = beam
        selection[i, device_ids.index(target_id)] = 1
        targets[ap.id] = target_id
    return BeamAllocation(
        ap_ids=topology.ap_ids,
        device_ids=device_ids,
        beamformers=beams,
        selection=selection,
        targets=targets,
    )


def smallcell_eh(
    allocation: BeamAllocation,
    realization: ChannelRealization,
    devices: list[Device],
    assignment: CellAssignment,
    mode: str | None = None,
) -> float:
    """Total harvest rate of the small-cell network in watts.

    physical mode sums every AP's incident beams at every device; own-cell
    mode only credits each device with its serving AP's beams, so it can
    never exceed the physical figure.
    """
    mode = assignment.mode if mode is None else mode
    if mode not in HARVEST_MODES:
        raise ValueError(f"unknown harvest mode {mode!r}, expected one of {HARVEST_MODES}")
    if mode == "physical":
        return objective_value(allocation, realization, devices)
    by_id = {d.id: d for d in devices}
    xi = np.array([by_id[d].conversion_efficiency for d in allocation.device_ids])
    incident = beamed_power(allocation, realization, serving=assignment.mapping)
    return float(xi @ incident)
