"""Stochastic channel generation: distance path loss plus Rician fading.

Every (AP, device) pair draws from its own counter-based Philox stream keyed
by (seed, AP id, device id), so a realization is a pure function of the
topology and seed and does not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .topology import Topology

_MASK32 = (1 << 32) - 1
_MASK64 = (1 << 64) - 1


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a dBm power level to watts."""
    if not math.isfinite(p_dbm):
        raise ValueError(f"power level must be finite, got {p_dbm}")
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def path_loss_gain(distance_m: float, exponent: float = 1.7, reference_m: float = 1.0) -> float:
    """Linear power gain of the distance-law path loss model.

    Unit gain at the reference distance; distances below the reference are
    clamped to it, which keeps the model finite close to the antenna.
    """
    if reference_m <= 0:
        raise ValueError(f"reference distance must be positive, got {reference_m}")
    if distance_m < 0:
        raise ValueError(f"distance must be nonnegative, got {distance_m}")
    if exponent < 0:
        raise ValueError(f"path loss exponent must be nonnegative, got {exponent}")
    return (max(distance_m, reference_m) / reference_m) ** (-exponent)


def steering_vector(antenna_count: int, angle_rad: float) -> np.ndarray:
    """Half-wavelength ULA response; entry m carries phase pi * m * sin(angle)."""
    m = np.arange(antenna_count)
    return np.exp(1j * np.pi * m * np.sin(angle_rad))


def draw_rician_channel(
    antenna_count: int,
    k_factor_db: float,
    gain: float,
    los_angle: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw one channel vector with a Rician mix of LOS and scattered parts.

    The LOS component is the array steering vector at the device bearing, the
    scattered component is i.i.d. circularly-symmetric complex Gaussian with
    unit variance per antenna, so the expected squared norm is
    gain * antenna_count for any K-factor. k_factor_db accepts +inf (pure LOS)
    and -inf (pure scattering) as sentinels.

    Args:
        antenna_count: number of transmit antennas (>= 1).
        k_factor_db: Rician K-factor in dB.
        gain: linear path gain (> 0).
        los_angle: device bearing from the array, radians.
        rng: generator supplying the scattered component.

    Returns:
        Complex vector of length antenna_count.
    """
    if antenna_count < 1:
        raise ValueError(f"antenna_count must be >= 1, got {antenna_count}")
    if not gain > 0:
        raise ValueError(f"gain must be positive, got {gain}")
    amp = math.sqrt(gain)
    los = steering_vector(antenna_count, los_angle)
    if k_factor_db == math.inf:
        return amp * los
    scatter = (
        rng.standard_normal(antenna_count) + 1j * rng.standard_normal(antenna_count)
    ) / math.sqrt(2.0)
    if k_factor_db == -math.inf:
        return amp * scatter
    kappa = 10.0 ** (k_factor_db / 10.0)
    return amp * (
        math.sqrt(kappa / (kappa + 1.0)) * los + math.sqrt(1.0 / (kappa + 1.0)) * scatter
    )


@dataclass(frozen=True)
class ChannelRealization:
    """Complete channel map for one fading draw: (AP id, device id) -> vector."""

    ap_ids: tuple[int, ...]
    device_ids: tuple[int, ...]
    entries: dict[tuple[int, int], np.ndarray]
    seed: int

    def __post_init__(self):
        expected = len(self.ap_ids) * len(self.device_ids)
        if len(self.entries) != expected:
            raise ValueError(f"expected {expected} channel vectors, got {len(self.entries)}")
        for key, vec in self.entries.items():
            if key[0] not in self.ap_ids or key[1] not in self.device_ids:
                raise ValueError(f"channel entry {key} does not match the id sets")
            if not np.all(np.isfinite(vec.view(np.float64))):
                raise ValueError(f"channel vector for {key} has non-finite entries")
            vec.setflags(write=False)

    def vector(self, ap_id: int, device_id: int) -> np.ndarray:
        return self.entries[(ap_id, device_id)]

    def for_ap(self, ap_id: int) -> list[np.ndarray]:
        """Channel vectors toward every device, in device-id order."""
        return [self.entries[(ap_id, d)] for d in self.device_ids]


def _pair_rng(seed: int, ap_id: int, device_id: int) -> np.random.Generator:
    # Philox key words: (seed, ap_id:device_id). Counter-based, so each pair
    # is an independent stream regardless of generation order.
    key = np.array(
        [seed & _MASK64, ((ap_id & _MASK32) << 32) | (device_id & _MASK32)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def generate_realization(topology: Topology, seed: int) -> ChannelRealization:
    """Draw the full set of channel vectors for one fading realization.

    Deterministic in (topology, seed); regeneration is bit-identical.
    """
    entries: dict[tuple[int, int], np.ndarray] = {}
    for ap in topology.aps:
        for dev in topology.devices:
            distance = ap.position.distance_to(dev.position)
            gain = path_loss_gain(distance, topology.path_loss_exponent, topology.reference_distance_m)
            angle = math.atan2(dev.position.y - ap.position.y, dev.position.x - ap.position.x)
            rng = _pair_rng(seed, ap.id, dev.id)
            entries[(ap.id, dev.id)] = draw_rician_channel(
                ap.antenna_count, topology.rician_k_db, gain, angle, rng
            )
    return ChannelRealization(
        ap_ids=topology.ap_ids,
        device_ids=topology.device_ids,
        entries=entries,
        seed=seed,
    )
