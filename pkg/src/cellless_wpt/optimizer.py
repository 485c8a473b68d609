"""Beamforming and AP-selection optimization for the cell-less network.

The total harvest-rate objective decomposes per AP into a quadratic form over
a weighted Gram matrix of the device channels, so each AP's optimal strategy
is a single beam along the dominant eigenvector at full effective power.
Selection indicators simply mark the beams that carry power. Two validation
oracles (random search with ascent polish, and exhaustive enumeration of the
selection indicators) certify optimality on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, dbm_to_watts
from .errors import CapacityError, EigenConvergenceError, FeasibilityError
from .topology import AccessPoint, Device, Topology

_POWER_TOL = 1e-12


@dataclass(frozen=True)
class WeightedGram:
    """Hermitian PSD matrix sum_n w_n h_n h_n^H for one AP's device channels."""

    matrix: np.ndarray
    ap_id: int = 0

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"gram matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m.view(np.float64))):
            raise ValueError("gram matrix has non-finite entries")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            raise ValueError("gram matrix is not Hermitian within 1e-12")
        if np.min(m.real.diagonal(), initial=0.0) < -1e-12:
            raise ValueError("gram matrix has a negative diagonal entry")
        m.setflags(write=False)

    @property
    def order(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EigenPair:
    """Dominant eigenvalue and phase-canonical unit eigenvector."""

    eigenvalue: float
    eigenvector: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.eigenvalue) or self.eigenvalue < 0:
            raise ValueError(f"eigenvalue must be finite and nonnegative, got {self.eigenvalue}")
        norm = np.linalg.norm(self.eigenvector)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"eigenvector norm is {norm}, expected 1")
        nz = np.flatnonzero(np.abs(self.eigenvector) > 1e-12)
        if nz.size:
            lead = self.eigenvector[nz[0]]
            if lead.imag != 0.0 or lead.real <= 0.0:
                raise ValueError("eigenvector is not phase-canonical")
        self.eigenvector.setflags(write=False)


@dataclass(frozen=True)
class BeamAllocation:
    """Per-AP beamformers plus the binary AP-device selection matrix.

    beamformers holds a vector for every (ap_id, device_id) pair; at most one
    per AP is nonzero. selection[i, j] is 1 exactly where the beam for
    (ap_ids[i], device_ids[j]) carries power. targets records the device each
    transmitting AP aimed at (reporting only; the beam direction already
    maximizes the network-wide harvest).
    """

    ap_ids: tuple[int, ...]
    device_ids: tuple[int, ...]
    beamformers: dict[tuple[int, int], np.ndarray]
    selection: np.ndarray
    targets: dict[int, int]

    def __post_init__(self):
        k, n = len(self.ap_ids), len(self.device_ids)
        if self.selection.shape != (k, n):
            raise ValueError(f"selection matrix must be {k}x{n}, got {self.selection.shape}")
        if not np.isin(self.selection, (0, 1)).all():
            raise ValueError("selection entries must be 0 or 1")
        for i, ap_id in enumerate(self.ap_ids):
            active = 0
            for j, dev_id in enumerate(self.device_ids):
                w = self.beamformers.get((ap_id, dev_id))
                if w is None:
                    raise ValueError(f"missing beamformer for pair ({ap_id}, {dev_id})")
                power = float(np.sum(np.abs(w) ** 2))
                if (power > 0) != bool(self.selection[i, j]):
                    raise ValueError(
                        f"selection[{i},{j}] inconsistent with beam power {power} "
                        f"for pair ({ap_id}, {dev_id})"
                    )
                active += power > 0
                w.setflags(write=False)
            if active > 1:
                raise ValueError(f"AP {ap_id} has {active} nonzero beams, at most one is allowed")
        self.selection.setflags(write=False)

    def ap_transmit_watts(self, ap_id: int) -> float:
        return float(
            sum(np.sum(np.abs(self.beamformers[(ap_id, d)]) ** 2) for d in self.device_ids)
        )

    def total_transmit_watts(self) -> float:
        return float(sum(self.ap_transmit_watts(a) for a in self.ap_ids))


def effective_power_watts(ap: AccessPoint) -> float:
    """Usable transmit power of an AP in watts."""
    return dbm_to_watts(ap.effective_power_dbm)


def build_gram(channels_k: list[np.ndarray], weights: list[float], ap_id: int = 0) -> WeightedGram:
    """Weighted sum of channel outer products for one AP.

    weights are the device conversion efficiencies; with equal weights this
    reduces to the plain sum of h h^H terms.
    """
    if len(channels_k) != len(weights):
        raise ValueError(f"{len(channels_k)} channels but {len(weights)} weights")
    if not channels_k:
        raise ValueError("need at least one channel vector")
    m = len(channels_k[0])
    for h in channels_k:
        if len(h) != m:
            raise ValueError(f"channel vectors have mixed lengths ({len(h)} vs {m})")
    for w in weights:
        if not 0.0 <= w <= 1.0:
            raise ValueError(f"weights must lie in [0, 1], got {w}")
    h_mat = np.asarray(channels_k, dtype=complex)
    w_arr = np.asarray(weights, dtype=float)
    gram = (h_mat * w_arr[:, None]).T @ h_mat.conj()
    gram = 0.5 * (gram + gram.conj().T)
    return WeightedGram(matrix=gram, ap_id=ap_id)


def _start_vector(m: int) -> np.ndarray:
    # First basis vector plus a tiny fixed ramp so the start is never exactly
    # orthogonal to the dominant eigenvector in generic position.
    v = np.zeros(m, dtype=complex)
    v[0] = 1.0
    v += 1e-4 * (np.arange(1, m + 1) / m)
    return v / np.linalg.norm(v)


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size == 0:
        return v
    j = nz[0]
    w = v * (v[j].conjugate() / abs(v[j]))
    w[j] = abs(v[j])
    return w


def _finalize_pair(eigenvalue: float, v: np.ndarray) -> EigenPair:
    v = v / np.linalg.norm(v)
    return EigenPair(eigenvalue=max(float(eigenvalue), 0.0), eigenvector=_canonical_phase(v))


def _rayleigh_refine(g: np.ndarray, v: np.ndarray, lam: float, tol: float):
    """Shifted inverse iterations from a power iterate.

    Converges cubically once close, which resolves the slow tail of power
    iteration when the top two eigenvalues nearly tie. Returns the best
    (eigenvalue, vector, residual) seen, or None if no solve succeeded.
    """
    m = g.shape[0]
    eye = np.eye(m, dtype=complex)
    x = v
    sigma = lam
    best = None
    for _ in range(30):
        try:
            y = np.linalg.solve(g - sigma * eye, x)
        except np.linalg.LinAlgError:
            sigma += 1e-13 * max(1.0, abs(sigma))
            continue
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0.0:
            sigma += 1e-13 * max(1.0, abs(sigma))
            continue
        x = y / norm
        gx = g @ x
        lam_x = float(np.real(x.conj() @ gx))
        res = float(np.linalg.norm(gx - lam_x * x))
        if best is None or res < best[2]:
            best = (lam_x, x.copy(), res)
        if res <= tol * max(1.0, lam_x):
            break
        sigma = lam_x
    return best


def largest_eigenpair(gram: WeightedGram, tol: float = 1e-12, max_iter: int = 10_000) -> EigenPair:
    """Dominant eigenpair of a Hermitian PSD matrix by power iteration.

    Deterministic: fixed start vector, no randomness. Shifted inverse
    iterations kick in if plain power steps stall near a degenerate top of
    the spectrum. A refinement is only accepted if it does not lower the
    Rayleigh quotient, so the result never drops below what power iteration
    alone certifies.

    Raises:
        EigenConvergenceError: residual tolerance not met within max_iter.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    g = gram.matrix
    m = gram.order
    if not np.any(g):
        return _finalize_pair(0.0, _basis_vector(m, 0))

    v = _start_vector(m)
    basis_cursor = 0
    lam = 0.0
    residual = np.inf
    refine_at = {150, 400, 1000, 3000, 6000}
    for it in range(max_iter):
        y = g @ v
        ynorm = np.linalg.norm(y)
        if ynorm == 0.0:
            # Start landed in the nullspace of a nonzero matrix; walk the basis.
            basis_cursor += 1
            if basis_cursor >= m:
                raise EigenConvergenceError(
                    "all deterministic start vectors lie in the nullspace", float(residual)
                )
            v = _basis_vector(m, basis_cursor)
            continue
        lam = float(np.real(v.conj() @ y))
        residual = float(np.linalg.norm(y - lam * v))
        if residual <= tol * max(1.0, lam):
            return _finalize_pair(lam, v)
        if it in refine_at:
            refined = _rayleigh_refine(g, v, lam, tol)
            if refined is not None:
                r_lam, r_v, r_res = refined
                acceptable = r_lam >= lam - 1e-9 * max(1.0, lam)
                if acceptable and r_res <= tol * max(1.0, r_lam):
                    return _finalize_pair(r_lam, r_v)
        v = y / ynorm

    refined = _rayleigh_refine(g, v, lam, tol)
    if refined is not None:
        r_lam, r_v, r_res = refined
        if r_lam >= lam - 1e-9 * max(1.0, lam) and r_res <= tol * max(1.0, r_lam):
            return _finalize_pair(r_lam, r_v)
    raise EigenConvergenceError(
        f"no convergence after {max_iter} iterations (last residual {residual:.3e})",
        float(residual),
    )


def _basis_vector(m: int, j: int) -> np.ndarray:
    v = np.zeros(m, dtype=complex)
    v[j] = 1.0
    return v


def select_target_device(channels_k: list[np.ndarray]) -> int:
    """Index of the device with the strongest channel (Euclidean norm).

    Ties resolve to the lowest index, which is the lowest device id when the
    list follows id order.
    """
    if not channels_k:
        raise ValueError("cannot select a target from an empty channel list")
    norms = [float(np.linalg.norm(h)) for h in channels_k]
    return int(np.argmax(norms))


def solve_ap(
    ap: AccessPoint, channels_k: list[np.ndarray], weights: list[float]
) -> tuple[np.ndarray, int, float]:
    """Optimal single beam for one AP given all device channels.

    Returns (beamformer, target device index, dominant eigenvalue). The AP's
    contribution to the total harvest rate is effective power * eigenvalue.
    """
    for h in channels_k:
        if len(h) != ap.antenna_count:
            raise ValueError(
                f"channel length {len(h)} does not match AP {ap.id}'s {ap.antenna_count} antennas"
            )
    gram = build_gram(channels_k, weights, ap_id=ap.id)
    pair = largest_eigenpair(gram)
    power = effective_power_watts(ap)
    # The harvest terms use the plain-transpose product w^T h, so the stored
    # beam is the conjugate of the eigen direction: w^T h then equals v^H h.
    beam = np.sqrt(power) * pair.eigenvector.conj()
    target = select_target_device(channels_k)
    return beam, target, pair.eigenvalue


def solve_cellless(topology: Topology, realization: ChannelRealization) -> BeamAllocation:
    """Jointly optimal beams and selections for the cell-less network.

    The problem decomposes per AP, so each AP is solved independently; the
    selection matrix then marks exactly the beams that carry power.
    """
    if realization.ap_ids != topology.ap_ids or realization.device_ids != topology.device_ids:
        raise ValueError("realization does not match the topology's AP/device ids")
    weights = [d.conversion_efficiency for d in topology.devices]
    device_ids = topology.device_ids
    beams: dict[tuple[int, int], np.ndarray] = {}
    selection = np.zeros((len(topology.aps), len(device_ids)), dtype=np.int8)
    targets: dict[int, int] = {}
    for i, ap in enumerate(topology.aps):
        channels = realization.for_ap(ap.id)
        beam, t, _ = solve_ap(ap, channels, weights)
        for j, dev_id in enumerate(device_ids):
            if j == t:
                beams[(ap.id, dev_id)] = beam
            else:
                beams[(ap.id, dev_id)] = np.zeros(ap.antenna_count, dtype=complex)
        if float(np.sum(np.abs(beam) ** 2)) > 0.0:
            selection[i, t] = 1
        targets[ap.id] = device_ids[t]
    return BeamAllocation(
        ap_ids=topology.ap_ids,
        device_ids=device_ids,
        beamformers=beams,
        selection=selection,
        targets=targets,
    )


def _beam_rows(allocation: BeamAllocation, ap_id: int) -> np.ndarray:
    i = allocation.ap_ids.index(ap_id)
    rows = np.asarray([allocation.beamformers[(ap_id, d)] for d in allocation.device_ids])
    return rows * allocation.selection[i][:, None]


def beamed_power(
    allocation: BeamAllocation,
    realization: ChannelRealization,
    serving: dict[int, int] | None = None,
) -> np.ndarray:
    """Incident RF power at each device in watts, before conversion loss.

    Sums |w^T h|^2 over every selected beam of every AP (plain transpose, no
    conjugation on the beam). With `serving`, device n only counts the beams
    of its serving AP, the accounting used by the pessimistic small-cell mode.
    """
    if allocation.ap_ids != realization.ap_ids or allocation.device_ids != realization.device_ids:
        raise ValueError("allocation and realization cover different AP/device ids")
    out = np.zeros(len(allocation.device_ids))
    for ap_id in allocation.ap_ids:
        rows = _beam_rows(allocation, ap_id)
        h_mat = np.asarray([realization.vector(ap_id, d) for d in allocation.device_ids])
        if rows.shape[1] != h_mat.shape[1]:
            raise ValueError(
                f"beam length {rows.shape[1]} does not match channel length "
                f"{h_mat.shape[1]} for AP {ap_id}"
            )
        # products[b, n] = w_b^T h_n
        products = rows @ h_mat.T
        per_device = np.sum(np.abs(products) ** 2, axis=0)
        if serving is None:
            out += per_device
        else:
            mask = np.array([serving.get(d) == ap_id for d in allocation.device_ids])
            out += per_device * mask
    return out


def objective_value(
    allocation: BeamAllocation, realization: ChannelRealization, devices: list[Device]
) -> float:
    """Total harvest rate in watts: sum over devices of efficiency * incident power."""
    xi = _efficiencies(devices, allocation.device_ids)
    incident = beamed_power(allocation, realization)
    return float(xi @ incident)


def _efficiencies(devices: list[Device], device_ids: tuple[int, ...]) -> np.ndarray:
    by_id = {d.id: d for d in devices}
    if set(by_id) != set(device_ids):
        raise ValueError("device list does not match the allocation's device ids")
    return np.array([by_id[d].conversion_efficiency for d in device_ids])


def check_allocation(topology: Topology, allocation: BeamAllocation) -> None:
    """Verify an allocation against the topology's power and structure limits.

    Raises:
        FeasibilityError: listing the first violated constraint.
    """
    if allocation.ap_ids != topology.ap_ids or allocation.device_ids != topology.device_ids:
        raise FeasibilityError("allocation does not cover the topology's AP/device ids")
    for ap in topology.aps:
        for dev_id in allocation.device_ids:
            w = allocation.beamformers[(ap.id, dev_id)]
            if len(w) != ap.antenna_count:
                raise FeasibilityError(
                    f"beam for ({ap.id}, {dev_id}) has length {len(w)}, "
                    f"AP has {ap.antenna_count} antennas"
                )
        power = allocation.ap_transmit_watts(ap.id)
        budget = effective_power_watts(ap)
        if power > budget + _POWER_TOL:
            raise FeasibilityError(
                f"AP {ap.id} transmits {power:.6e} W, above its effective power {budget:.6e} W"
            )


def oracle_random_search(
    topology: Topology,
    realization: ChannelRealization,
    samples: int,
    seed: int,
    *,
    polish: bool = True,
    polish_top: int = 256,
    polish_steps: int = 5000,
    inject_closed_form: bool = False,
) -> float:
    """Best total harvest rate found by random feasible beam sets.

    Each sample draws, per AP, unit beam directions for every device and a
    random full-power split across them. Candidates are scored through the
    per-AP quadratic forms; the best few are polished by normalized gradient
    ascent (repeated Gram multiplication with renormalization), which is
    monotone for PSD matrices and therefore can never exceed the dominant
    eigenvalue. The returned value is the literal harvest-rate sum of the
    best candidate's beams, so it is directly comparable with
    objective_value of the closed-form solution.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    weights = [d.conversion_efficiency for d in topology.devices]
    n = len(topology.devices)

    grams = []
    budgets = []
    for ap in topology.aps:
        grams.append(build_gram(realization.for_ap(ap.id), weights, ap_id=ap.id).matrix)
        budgets.append(effective_power_watts(ap))

    directions = []  # per AP: (samples, n, m) unit vectors in the conjugate space
    fractions = []  # per AP: (samples, n) rows on the power simplex
    totals = np.zeros(samples)
    for g, budget, ap in zip(grams, budgets, topology.aps):
        m = ap.antenna_count
        z = rng.standard_normal((samples, n, m)) + 1j * rng.standard_normal((samples, n, m))
        norms = np.linalg.norm(z, axis=2, keepdims=True)
        norms[norms == 0.0] = 1.0
        x = z / norms
        frac = rng.dirichlet(np.ones(n), size=samples)
        rayleigh = np.einsum("snm,mp,snp->sn", x.conj(), g, x).real
        totals += budget * np.sum(frac * rayleigh, axis=1)
        directions.append(x)
        fractions.append(frac)

    if inject_closed_form:
        closed = solve_cellless(topology, realization)
        for idx, ap in enumerate(topology.aps):
            rows = _beam_rows(closed, ap.id)
            powers = np.sum(np.abs(rows) ** 2, axis=1)
            total_power = powers.sum()
            frac = powers / total_power if total_power > 0 else np.full(n, 1.0 / n)
            unit = np.zeros_like(rows)
            for j in range(n):
                norm = np.sqrt(powers[j])
                unit[j] = rows[j].conj() / norm if norm > 0 else _basis_vector(rows.shape[1], 0)
            directions[idx][0] = unit
            fractions[idx][0] = frac
        totals[0] = sum(
            budget * float(np.sum(fractions[idx][0] * np.einsum("nm,mp,np->n", directions[idx][0].conj(), g, directions[idx][0]).real))
            for idx, (g, budget) in enumerate(zip(grams, budgets))
        )

    if polish:
        count = min(polish_top, samples)
        chosen = np.argsort(totals)[-count:]
    else:
        chosen = np.array([int(np.argmax(totals))])

    cand_dirs = [d[chosen].copy() for d in directions]
    cand_fracs = [f[chosen] for f in fractions]

    def _score() -> np.ndarray:
        vals = np.zeros(len(chosen))
        for g, budget, x, frac in zip(grams, budgets, cand_dirs, cand_fracs):
            rayleigh = np.einsum("cnm,mp,cnp->cn", x.conj(), g, x).real
            vals += budget * np.sum(frac * rayleigh, axis=1)
        return vals

    best_vals = _score()
    if polish:
        stale = 0
        for _ in range(polish_steps // 25):
            for _ in range(25):
                for idx, g in enumerate(grams):
                    y = np.einsum("mp,cnp->cnm", g, cand_dirs[idx])
                    norms = np.linalg.norm(y, axis=2, keepdims=True)
                    keep = norms == 0.0
                    norms[keep] = 1.0
                    cand_dirs[idx] = np.where(keep, cand_dirs[idx], y / norms)
            vals = _score()
            improvement = vals.max() - best_vals.max()
            best_vals = vals
            if improvement <= 1e-12 * max(1.0, best_vals.max()):
                stale += 1
                if stale >= 2:
                    break
            else:
                stale = 0

    winner = int(np.argmax(best_vals))
    xi = np.array(weights)
    incident = np.zeros(n)
    for g, budget, x, frac, ap in zip(grams, budgets, cand_dirs, cand_fracs, topology.aps):
        beams = np.sqrt(budget * frac[winner])[:, None] * x[winner].conj()
        h_mat = np.asarray([realization.vector(ap.id, d) for d in topology.device_ids])
        products = beams @ h_mat.T
        incident += np.sum(np.abs(products) ** 2, axis=0)
    return float(xi @ incident)


def oracle_alpha_enumeration(
    topology: Topology, realization: ChannelRealization
) -> dict[tuple[tuple[int, ...], ...], float]:
    """Optimal objective for every binary selection configuration.

    For a fixed selection matrix, an AP with at least one enabled beam slot
    can put its whole effective power on the dominant eigen direction, so the
    per-AP optimum only depends on whether the AP's row has any 1. The table
    therefore certifies that enabling everything is always optimal.

    Raises:
        CapacityError: if 2^(K*N) would exceed 2^16 configurations.
    """
    k = len(topology.aps)
    n = len(topology.devices)
    if k * n > 16:
        raise CapacityError(f"enumeration over 2^{k * n} selection matrices is too large (max 2^16)")
    weights = [d.conversion_efficiency for d in topology.devices]
    per_ap = []
    for ap in topology.aps:
        gram = build_gram(realization.for_ap(ap.id), weights, ap_id=ap.id)
        pair = largest_eigenpair(gram)
        per_ap.append(effective_power_watts(ap) * pair.eigenvalue)

    table: dict[tuple[tuple[int, ...], ...], float] = {}
    for mask in range(1 << (k * n)):
        rows = []
        value = 0.0
        for i in range(k):
            row = tuple((mask >> (i * n + j)) & 1 for j in range(n))
            rows.append(row)
            if any(row):
                value += per_ap[i]
        table[tuple(rows)] = value
    return table
