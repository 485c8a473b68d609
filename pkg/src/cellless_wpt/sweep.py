"""Monte Carlo harness: single runs, parameter sweeps, and self-validation.

Trial i of a sweep uses seed base_seed + i for its channel realization, so
the cell-less and small-cell solvers see identical channels per trial and
their totals can be compared pairwise. Grid cells are independent; rows only
depend on (scenario, spec), never on evaluation order.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import generate_realization
from .errors import FeasibilityError
from .metrics import MetricsReport, compute_metrics
from .optimizer import (
    BeamAllocation,
    build_gram,
    check_allocation,
    effective_power_watts,
    largest_eigenpair,
    objective_value,
    oracle_alpha_enumeration,
    oracle_random_search,
    solve_cellless,
)
from .smallcell import assign_cells, smallcell_eh, solve_smallcell
from .topology import (
    AccessPoint,
    Device,
    Position,
    Topology,
    load_scenario,
    with_effective_power,
    with_uniform_antennas,
)

MODES = ("cellless", "smallcell")


@dataclass(frozen=True)
class SweepSpec:
    """Grid of transmit powers and antenna counts, repeated over seeded trials."""

    power_dbm_values: tuple[float, ...]
    antenna_counts: tuple[int, ...]
    trials: int
    base_seed: int
    modes: tuple[str, ...] = MODES

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.power_dbm_values or not self.antenna_counts:
            raise ValueError("power and antenna lists must be non-empty")
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}, expected subset of {MODES}")
        if not self.modes:
            raise ValueError("at least one mode is required")


@dataclass(frozen=True)
class SweepRow:
    mode: str
    power_dbm: float
    antennas: int
    trial_seed: int
    total_eh_mw: float
    efficiency: float
    eh_per_device_mw: tuple[float, ...]


@dataclass(frozen=True)
class SweepResult:
    device_ids: tuple[int, ...]
    rows: tuple[SweepRow, ...]

    def rows_csv(self) -> str:
        out = io.StringIO()
        header = ["mode", "power_dbm", "antennas", "trial_seed", "total_eh_mw", "efficiency"]
        header += [f"eh_mw_dev{d}" for d in self.device_ids]
        out.write(",".join(header) + "\n")
        for r in self.rows:
            cells = [r.mode, repr(float(r.power_dbm)), str(r.antennas), str(r.trial_seed)]
            cells += [repr(float(r.total_eh_mw)), repr(float(r.efficiency))]
            cells += [repr(float(v)) for v in r.eh_per_device_mw]
            out.write(",".join(cells) + "\n")
        return out.getvalue()

    def summary_csv(self) -> str:
        out = io.StringIO()
        out.write(
            "mode,power_dbm,antennas,trials,mean_total_eh_mw,se_total_eh_mw,"
            "mean_efficiency,se_efficiency\n"
        )
        for mode, power, antennas in sorted(
            {(r.mode, r.power_dbm, r.antennas) for r in self.rows},
            key=lambda t: (t[0], t[1], t[2]),
        ):
            eh = np.array(
                [r.total_eh_mw for r in self.rows if (r.mode, r.power_dbm, r.antennas) == (mode, power, antennas)]
            )
            eff = np.array(
                [r.efficiency for r in self.rows if (r.mode, r.power_dbm, r.antennas) == (mode, power, antennas)]
            )
            t = len(eh)
            se_eh = float(np.std(eh, ddof=1) / math.sqrt(t)) if t > 1 else 0.0
            se_eff = float(np.std(eff, ddof=1) / math.sqrt(t)) if t > 1 else 0.0
            cells = [
                mode,
                repr(float(power)),
                str(antennas),
                str(t),
                repr(float(np.mean(eh))),
                repr(se_eh),
                repr(float(np.mean(eff))),
                repr(se_eff),
            ]
            out.write(",".join(cells) + "\n")
        return out.getvalue()


def _solve_mode(topology: Topology, realization, mode: str, smallcell_mode: str = "physical"):
    """Returns (allocation, serving map or None) for the requested network mode."""
    if mode == "cellless":
        return solve_cellless(topology, realization), None
    if mode == "smallcell":
        assignment = assign_cells(topology, smallcell_mode)
        allocation = solve_smallcell(topology, realization, assignment)
        serving = assignment.mapping if smallcell_mode == "own-cell" else None
        return allocation, serving
    raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")


def run_once(
    scenario_path: str | Path, seed: int, mode: str, smallcell_mode: str = "physical"
) -> MetricsReport:
    """Load a scenario, draw one realization, solve it, and report metrics."""
    topology = load_scenario(scenario_path)
    realization = generate_realization(topology, seed)
    allocation, serving = _solve_mode(topology, realization, mode, smallcell_mode)
    return compute_metrics(topology, realization, allocation, serving=serving)


def run_sweep(scenario_path: str | Path, spec: SweepSpec) -> SweepResult:
    """Run the full (mode, power, antennas, trial) grid for one scenario."""
    base = load_scenario(scenario_path)
    rows: list[SweepRow] = []
    for mode in spec.modes:
        for power in spec.power_dbm_values:
            for antennas in spec.antenna_counts:
                topology = with_effective_power(with_uniform_antennas(base, antennas), power)
                for trial in range(spec.trials):
                    seed = spec.base_seed + trial
                    realization = generate_realization(topology, seed)
                    allocation, serving = _solve_mode(topology, realization, mode)
                    report = compute_metrics(topology, realization, allocation, serving=serving)
                    rows.append(
                        SweepRow(
                            mode=mode,
                            power_dbm=power,
                            antennas=antennas,
                            trial_seed=seed,
                            total_eh_mw=report.total_eh_mw,
                            efficiency=report.efficiency,
                            eh_per_device_mw=report.eh_per_device_mw,
                        )
                    )
    return SweepResult(device_ids=base.device_ids, rows=tuple(rows))


@dataclass(frozen=True)
class CompareRow:
    trial_seed: int
    cellless_total_eh_mw: float
    smallcell_total_eh_mw: float
    gap_mw: float
    cellless_efficiency: float
    smallcell_efficiency: float


def run_compare(scenario_path: str | Path, seed: int, trials: int) -> list[CompareRow]:
    """Paired cell-less vs small-cell totals on identical channels per trial."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    topology = load_scenario(scenario_path)
    rows = []
    for trial in range(trials):
        trial_seed = seed + trial
        realization = generate_realization(topology, trial_seed)
        cell = compute_metrics(topology, realization, solve_cellless(topology, realization))
        assignment = assign_cells(topology)
        small = compute_metrics(
            topology, realization, solve_smallcell(topology, realization, assignment)
        )
        rows.append(
            CompareRow(
                trial_seed=trial_seed,
                cellless_total_eh_mw=cell.total_eh_mw,
                smallcell_total_eh_mw=small.total_eh_mw,
                gap_mw=cell.total_eh_mw - small.total_eh_mw,
                cellless_efficiency=cell.efficiency,
                smallcell_efficiency=small.efficiency,
            )
        )
    return rows


def compare_csv(rows: list[CompareRow]) -> str:
    out = io.StringIO()
    out.write(
        "trial_seed,cellless_total_eh_mw,smallcell_total_eh_mw,gap_mw,"
        "cellless_efficiency,smallcell_efficiency\n"
    )
    for r in rows:
        cells = [
            str(r.trial_seed),
            repr(float(r.cellless_total_eh_mw)),
            repr(float(r.smallcell_total_eh_mw)),
            repr(float(r.gap_mw)),
            repr(float(r.cellless_efficiency)),
            repr(float(r.smallcell_efficiency)),
        ]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def random_topology(
    seed: int,
    k_range: tuple[int, int] = (1, 3),
    n_range: tuple[int, int] = (2, 4),
    m_choices: tuple[int, ...] = (2, 3, 4),
    room_m: float = 20.0,
) -> Topology:
    """Random small instance used by the validation suite and tests.

    Antenna counts vary per AP, conversion efficiencies per device, and both
    power limits are drawn independently, so heterogeneous configurations get
    exercised. Device placement is resampled until every AP is at least the
    reference distance away.
    """
    rng = np.random.default_rng(seed)
    k = int(rng.integers(k_range[0], k_range[1] + 1))
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    aps = []
    for i in range(k):
        aps.append(
            AccessPoint(
                id=i + 1,
                position=Position(float(rng.uniform(0, room_m)), float(rng.uniform(0, room_m))),
                antenna_count=int(rng.choice(m_choices)),
                power_budget_dbm=float(rng.uniform(12.0, 20.0)),
                power_restriction_dbm=float(rng.uniform(14.0, 22.0)),
            )
        )
    devices = []
    for j in range(n):
        while True:
            pos = Position(float(rng.uniform(0, room_m)), float(rng.uniform(0, room_m)))
            if all(ap.position.distance_to(pos) >= 1.0 for ap in aps):
                break
        devices.append(
            Device(
                id=j + 1,
                position=pos,
                conversion_efficiency=float(rng.uniform(0.2, 0.9)),
                battery_capacity_mah=4000.0,
                battery_voltage_v=5.0,
                discharge_mw_per_hour=2058.0,
                adapter_efficiency=0.8,
                body_mass_kg=50.0,
            )
        )
    return Topology(aps=tuple(aps), devices=tuple(devices))


@dataclass
class ValidationReport:
    instances: int
    checks: int = 0
    failures: list[str] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _validate_instance(topology: Topology, realization, label: str, report: ValidationReport):
    weights = [d.conversion_efficiency for d in topology.devices]

    def check(name: str, ok: bool, detail: str = ""):
        report.checks += 1
        if not ok:
            report.failures.append(f"{label}: {name} failed {detail}".rstrip())

    allocation = solve_cellless(topology, realization)
    try:
        check_allocation(topology, allocation)
        check("feasibility", True)
    except FeasibilityError as exc:
        check("feasibility", False, str(exc))

    closed = objective_value(allocation, realization, list(topology.devices))
    identity = 0.0
    for ap in topology.aps:
        gram = build_gram(realization.for_ap(ap.id), weights, ap_id=ap.id)
        pair = largest_eigenpair(gram)
        residual = float(
            np.linalg.norm(gram.matrix @ pair.eigenvector - pair.eigenvalue * pair.eigenvector)
        )
        check(
            f"eigen residual (AP {ap.id})",
            residual <= 1e-10 * max(1.0, pair.eigenvalue),
            f"(residual {residual:.3e})",
        )
        identity += effective_power_watts(ap) * pair.eigenvalue
    check(
        "decomposition identity",
        abs(closed - identity) <= 1e-12 * max(1.0, abs(closed)),
        f"(objective {closed:.6e} vs sum {identity:.6e})",
    )

    oracle = oracle_random_search(topology, realization, samples=2000, seed=realization.seed + 1)
    check(
        "oracle dominance",
        oracle <= closed + 1e-9 * max(1.0, closed),
        f"(oracle {oracle:.6e} vs closed form {closed:.6e})",
    )

    table = oracle_alpha_enumeration(topology, realization)
    all_ones = tuple(tuple(1 for _ in topology.device_ids) for _ in topology.ap_ids)
    check(
        "selection enumeration maximum",
        max(table.values()) == table[all_ones],
        f"(max {max(table.values()):.6e} vs all-ones {table[all_ones]:.6e})",
    )

    assignment = assign_cells(topology)
    small_alloc = solve_smallcell(topology, realization, assignment)
    try:
        check_allocation(topology, small_alloc)
        check("small-cell feasibility", True)
    except FeasibilityError as exc:
        check("small-cell feasibility", False, str(exc))
    small = smallcell_eh(small_alloc, realization, list(topology.devices), assignment)
    check(
        "dominance over small-cell",
        small <= closed + 1e-12 * max(1.0, closed),
        f"(small-cell {small:.6e} vs cell-less {closed:.6e})",
    )


def run_validation(
    scenario_path: str | Path | None,
    instances: int,
    seed: int,
    self_test: bool = False,
) -> ValidationReport:
    """Check optimality and feasibility properties on random small instances.

    The scenario itself, when given, is validated first; then `instances`
    random topologies follow, each labelled with its replay seed. In
    self-test mode a deliberately corrupted beamformer (twice the power
    budget) is injected to confirm the feasibility check would catch it; the
    report then carries that expected failure.
    """
    if instances < 1:
        raise ValueError(f"instances must be >= 1, got {instances}")
    report = ValidationReport(instances=instances)

    if self_test:
        topology = (
            load_scenario(scenario_path) if scenario_path is not None else random_topology(seed)
        )
        realization = generate_realization(topology, seed)
        allocation = solve_cellless(topology, realization)
        beams = dict(allocation.beamformers)
        for key, w in beams.items():
            if np.any(w):
                beams[key] = w * math.sqrt(2.0)  # 2x the power budget
                break
        corrupted = BeamAllocation(
            ap_ids=allocation.ap_ids,
            device_ids=allocation.device_ids,
            beamformers=beams,
            selection=np.array(allocation.selection),
            targets=dict(allocation.targets),
        )
        try:
            check_allocation(topology, corrupted)
        except FeasibilityError as exc:
            report.failures.append(f"self-test: feasibility check failed as expected: {exc}")
            report.lines.append("self-test: corrupted beamformer detected")
            return report
        report.failures.append("self-test: corrupted beamformer was NOT detected")
        return report

    if scenario_path is not None:
        topology = load_scenario(scenario_path)
        realization = generate_realization(topology, seed)
        _validate_instance(topology, realization, "scenario", report)
        report.lines.append("scenario: checked")

    for j in range(instances):
        inst_seed = seed + 1 + j
        topology = random_topology(inst_seed)
        realization = generate_realization(topology, inst_seed)
        _validate_instance(topology, realization, f"instance seed={inst_seed}", report)
        report.lines.append(f"instance seed={inst_seed}: checked")
    return report
