"""Cell-less RF wireless power transfer: simulation, optimization, metrics."""

from .channel import (
    ChannelRealization,
    dbm_to_watts,
    draw_rician_channel,
    generate_realization,
    path_loss_gain,
    steering_vector,
)
from .errors import (
    CapacityError,
    EigenConvergenceError,
    FeasibilityError,
    ScenarioError,
    UndefinedRatioError,
)
from .metrics import (
    ChargingResult,
    MetricsReport,
    SarVerdict,
    charging_percent,
    compute_metrics,
    eh_per_device,
    recharged_energy_per_hour,
    sar_exposure,
    transfer_efficiency,
)
from .optimizer import (
    BeamAllocation,
    EigenPair,
    WeightedGram,
    beamed_power,
    build_gram,
    check_allocation,
    effective_power_watts,
    largest_eigenpair,
    objective_value,
    oracle_alpha_enumeration,
    oracle_random_search,
    select_target_device,
    solve_ap,
    solve_cellless,
)
from .smallcell import (
    CellAssignment,
    assign_cells,
    nearest_ap_id,
    smallcell_eh,
    solve_smallcell,
)
from .sweep import (
    SweepResult,
    SweepRow,
    SweepSpec,
    run_compare,
    run_once,
    run_sweep,
    run_validation,
    random_topology,
)
from .topology import (
    AccessPoint,
    Device,
    Position,
    Topology,
    default_scenario_path,
    load_scenario,
    scenario_from_dict,
    with_effective_power,
    with_uniform_antennas,
)

__version__ = "0.1.0"
