"""Photon-to-qubit transfer chain simulator.

Two stages: absorption of a single photon into a gradient-broadened spin
ensemble (storage), then a scheduled handoff of the resulting collective
excitation through a tunable cavity onto a qubit (transfer).  All transfer
quantities are in units of the cavity-qubit coupling G; the storage stage
uses the dimensionless depth/detuning variables of the propagation
equations.
"""

__version__ = "0.1.0"

from .core import (
    ConfigError,
    EfficiencyReport,
    FrequencyFrame,
    SingleExcitationState,
    SpinEnsemble,
    build_detuning_grid,
    golden_section,
    state_norm,
    symmetric_overlap,
)
from .storage import (
    CoherenceField,
    FlatSpectrumEnvelope,
    GaussianEnvelope,
    StorageError,
    StorageProblem,
    TableEnvelope,
    analytic_coherence,
    coherence_prefactor_sq,
    late_time_coherence,
    optimize_envelope_width,
    read_envelope_csv,
    solve_propagation,
    storage_efficiency,
    write_coherence_csv,
)
from .protocol import (
    ProtocolSchedule,
    Segment,
    ValidationReport,
    build_adiabatic,
    build_reduced_sweep,
    build_staggered,
    dressed_root,
    reverse_schedule,
    schedule_json_schema,
    validate_schedule,
)
from .transfer import (
    TransferError,
    TransferParams,
    TransferResult,
    TrajectoryRecord,
    eta_t_estimate,
    evolve,
    prepare_initial_state,
    reduced_three_mode,
    run_adiabatic,
    run_reduced_sweep_variant,
    run_reverse,
    run_staggered,
)
from .sweep import (
    AxisSpec,
    SweepResult,
    SweepSpec,
    fig_heatmap_spec,
    optimize_scalar,
    run_sweep,
    write_sweep_csv,
    write_sweep_sidecar,
)

__all__ = [
    "__version__",
    "ConfigError",
    "EfficiencyReport",
    "FrequencyFrame",
    "SingleExcitationState",
    "SpinEnsemble",
    "build_detuning_grid",
    "golden_section",
    "state_norm",
    "symmetric_overlap",
    "CoherenceField",
    "FlatSpectrumEnvelope",
    "GaussianEnvelope",
    "StorageError",
    "StorageProblem",
    "TableEnvelope",
    "analytic_coherence",
    "coherence_prefactor_sq",
    "late_time_coherence",
    "optimize_envelope_width",
    "read_envelope_csv",
    "solve_propagation",
    "storage_efficiency",
    "write_coherence_csv",
    "ProtocolSchedule",
    "Segment",
    "ValidationReport",
    "build_adiabatic",
    "build_reduced_sweep",
    "build_staggered",
    "dressed_root",
    "reverse_schedule",
    "schedule_json_schema",
    "validate_schedule",
    "TransferError",
    "TransferParams",
    "TransferResult",
    "TrajectoryRecord",
    "eta_t_estimate",
    "evolve",
    "prepare_initial_state",
    "reduced_three_mode",
    "run_adiabatic",
    "run_reduced_sweep_variant",
    "run_reverse",
    "run_staggered",
    "AxisSpec",
    "SweepResult",
    "SweepSpec",
    "fig_heatmap_spec",
    "optimize_scalar",
    "run_sweep",
    "write_sweep_csv",
    "write_sweep_sidecar",
]
