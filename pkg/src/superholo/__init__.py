"""Superadiabatic holonomic gates in a tripod atom and a Raman-cavity pair.

The modules follow the workflow: :mod:`pulses` builds and corrects the
drive schedules, :mod:`model` turns them into Hamiltonians and collapse
operators, :mod:`dynamics` integrates them, :mod:`gates` runs protocols
and sweeps, and :mod:`cli` wraps everything for the command line.
"""

from .dynamics import IntegratorConfig, Trajectory, evolve_master, evolve_unitary
from .errors import (
    BoundaryResidualWarning,
    ConfigurationError,
    DispersiveValidityWarning,
    DomainError,
    IntegrationDivergedError,
    LeakageWarning,
    SingularityError,
)
from .gates import (
    GateKind,
    GateProtocol,
    GateResult,
    analytic_holonomy,
    calibrate_msa_factor,
    gate_unitary_from_dynamics,
    run_cp_gate,
    run_single_qubit_gate,
    state_fidelity,
    sweep_decay,
    sweep_operation_time,
)
from .model import LindbladModel, RamanCavityModel, TripodModel, collapse_operators
from .pulses import (
    AdiabaticSchedule,
    CorrectedSchedule,
    DressingConfig,
    DressingMode,
    correct_schedule,
    tau_min,
    vitanov_schedule,
)

__version__ = "0.1.0"
