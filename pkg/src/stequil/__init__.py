"""Fast-thermalization control of a two-level system in a thermal bath."""

from .bath import DEFAULT_PREFACTOR, BathSpec, RatePair, bose_occupation, effective_frequency, rates
from .dynamics import (
    GibbsParameters,
    GibbsTrajectory,
    instantaneous_attractor,
    integrate,
    rhs_full,
    rhs_gibbs,
    state_from_parameters,
    superoperator_integrate,
    trace_distance,
)
from .propagation import (
    accuracy,
    exact_propagate,
    fidelity,
    inertial_heisenberg,
    propagate_state_exact,
    propagate_state_inertial,
    theta_bar,
)
from .protocol import ControlProtocol
from .su2 import (
    BasisFrame,
    EigenoperatorSet,
    InertialParameters,
    adiabatic_parameter,
    b_matrix,
    eigenoperators,
    generalized_rabi,
    kappa,
    v_matrix,
)
from .synthesis import (
    PRESET_NAMES,
    SynthesisConfig,
    adiabatic_work,
    boundary_conditions,
    phase,
    preset,
    quench_protocol,
    quintic_fit,
    solve_alpha,
    synthesize,
)
from .thermo import (
    ThermoLedger,
    build_ledger,
    effective_temperature,
    energy_entropy,
    entropy_production_rate,
    speed_limit_bound,
    von_neumann_entropy,
    work_efficiency,
)

__all__ = [name for name in dir() if not name.startswith("_")]
