"""occq: transient occupancy analytics for infinite-server systems."""

__version__ = "0.1.0"

from .arrivals import (
    Constant,
    CutRate,
    Linear,
    PiecewiseLinear,
    cut,
    rate_from_json,
    sample_nhpp,
    started_at,
)
from .distributions import (
    Deterministic,
    ExcessDistribution,
    Exponential,
    Pareto,
    distribution_from_json,
    pareto_from_mean,
)
from .errors import (
    ConvergenceError,
    DegenerateError,
    DomainError,
    EngineError,
    InfeasibleError,
    UnsupportedError,
)
from .horizon import (
    LastDepartureLaw,
    RecoveryProblem,
    RecoverySchedule,
    congestion_probability,
    recovery_time,
    recovery_with_intervention,
)
from .observed import (
    ClassCount,
    ConditionalOccupancyLaw,
    ObservedState,
    conditional_law,
    departure_rate,
    elapsed_informed_prediction,
    new_arrivals_mean,
    nu_tau,
    poisson_approx_law,
    region_mass,
    remaining_survival,
    service_switch_mean,
    unconditional_mean,
)
from .simulate import (
    InitialState,
    ServiceSwitch,
    SimConfig,
    SimOutput,
    empirical_law,
    run,
)
