"""Simulation and delay-compensated control of a bi-zone screw extruder.

The melt conveying zone is a transport channel: screw speed commanded at the
hopper end reaches the die end only after the plug has traversed the filled
section, so the control input acts under a delay that depends on both the
clock (screw-speed perturbations) and the state (the moving interface between
the partially and fully filled zones).  This package provides

* the reduced interface model and its transport coefficients (``model``),
* a saturated piecewise-exponential setpoint controller (``bangbang``),
* predictor feedback that compensates the input delay exactly, from state
  measurements alone, or from an estimated delay (``predictor``),
* sufficient-condition checks that the delay never outruns the input
  (``feasibility``),
* a first-principles two-zone transport simulator used to cross-validate the
  delay representation (``pde``),
* closed-loop scenario running, monitors and run comparison (``sim``),
* reference machine parameters (``defaults``) and a CLI (``extrusim``).

Units: metres for length, minutes for time, screw speed normalized to [0, 1).
"""

from .errors import (
    BoundednessError,
    ConfigError,
    DesignAssumptionWarning,
    DomainError,
    ExtrusimError,
    FeasibilityViolation,
    NoPositiveRootError,
    ParameterError,
    SingularityError,
    SolverFailure,
)
from .model import (
    Coefficients,
    ExtruderParams,
    Perturbation,
    delay,
    delay_time_derivative,
    derive_coefficients,
    flow_imbalance,
    interface_velocity,
    nozzle_flow,
    open_loop_input,
    transport_speed,
)
from .bangbang import ControllerGains, SetpointConfig, control, min_slope, solve_gains
from .predictor import (
    ActuatorHistory,
    PredictorOutput,
    backstepping_residual,
    delay_rate,
    predict,
    predict_estimated,
    predict_state_only,
)
from .feasibility import (
    EnvelopePeak,
    FeasibilityVerdict,
    check_feasibility,
    delay_rate_envelope,
    envelope_peak,
)
from .pde import (
    BiZoneState,
    Trace,
    closed_loop_deviation,
    initial_state,
    run_bizone,
    run_delay_reference,
    step_pde,
    trace_equivalence,
)
from .sim import (
    MODES,
    ComparisonResult,
    RunMetrics,
    ScenarioConfig,
    TimeSeries,
    compare_runs,
    run_monitors,
    run_scenario,
)
from .defaults import (
    DEFAULT_HORIZON,
    DEFAULT_TAU,
    DEFAULT_V_MAX,
    DEFAULT_X0,
    DEFAULT_X_STAR,
    PERTURBATION_PAIRS,
    default_params,
    default_setpoint,
    standard_config,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "ExtrusimError", "ParameterError", "DomainError", "ConfigError",
    "NoPositiveRootError", "SolverFailure", "FeasibilityViolation",
    "BoundednessError", "SingularityError", "DesignAssumptionWarning",
    # model
    "ExtruderParams", "Coefficients", "Perturbation", "derive_coefficients",
    "transport_speed", "delay", "delay_time_derivative", "flow_imbalance",
    "interface_velocity", "nozzle_flow", "open_loop_input",
    # controller
    "SetpointConfig", "ControllerGains", "min_slope", "solve_gains", "control",
    # predictor
    "ActuatorHistory", "PredictorOutput", "predict", "predict_state_only",
    "predict_estimated", "delay_rate", "backstepping_residual",
    # feasibility
    "FeasibilityVerdict", "EnvelopePeak", "delay_rate_envelope",
    "envelope_peak", "check_feasibility",
    # pde
    "BiZoneState", "Trace", "initial_state", "step_pde", "run_bizone",
    "run_delay_reference", "trace_equivalence", "closed_loop_deviation",
    # sim
    "MODES", "ScenarioConfig", "TimeSeries", "run_scenario", "run_monitors",
    "RunMetrics", "ComparisonResult", "compare_runs",
    # defaults
    "default_params", "default_setpoint", "standard_config",
    "DEFAULT_X_STAR", "DEFAULT_V_MAX", "DEFAULT_X0", "DEFAULT_TAU",
    "DEFAULT_HORIZON", "PERTURBATION_PAIRS",
]
