"""Reference machine and scenario defaults.

A lab-scale single-screw extruder running PLA: 200 mm barrel, 90 rpm, 10 mm
advance per revolution.  These are the values every CLI config falls back
to, and what the standard scenarios are built from.
"""

from __future__ import annotations

from .bangbang import SetpointConfig, min_slope
from .model import Coefficients, ExtruderParams, Perturbation, derive_coefficients
from .sim import ScenarioConfig

__all__ = [
    "default_params",
    "default_setpoint",
    "standard_config",
    "DEFAULT_X_STAR",
    "DEFAULT_X0",
    "DEFAULT_V_MAX",
    "DEFAULT_SLOPE_MARGIN",
    "DEFAULT_TAU",
    "DEFAULT_HORIZON",
    "PERTURBATION_PAIRS",
]

DEFAULT_X_STAR = 0.16
DEFAULT_X0 = 0.1
DEFAULT_V_MAX = 0.9
# commanded slope sits this far above the geometric minimum by default
DEFAULT_SLOPE_MARGIN = 30.0
DEFAULT_TAU = 1e-4
DEFAULT_HORIZON = 2.0

# the two standard transport-speed modulations exercised by the scenarios
PERTURBATION_PAIRS = ((0.1, 3.5), (0.4, 0.4))


def default_params() -> ExtruderParams:
    return ExtruderParams(
        L=0.2,
        N0=90.0,
        xi=0.01,
        B=9.3450e-9,
        Kd=2.45e-5,
        rho0=1240.0,
    )


def default_setpoint(
    coeffs: Coefficients | None = None,
    x_star: float = DEFAULT_X_STAR,
    v_max: float = DEFAULT_V_MAX,
    S: float | None = None,
) -> SetpointConfig:
    """Standard setpoint; S defaults to S_min plus the standard margin."""
    if coeffs is None:
        coeffs = derive_coefficients(default_params())
    if S is None:
        S = min_slope(coeffs, x_star, v_max) + DEFAULT_SLOPE_MARGIN
    return SetpointConfig(x_star=x_star, S=S, v_max=v_max)


def standard_config(
    mode: str = "compensated-full",
    eps: float = PERTURBATION_PAIRS[0][0],
    omega: float = PERTURBATION_PAIRS[0][1],
    *,
    x0: float = DEFAULT_X0,
    u_history0: float = 0.0,
    tau: float = DEFAULT_TAU,
    horizon: float = DEFAULT_HORIZON,
) -> ScenarioConfig:
    """The standard scenario with one of the stock perturbation pairs."""
    params = default_params()
    coeffs = derive_coefficients(params)
    return ScenarioConfig(
        mode=mode,
        params=params,
        pert=Perturbation(eps=eps, omega=omega),
        setpoint=default_setpoint(coeffs),
        x0=x0,
        u_history0=u_history0,
        tau=tau,
        horizon=horizon,
    )
