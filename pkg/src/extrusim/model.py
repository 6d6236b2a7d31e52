"""Bi-zone screw extruder reduced to an interface ODE with transport delay.

The screw conveys polymer from the hopper (z = L) toward the die (z = 0).
Upstream of the moving interface x(t) the channel is only partly filled and
material travels at the transport speed c(t); downstream of x(t) the channel
is completely filled and builds the pressure that drives flow through the
die.  Mass balance across the interface gives a scalar ODE for x(t) driven
by the filling ratio u that was fed at the hopper one transport time ago,
so the feed acts through a state- and time-dependent input delay
D(t, x) = (L - x) / c(t).

Units: metres and minutes throughout; screw speed in rev/min; filling
ratios are dimensionless in [0, 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ConfigError, DesignAssumptionWarning, DomainError, ParameterError

__all__ = [
    "ExtruderParams",
    "Coefficients",
    "Perturbation",
    "derive_coefficients",
    "transport_speed",
    "delay",
    "delay_time_derivative",
    "flow_imbalance",
    "interface_velocity",
    "nozzle_flow",
    "open_loop_input",
]


@dataclass(frozen=True)
class ExtruderParams:
    """Geometry and material constants of the machine.

    L: barrel length from hopper to die (m)
    N0: nominal screw speed (rev/min)
    xi: net axial advance of conveyed material per screw revolution (m/rev)
    B: die conductance (m^4)
    Kd: pressure-flow coupling volume of the filled zone (m^3)
    rho0: melt density (kg/m^3)
    S_eff: effective channel section (m^2); only needed for absolute flow
    eta: melt viscosity (Pa s); informational, it cancels in the reduced model
    """

    L: float
    N0: float
    xi: float
    B: float
    Kd: float
    rho0: float
    S_eff: float | None = None
    eta: float | None = None

    def __post_init__(self) -> None:
        for name in ("L", "N0", "xi", "B", "Kd", "rho0"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
        for name in ("S_eff", "eta"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive when given, got {value!r}")


@dataclass(frozen=True)
class Coefficients:
    """Reduced model constants derived from the physical parameters.

    theta1: nominal transport speed xi * N0 (m per time unit)
    theta2: pressure-flow coupling Kd / (B * rho0) (1/m)
    theta2L: dimensionless coupling theta2 * L
    L: barrel length, carried along for the delay-window geometry (m)
    time_unit: unit of time for theta1 and every rate built from it
    """

    theta1: float
    theta2: float
    theta2L: float
    L: float
    time_unit: str = "min"


@dataclass(frozen=True)
class Perturbation:
    """Periodic transport-speed modulation c(t) = theta1 (1 + eps cos(omega t)).

    Models slow viscosity swings (for instance thermal cycling of the barrel)
    as a known rational perturbation of the conveying speed.  eps = 0 recovers
    the constant-speed model.
    """

    eps: float = 0.0
    omega: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.eps < 1.0):
            raise ParameterError(f"eps must lie in [0, 1), got {self.eps!r}")
        if not (self.omega >= 0.0 and math.isfinite(self.omega)):
            raise ParameterError(f"omega must be finite and >= 0, got {self.omega!r}")


def derive_coefficients(params: ExtruderParams) -> Coefficients:
    """Collapse the physical parameters into the two transport coefficients.

    Warns when theta2 * L >= 1: the gain design assumes the open-loop
    equilibrium input stays well below 1 on the whole barrel, which this
    product controls.
    """
    theta1 = params.xi * params.N0
    theta2 = params.Kd / (params.B * params.rho0)
    theta2L = theta2 * params.L
    if theta2L >= 1.0:
        warnings.warn(
            f"theta2 * L = {theta2L:.6g} >= 1 violates the setpoint design assumption",
            DesignAssumptionWarning,
            stacklevel=2,
        )
    return Coefficients(theta1=theta1, theta2=theta2, theta2L=theta2L, L=params.L)


def transport_speed(coeffs: Coefficients, pert: Perturbation, t: float) -> float:
    """Conveying speed c(t) = theta1 (1 + eps cos(omega t)), always positive."""
    return coeffs.theta1 * (1.0 + pert.eps * math.cos(pert.omega * t))


def delay(coeffs: Coefficients, pert: Perturbation, t: float, x: float) -> float:
    """Transport delay D(t, x) = (L - x) / c(t) seen by the hopper input."""
    if not 0.0 <= x <= coeffs.L:
        raise DomainError(f"interface position x = {x!r} outside [0, {coeffs.L}]")
    return (coeffs.L - x) / transport_speed(coeffs, pert, t)


def delay_time_derivative(coeffs: Coefficients, pert: Perturbation, t: float, x: float) -> float:
    """Partial derivative of D(t, x) with respect to t at frozen x."""
    if not 0.0 <= x <= coeffs.L:
        raise DomainError(f"interface position x = {x!r} outside [0, {coeffs.L}]")
    c = transport_speed(coeffs, pert, t)
    return coeffs.theta1 * pert.eps * pert.omega * math.sin(pert.omega * t) * (coeffs.L - x) / (c * c)


def flow_imbalance(coeffs: Coefficients, x: float, u: float) -> float:
    """Normalized discharge-minus-feed imbalance at the interface.

    Gamma(x, u) = theta2 x / ((1 + theta2 x)(1 - u)) - u / (1 - u).  Zero
    exactly when u equals the open-loop equilibrium input for position x;
    positive when discharge dominates (interface recedes), negative when
    feed dominates.  Callers own the x range; u must stay below the fully
    filled limit.
    """
    if u >= 1.0:
        raise DomainError(f"filling ratio u = {u!r} must stay below 1")
    t2x = coeffs.theta2 * x
    return t2x / ((1.0 + t2x) * (1.0 - u)) - u / (1.0 - u)


def interface_velocity(
    coeffs: Coefficients, pert: Perturbation, t: float, x: float, u: float
) -> float:
    """Interface ODE right-hand side dx/dt = -c(t) Gamma(x, u).

    u is the filling ratio arriving at the interface at time t, that is the
    input fed one transport delay earlier.  sign(dx/dt) = sign(u - v(x)):
    feeding above the equilibrium input fills the screw and pushes the
    interface toward the hopper.
    """
    return -transport_speed(coeffs, pert, t) * flow_imbalance(coeffs, x, u)


def nozzle_flow(
    params: ExtruderParams, coeffs: Coefficients, x: float, *, absolute: bool = False
) -> float:
    """Die output flow for filled-zone length x.

    Returns the normalized flow theta2 x / (1 + theta2 x) (fraction of the
    feed capacity rho0 * xi * S_eff * N0).  With absolute=True returns kg
    per time unit instead, which requires the effective section S_eff.
    """
    if not 0.0 <= x <= coeffs.L:
        raise DomainError(f"interface position x = {x!r} outside [0, {coeffs.L}]")
    t2x = coeffs.theta2 * x
    normalized = t2x / (1.0 + t2x)
    if not absolute:
        return normalized
    if params.S_eff is None:
        raise ConfigError("absolute nozzle flow requires S_eff to be configured")
    return params.rho0 * params.xi * params.S_eff * params.N0 * normalized


def open_loop_input(coeffs: Coefficients, x_star: float) -> float:
    """Constant feed v(x*) = theta2 x* / (1 + theta2 x*) holding x at x*.

    This is the unique input for which the interface ODE has x* as an
    equilibrium; it is also the steady normalized die flow at that point.
    """
    if not 0.0 <= x_star < coeffs.L:
        raise DomainError(f"setpoint x_star = {x_star!r} outside [0, {coeffs.L})")
    t2x = coeffs.theta2 * x_star
    return t2x / (1.0 + t2x)
