"""Direct simulation of the transport PDE coupled to the interface ODE.

Cross-validation oracle for the delay representation.  The filling ratio
profile over the partially filled zone obeys a pure advection equation
toward the die, fed at the hopper boundary by the commanded input, while
the interface position follows the mass-balance ODE driven by the profile
value at the interface.  With constant transport speed this coupled system
is mathematically identical to the delay-ODE form, so independent
simulations of the two must agree to discretization error; with modulated
speed the delay form rescales the whole transit by the current speed while
the PDE integrates the speed history along characteristics, an O(eps)
modeling gap that the comparison quantifies rather than hides.

The profile is advected by the method of characteristics (exact shift plus
boundary fill), the interface by an explicit Euler step; both are first
order in the common resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, DomainError, ParameterError, SingularityError
from .model import Coefficients, Perturbation, flow_imbalance, transport_speed

__all__ = [
    "BiZoneState",
    "Trace",
    "initial_state",
    "step_pde",
    "run_bizone",
    "run_delay_reference",
    "trace_equivalence",
    "closed_loop_deviation",
]

# Filling ratios this close to 1 mean the screw is hydraulically locked.
_FULL_LIMIT = 1.0 - 1e-9


@dataclass(frozen=True, eq=False)
class BiZoneState:
    """Snapshot of the coupled system.

    t: simulation time
    x: interface position (m)
    u_profile: filling ratio samples on the uniform grid over [0, L];
        values left of x are carried along but have no physical role
    z_grid: grid spacing (m); the grid is z_j = j * z_grid
    """

    t: float
    x: float
    u_profile: np.ndarray
    z_grid: float

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.u_profile.shape[0]) * self.z_grid

    @property
    def length(self) -> float:
        return (self.u_profile.shape[0] - 1) * self.z_grid

    def u_at(self, z: float) -> float:
        """Profile value at position z by linear interpolation."""
        return float(np.interp(z, self.nodes, self.u_profile))


def _entry_time(coeffs: Coefficients, pert: Perturbation, t0: float, z: float) -> float:
    """Time at which the material now at z entered the barrel at the hopper.

    Solves the characteristic relation: the speed integrated from entry to
    t0 equals the distance travelled L - z.  The integral of c has the
    closed form theta1 (t + eps sin(omega t) / omega).
    """
    distance = coeffs.L - z
    if pert.eps == 0.0 or pert.omega == 0.0:
        return t0 - distance / (coeffs.theta1 * (1.0 + pert.eps))

    def cum(t: float) -> float:
        return coeffs.theta1 * (t + pert.eps * math.sin(pert.omega * t) / pert.omega)

    target = cum(t0) - distance
    lo = t0 - distance / (coeffs.theta1 * (1.0 - pert.eps)) - 1.0
    return brentq(lambda s: cum(s) - target, lo, t0, xtol=1e-14)


def initial_state(
    coeffs: Coefficients,
    pert: Perturbation,
    x0: float,
    inflow_history: Callable[[float], float],
    n_cells: int,
    t0: float = 0.0,
) -> BiZoneState:
    """Build a profile consistent with the boundary inputs fed before t0.

    Each grid value is the input that was at the hopper when the material
    now at that node entered, so a PDE run started from this state and a
    delay run started from the same input history describe the same
    machine.
    """
    if n_cells < 2:
        raise ParameterError(f"n_cells must be >= 2, got {n_cells!r}")
    if not 0.0 <= x0 <= coeffs.L:
        raise DomainError(f"x0 = {x0!r} outside [0, {coeffs.L}]")
    z_grid = coeffs.L / n_cells
    nodes = np.arange(n_cells + 1) * z_grid
    u0 = np.empty(n_cells + 1)
    for j, z in enumerate(nodes):
        value = float(inflow_history(_entry_time(coeffs, pert, t0, z)))
        if not 0.0 <= value < 1.0:
            raise DomainError(f"history value {value!r} at node {j} outside [0, 1)")
        u0[j] = value
    return BiZoneState(t=t0, x=float(x0), u_profile=u0, z_grid=z_grid)


def step_pde(
    coeffs: Coefficients, pert: Perturbation, state: BiZoneState, u_in: float, dt: float
) -> BiZoneState:
    """Advance the coupled system by one explicit step.

    The interface takes an Euler step on the profile value currently at the
    interface, then the profile is advected toward the die by the distance
    c(t) dt; nodes emptied at the hopper end are filled with the boundary
    input, which is held constant over the step.  dt must respect the CFL
    bound z_grid / (theta1 (1 + eps)) so the shift never exceeds one cell.
    Grid-aligned shifts reduce to an exact index shift.
    """
    if not 0.0 <= u_in < 1.0:
        raise DomainError(f"boundary input u_in = {u_in!r} outside [0, 1)")
    cfl = state.z_grid / (coeffs.theta1 * (1.0 + pert.eps))
    if dt > cfl * (1.0 + 1e-9):
        raise ParameterError(f"dt = {dt!r} exceeds the CFL bound {cfl!r}")
    c = transport_speed(coeffs, pert, state.t)
    u_here = state.u_at(state.x)
    if u_here >= _FULL_LIMIT:
        raise SingularityError(
            f"filling ratio {u_here!r} at the interface reached the fully filled limit"
        )
    x_new = state.x + dt * (-c * flow_imbalance(coeffs, state.x, u_here))
    if not 0.0 <= x_new <= state.length:
        raise DomainError(f"interface left the barrel: x = {x_new!r} at t = {state.t!r}")

    shift = c * dt
    cells = shift / state.z_grid
    k = round(cells)
    u = state.u_profile
    u_new = np.empty_like(u)
    if abs(cells - k) < 1e-9:
        # grid-aligned: pure index shift, no interpolation error
        if k > 0:
            u_new[:-k] = u[k:]
            u_new[-k:] = u_in
        else:
            u_new[:] = u
    else:
        query = state.nodes + shift
        inside = query <= state.length
        u_new[inside] = np.interp(query[inside], state.nodes, u)
        u_new[~inside] = u_in
    return BiZoneState(t=state.t + dt, x=x_new, u_profile=u_new, z_grid=state.z_grid)


@dataclass(frozen=True, eq=False)
class Trace:
    """Recorded (t, x) path of one simulation route."""

    t: np.ndarray
    x: np.ndarray


def run_bizone(
    coeffs: Coefficients,
    pert: Perturbation,
    x0: float,
    input_fn: Callable[[float], float],
    inflow_history: Callable[[float], float],
    n_cells: int,
    dt: float,
    horizon: float,
) -> Trace:
    """Drive the PDE route over a horizon with a known boundary input signal."""
    state = initial_state(coeffs, pert, x0, inflow_history, n_cells)
    n_steps = round(horizon / dt)
    t = np.arange(n_steps + 1) * dt
    x = np.empty(n_steps + 1)
    x[0] = state.x
    for i in range(n_steps):
        state = step_pde(coeffs, pert, state, float(input_fn(t[i])), dt)
        x[i + 1] = state.x
    return Trace(t=t, x=x)


def run_delay_reference(
    coeffs: Coefficients,
    pert: Perturbation,
    x0: float,
    input_fn: Callable[[float], float],
    inflow_history: Callable[[float], float],
    dt: float,
    horizon: float,
) -> Trace:
    """Drive the delay-ODE route with the same input signal and resolution.

    Euler on dx/dt = -c(t) Gamma(x, U(t - D(t, x))), with the delayed input
    read from the signal for t - D >= 0 and from the pre-run history
    otherwise.  Shares no state machinery with run_bizone, so agreement of
    the two routes checks both.
    """
    if not 0.0 <= x0 <= coeffs.L:
        raise DomainError(f"x0 = {x0!r} outside [0, {coeffs.L}]")
    n_steps = round(horizon / dt)
    t = np.arange(n_steps + 1) * dt
    x = np.empty(n_steps + 1)
    x[0] = x0
    xi = float(x0)
    for i in range(n_steps):
        ti = t[i]
        c = transport_speed(coeffs, pert, ti)
        s = ti - (coeffs.L - xi) / c
        u = float(input_fn(s)) if s >= 0.0 else float(inflow_history(s))
        xi = xi + dt * (-c * flow_imbalance(coeffs, xi, u))
        if not 0.0 <= xi <= coeffs.L:
            raise DomainError(f"interface left the barrel: x = {xi!r} at t = {ti!r}")
        x[i + 1] = xi
    return Trace(t=t, x=x)


def trace_equivalence(run_pde, run_delay) -> float:
    """Largest pointwise gap between the two routes' interface paths.

    Both runs must share the time grid; anything else means the comparison
    was set up with mismatched configurations.
    """
    ta, xa = np.asarray(run_pde.t), np.asarray(run_pde.x)
    tb, xb = np.asarray(run_delay.t), np.asarray(run_delay.x)
    if ta.shape != tb.shape:
        raise ConfigError(f"time grids differ in length: {ta.shape} vs {tb.shape}")
    if not np.allclose(ta, tb, rtol=0.0, atol=1e-9 * max(1.0, float(ta[-1]) if ta.size else 1.0)):
        raise ConfigError("time grids differ; the runs were configured inconsistently")
    return float(np.max(np.abs(xa - xb)))


def closed_loop_deviation(
    coeffs: Coefficients,
    pert: Perturbation,
    series,
    u_history0: float,
    n_cells: int = 2000,
) -> float:
    """Replay a recorded closed-loop input through the PDE route.

    Takes any record with t, x, and U arrays (the applied commands), feeds
    the commands to the PDE as a step-held boundary signal at the record's
    own step size, and returns the largest gap between the PDE interface
    path and the recorded one.
    """
    ts = np.asarray(series.t)
    us = np.asarray(series.U)
    dt = float(ts[1] - ts[0])
    z_grid = coeffs.L / n_cells
    if dt > z_grid / (coeffs.theta1 * (1.0 + pert.eps)) * (1.0 + 1e-9):
        raise ConfigError(
            f"record step {dt!r} violates the CFL bound for n_cells = {n_cells}"
        )

    def input_fn(s: float) -> float:
        j = int(np.searchsorted(ts, s, side="right")) - 1
        return float(us[min(max(j, 0), us.shape[0] - 1)])

    replay = run_bizone(
        coeffs,
        pert,
        float(series.x[0]),
        input_fn,
        lambda s: u_history0,
        n_cells,
        dt,
        float(ts[-1]),
    )
    return trace_equivalence(replay, Trace(t=ts, x=np.asarray(series.x)))
