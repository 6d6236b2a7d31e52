"""Closed-loop scenario engine.

One explicit first-order integration drives every mode; the modes differ
only in how the applied feed command is produced and whether it reaches
the interface through the transport delay:

  open-loop                constant equilibrium feed v(x*)
  uncompensated            law evaluated on the current state, delay ignored
  delay-free               law on the current state, input applied instantly
  compensated-full         law on the full time+state predictor
  compensated-state-only   law on the nominal state predictor
  compensated-estimated    law on the nominal predictor against a perturbed machine

Delayed inputs are read from the recorded command history by linear
interpolation at t - D(t, x).  Runs are deterministic: identical configs
produce bit-identical records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bangbang import SetpointConfig, control, solve_gains
from .errors import ConfigError, DomainError, ParameterError
from .model import (
    Coefficients,
    ExtruderParams,
    Perturbation,
    delay,
    derive_coefficients,
    flow_imbalance,
    nozzle_flow,
    open_loop_input,
    transport_speed,
)
from .predictor import ActuatorHistory, predict, predict_estimated, predict_state_only

__all__ = [
    "MODES",
    "ScenarioConfig",
    "TimeSeries",
    "RunMetrics",
    "ComparisonResult",
    "run_scenario",
    "run_monitors",
    "compare_runs",
]

MODES = (
    "open-loop",
    "uncompensated",
    "compensated-full",
    "compensated-state-only",
    "compensated-estimated",
    "delay-free",
)

CSV_COLUMNS = ("t", "x", "U", "U_eff", "P", "sigma", "D", "dDdt", "flow", "F", "e")

_PREDICTOR_MODES = {"compensated-full", "compensated-state-only", "compensated-estimated"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one closed-loop run."""

    mode: str
    params: ExtruderParams
    pert: Perturbation
    setpoint: SetpointConfig
    x0: float
    u_history0: float = 0.0
    tau: float = 1e-4
    horizon: float = 2.0
    seed: int = 0  # reserved for future stochastic inputs

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose one of {', '.join(MODES)}")
        if not 0.0 < self.x0 < self.params.L:
            raise ParameterError(f"x0 = {self.x0!r} must lie strictly inside (0, {self.params.L})")
        if not 0.0 <= self.u_history0 < 1.0:
            raise ParameterError(f"u_history0 = {self.u_history0!r} outside [0, 1)")
        if not self.tau > 0.0:
            raise ParameterError(f"tau must be positive, got {self.tau!r}")
        if not self.horizon >= self.tau:
            raise ParameterError(f"horizon must cover at least one step, got {self.horizon!r}")


@dataclass(eq=False)
class TimeSeries:
    """Column-oriented record of one run, one row per integrator step.

    Columns: time, interface position, applied command, command reaching
    the interface, predicted position, predicted arrival time, delay,
    differenced delay rate, normalized die flow, worst window delay rate,
    and tracking error.  P, sigma, and F are nan for modes that do not run
    a predictor.
    """

    mode: str
    tau: float
    x_star: float
    v_star: float
    t: np.ndarray
    x: np.ndarray
    U: np.ndarray
    U_eff: np.ndarray
    P: np.ndarray
    sigma: np.ndarray
    D: np.ndarray
    dDdt: np.ndarray
    flow: np.ndarray
    F: np.ndarray
    e: np.ndarray

    def __len__(self) -> int:
        return self.t.shape[0]

    def columns(self) -> np.ndarray:
        return np.column_stack([getattr(self, name) for name in CSV_COLUMNS])

    def to_csv(self, path) -> None:
        """Write the record with full float precision (17 significant digits)."""
        np.savetxt(
            path,
            self.columns(),
            fmt="%.17g",
            delimiter=",",
            header=",".join(CSV_COLUMNS),
            comments="",
        )

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
        if header != ",".join(CSV_COLUMNS):
            raise ConfigError(f"unexpected CSV header {header!r}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        cols = dict(zip(CSV_COLUMNS, data.T))
        tau = float(cols["t"][1] - cols["t"][0]) if cols["t"].shape[0] > 1 else 0.0
        x_star = float(cols["x"][0] - cols["e"][0])
        return cls(mode="", tau=tau, x_star=x_star, v_star=math.nan, **cols)


def run_scenario(config: ScenarioConfig, *, predictor_diagnostics: bool = False) -> TimeSeries:
    """Integrate one scenario and return its record.

    predictor_diagnostics=True also evaluates the predictor in the
    open-loop and uncompensated modes, purely to populate the P, sigma,
    and F columns for analysis; the applied command is unaffected.
    """
    coeffs = derive_coefficients(config.params)
    pert = config.pert
    setpoint = config.setpoint
    mode = config.mode
    tau = config.tau
    v_star = open_loop_input(coeffs, setpoint.x_star)
    gains = None if mode == "open-loop" else solve_gains(setpoint, coeffs)

    n_steps = round(config.horizon / tau)
    n_rows = n_steps + 1
    t = np.arange(n_rows) * tau
    col = {name: np.empty(n_rows) for name in ("x", "U", "U_eff", "P", "sigma", "D", "flow", "F")}

    use_history = mode != "delay-free"
    history = None
    if use_history:
        d_max = coeffs.L / (coeffs.theta1 * (1.0 - pert.eps))
        history = ActuatorHistory.prefilled(tau, d_max, fill=config.u_history0, t_end=0.0)

    run_predictor = mode in _PREDICTOR_MODES or (
        predictor_diagnostics and mode in ("open-loop", "uncompensated")
    )

    x = float(config.x0)
    for i in range(n_rows):
        ti = t[i]
        d_i = 0.0 if mode == "delay-free" else delay(coeffs, pert, ti, x)

        p_i = sigma_i = f_i = math.nan
        if run_predictor:
            if mode in ("compensated-full", "open-loop", "uncompensated"):
                out = predict(coeffs, pert, x, ti, history)
            elif mode == "compensated-state-only":
                out = predict_state_only(coeffs, x, ti, history)
            else:
                out = predict_estimated(coeffs, x, ti, history)
            p_i, sigma_i, f_i = out.P, out.sigma, out.max_rate

        if mode == "open-loop":
            u_applied = v_star
        elif mode in ("uncompensated", "delay-free"):
            u_applied = control(x, setpoint, gains)
        else:
            u_applied = control(p_i, setpoint, gains)

        if use_history:
            history.append(u_applied)
            u_eff = history.value_at(ti - d_i)
        else:
            u_eff = u_applied

        col["x"][i] = x
        col["U"][i] = u_applied
        col["U_eff"][i] = u_eff
        col["P"][i] = p_i
        col["sigma"][i] = sigma_i
        col["D"][i] = d_i
        col["flow"][i] = nozzle_flow(config.params, coeffs, x)
        col["F"][i] = f_i

        if i < n_steps:
            x = float(x + tau * (-transport_speed(coeffs, pert, ti) * flow_imbalance(coeffs, x, u_eff)))
            if not 0.0 <= x <= coeffs.L:
                raise DomainError(
                    f"interface left the barrel: x = {x!r} after step {i} (t = {ti:.6g})"
                )

    # delay rate along the realized trajectory, centered differences inside
    dDdt = np.gradient(col["D"], tau) if n_rows > 1 else np.zeros(1)

    return TimeSeries(
        mode=mode,
        tau=tau,
        x_star=setpoint.x_star,
        v_star=v_star,
        t=t,
        x=col["x"],
        U=col["U"],
        U_eff=col["U_eff"],
        P=col["P"],
        sigma=col["sigma"],
        D=col["D"],
        dDdt=dDdt,
        flow=col["flow"],
        F=col["F"],
        e=col["x"] - setpoint.x_star,
    )


def run_monitors(series: TimeSeries, coeffs: Coefficients, pert: Perturbation) -> dict:
    """Post-run feasibility bookkeeping for a record.

    Reports the extreme differenced delay rate, the delay against its
    model bound L / (theta1 (1 - eps)), and the worst predictor window
    denominator observed (nan when no predictor ran).
    """
    finite_f = series.F[np.isfinite(series.F)]
    max_f = float(np.max(finite_f)) if finite_f.size else math.nan
    d_bound = coeffs.L / (coeffs.theta1 * (1.0 - pert.eps))
    return {
        "max_dDdt": float(np.max(series.dDdt)),
        "max_D": float(np.max(series.D)),
        "delay_bound": d_bound,
        "delay_within_bound": bool(np.all(series.D <= d_bound * (1.0 + 1e-12))),
        "max_window_rate": max_f,
        "min_denominator": 1.0 - max_f if math.isfinite(max_f) else math.nan,
        "rate_below_unity": bool(np.max(series.dDdt) < 1.0),
    }


@dataclass(frozen=True)
class RunMetrics:
    """Convergence summary of one run.

    settling_time: first time after which |e| stays below the tolerance
        for the rest of the horizon (inf if that never happens)
    max_abs_error: largest |e| over the whole run
    input_effort: integral of |U - v(x*)| over the horizon
    """

    settling_time: float
    max_abs_error: float
    input_effort: float


@dataclass(frozen=True)
class ComparisonResult:
    a: RunMetrics
    b: RunMetrics


def _metrics(series: TimeSeries, v_star: float, settle_tol: float) -> RunMetrics:
    abs_e = np.abs(series.e)
    bad = np.flatnonzero(abs_e >= settle_tol)
    if bad.size == 0:
        settling = float(series.t[0])
    elif bad[-1] == abs_e.shape[0] - 1:
        settling = math.inf
    else:
        settling = float(series.t[bad[-1] + 1])
    effort = float(np.trapezoid(np.abs(series.U - v_star), series.t))
    return RunMetrics(
        settling_time=settling,
        max_abs_error=float(np.max(abs_e)),
        input_effort=effort,
    )


def compare_runs(a: TimeSeries, b: TimeSeries, settle_tol: float = 1e-3) -> ComparisonResult:
    """Convergence metrics for two runs on the same grid and setpoint."""
    if len(a) != len(b) or abs(a.tau - b.tau) > 1e-15:
        raise ConfigError("runs use different grids and cannot be compared")
    if a.x_star != b.x_star:
        raise ConfigError("runs target different setpoints")
    v_star = a.v_star
    return ComparisonResult(a=_metrics(a, v_star, settle_tol), b=_metrics(b, v_star, settle_tol))
