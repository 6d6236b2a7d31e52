"""Delay-compensating state predictors for the interface dynamics.

Feedback computed from the current interface position arrives one transport
delay late, so stabilization feeds back the position the interface will have
reached when the present command arrives.  That future position is pinned by
the inputs already in transit: the predictor replays the recorded input
history through the interface ODE, warping its integration clock by
1 / (1 - F), where F is the rate of change of the delay along the predicted
path.  The warp is exactly what converts "time since an input was recorded"
into "time until it reaches the interface"; it stays well defined only while
the delay shrinks slower than one second per second, which is the
feasibility condition monitored throughout.

The full predictor uses the time- and state-dependent delay model.  The
state-only variant drops the time modulation (exact for the unperturbed
machine).  The estimated variant is the same computation deployed against a
perturbed machine whose modulation is unknown to the controller; it trades
exactness for robustness and carries a growth guard instead of a
feasibility guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bangbang import ControllerGains, SetpointConfig, control
from .errors import BoundednessError, DomainError, FeasibilityViolation, ParameterError
from .model import Coefficients, Perturbation, delay, delay_time_derivative, flow_imbalance

__all__ = [
    "ActuatorHistory",
    "PredictorOutput",
    "delay_rate",
    "predict",
    "predict_state_only",
    "predict_estimated",
    "backstepping_residual",
]


class ActuatorHistory:
    """Uniformly spaced record of applied feed commands.

    Samples live at t_start + k * tau for k = 0 .. len-1; append() extends
    the record by one step.  The record must always reach back at least
    ceil(D_max / tau) samples so a predictor can integrate across the whole
    delay window; prefilled() builds such a record ending just before t_end.
    An optional capacity bounds memory by dropping the oldest samples, at
    the caller's risk of starving the window.
    """

    __slots__ = ("tau", "t_start", "capacity", "_buf", "_n")

    def __init__(self, tau: float, t_start: float = 0.0, values=(), capacity: int | None = None):
        if not tau > 0.0:
            raise ParameterError(f"tau must be positive, got {tau!r}")
        if capacity is not None and capacity < 1:
            raise ParameterError(f"capacity must be >= 1, got {capacity!r}")
        self.tau = float(tau)
        self.t_start = float(t_start)
        self.capacity = capacity
        self._buf = np.empty(max(64, len(values)), dtype=np.float64)
        self._n = 0
        for u in values:
            self.append(u)

    @classmethod
    def prefilled(
        cls, tau: float, d_max: float, fill: float = 0.0, t_end: float = 0.0, margin: int = 2
    ) -> "ActuatorHistory":
        """Constant record covering the delay window and ending at t_end.

        Holds ceil(d_max / tau) + margin samples of the fill value, the
        startup convention for a machine that ran with constant feed before
        the controller engaged.
        """
        n = math.ceil(d_max / tau) + margin
        hist = cls(tau, t_start=t_end - n * tau)
        for _ in range(n):
            hist.append(fill)
        return hist

    def __len__(self) -> int:
        return self._n

    @property
    def t_next(self) -> float:
        """Time at which the next appended sample will sit."""
        return self.t_start + self._n * self.tau

    @property
    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self._n) * self.tau

    @property
    def values(self) -> np.ndarray:
        return self._buf[: self._n]

    def append(self, u: float) -> None:
        if not 0.0 <= u < 1.0:
            raise DomainError(f"feed command u = {u!r} outside [0, 1)")
        if self._n == self._buf.shape[0]:
            grown = np.empty(2 * self._buf.shape[0], dtype=np.float64)
            grown[: self._n] = self._buf[: self._n]
            self._buf = grown
        self._buf[self._n] = u
        self._n += 1
        if self.capacity is not None and self._n > self.capacity:
            drop = self._n - self.capacity
            self._buf[: self.capacity] = self._buf[drop : self._n]
            self.t_start += drop * self.tau
            self._n = self.capacity

    def last(self, n: int) -> np.ndarray:
        """View of the newest n samples, oldest first."""
        if n < 0 or n > self._n:
            raise DomainError(f"requested {n} samples from a record of {self._n}")
        return self._buf[self._n - n : self._n]

    def value_at(self, t: float) -> float:
        """Linear interpolation of the record at time t."""
        if self._n == 0:
            raise DomainError("history is empty")
        j = (t - self.t_start) / self.tau
        if j < -1e-9 or j > self._n - 1 + 1e-9:
            raise DomainError(
                f"time {t!r} outside recorded range "
                f"[{self.t_start}, {self.t_start + (self._n - 1) * self.tau}]"
            )
        j = min(max(j, 0.0), float(self._n - 1))
        i0 = min(int(j), self._n - 2) if self._n > 1 else 0
        frac = j - i0
        return (1.0 - frac) * self._buf[i0] + frac * self._buf[i0 + 1]


@dataclass(frozen=True)
class PredictorOutput:
    """Result of one predictor evaluation.

    P: predicted interface position when the current command arrives
    sigma: predicted arrival time of the current command
    F_trace: delay-rate values at each window sample
    min_denominator: smallest 1 - F across the window (inf for an empty one)
    P_path, sigma_path: per-sample iterates, populated only on request
    """

    P: float
    sigma: float
    F_trace: np.ndarray
    min_denominator: float
    P_path: np.ndarray | None = field(default=None, compare=False)
    sigma_path: np.ndarray | None = field(default=None, compare=False)

    @property
    def max_rate(self) -> float:
        """Largest delay rate seen across the window, nan if empty."""
        return float(np.max(self.F_trace)) if self.F_trace.size else float("nan")


def delay_rate(
    coeffs: Coefficients, pert: Perturbation, sigma: float, p: float, u: float
) -> float:
    """Total delay rate F along a predicted path.

    F = dD/dt(sigma, p) + Gamma(p, u): the explicit time modulation plus the
    state-induced change from the interface moving while inputs are in
    transit.  Evaluated at the predicted pair (sigma, p), not at the current
    time.  The prediction clock stretches by 1 / (1 - F), so F -> 1 means
    buffered inputs pile up at the interface all at once.
    """
    return delay_time_derivative(coeffs, pert, sigma, p) + flow_imbalance(coeffs, p, u)


def _sweep(
    coeffs: Coefficients,
    pert: Perturbation | None,
    x: float,
    t: float,
    history: ActuatorHistory,
    horizon: float,
    return_path: bool,
):
    """Shared window sweep; returns raw kernel results plus the window size."""
    tau = history.tau
    if abs(history.t_next - t) > 1e-3 * tau:
        raise ParameterError(
            f"history is not aligned with t = {t!r}: next sample at {history.t_next!r}"
        )
    nbar = int(horizon / tau)
    u_win = history.last(nbar)
    f_trace = np.empty(nbar)
    if return_path:
        p_path = np.empty(nbar + 1)
        s_path = np.empty(nbar + 1)
    else:
        p_path = np.empty(0)
        s_path = np.empty(0)
    time_varying = pert is not None and pert.eps != 0.0 and pert.omega != 0.0
    eps = pert.eps if pert is not None else 0.0
    omega = pert.omega if pert is not None else 0.0
    P, sigma, min_den, bad = _kernels.predictor_sweep(
        u_win,
        x,
        t,
        tau,
        coeffs.theta1,
        coeffs.theta2,
        coeffs.L,
        eps,
        omega,
        time_varying,
        f_trace,
        p_path,
        s_path,
        return_path,
    )
    return P, sigma, min_den, bad, nbar, f_trace, p_path, s_path


def predict(
    coeffs: Coefficients,
    pert: Perturbation,
    x: float,
    t: float,
    history: ActuatorHistory,
    *,
    return_path: bool = False,
) -> PredictorOutput:
    """Predict the interface position at the current command's arrival time.

    Integrates the interface ODE through the recorded inputs over the window
    [t - D(t, x), t], initialized at P = x and sigma = t on the window's
    left end, each step advanced by tau / (1 - F).  The window length is
    floor(D / tau) samples; the fractional remainder is part of the O(tau)
    discretization error.  Raises FeasibilityViolation the moment any
    denominator falls to the guard floor.
    """
    D = delay(coeffs, pert, t, x)
    out = _sweep(coeffs, pert, x, t, history, D, return_path)
    P, sigma, min_den, bad, nbar, f_trace, p_path, s_path = out
    if bad != _kernels.NO_VIOLATION:
        raise FeasibilityViolation(
            f"delay rate reached unity at window sample {bad}/{nbar} "
            f"(t = {t:.6g}, 1 - F = {min_den:.3e})"
        )
    return PredictorOutput(
        P=P,
        sigma=sigma,
        F_trace=f_trace,
        min_denominator=min_den,
        P_path=p_path if return_path else None,
        sigma_path=s_path if return_path else None,
    )


def predict_state_only(
    coeffs: Coefficients,
    x: float,
    t: float,
    history: ActuatorHistory,
    *,
    return_path: bool = False,
) -> PredictorOutput:
    """Predictor for the unperturbed machine: delay (L - x)/theta1 only.

    Same window recurrence as predict with the time modulation dropped, so
    F reduces to the flow imbalance along the predicted path.  Exact
    compensation when the machine truly runs at constant speed.
    """
    if not 0.0 <= x <= coeffs.L:
        raise DomainError(f"interface position x = {x!r} outside [0, {coeffs.L}]")
    D = (coeffs.L - x) / coeffs.theta1
    out = _sweep(coeffs, None, x, t, history, D, return_path)
    P, sigma, min_den, bad, nbar, f_trace, p_path, s_path = out
    if bad != _kernels.NO_VIOLATION:
        raise FeasibilityViolation(
            f"delay rate reached unity at window sample {bad}/{nbar} "
            f"(t = {t:.6g}, 1 - F = {min_den:.3e})"
        )
    return PredictorOutput(
        P=P,
        sigma=sigma,
        F_trace=f_trace,
        min_denominator=min_den,
        P_path=p_path if return_path else None,
        sigma_path=s_path if return_path else None,
    )


def predict_estimated(
    coeffs: Coefficients,
    x: float,
    t: float,
    history: ActuatorHistory,
    *,
    return_path: bool = False,
) -> PredictorOutput:
    """Robust predictor using the nominal delay estimate against a perturbed machine.

    Numerically identical to predict_state_only: the controller only knows
    the nominal speed, so it predicts with (L - x)/theta1 and the nominal
    field.  Deployed against a modulated machine the compensation is
    approximate; closed-loop boundedness instead rests on the growth factor
    1/(1 - Gamma) staying finite along the predicted path, which holds
    whenever the predicted position stays nonnegative for feeds in
    [0, v_max].  A guard failure raises BoundednessError rather than
    FeasibilityViolation to mark the different contract.
    """
    if not 0.0 <= x <= coeffs.L:
        raise DomainError(f"interface position x = {x!r} outside [0, {coeffs.L}]")
    D = (coeffs.L - x) / coeffs.theta1
    out = _sweep(coeffs, None, x, t, history, D, return_path)
    P, sigma, min_den, bad, nbar, f_trace, p_path, s_path = out
    if bad != _kernels.NO_VIOLATION:
        raise BoundednessError(
            f"growth-factor guard failed at window sample {bad}/{nbar} "
            f"(t = {t:.6g}, guard value = {f_trace[bad]:.6g} >= 1)"
        )
    return PredictorOutput(
        P=P,
        sigma=sigma,
        F_trace=f_trace,
        min_denominator=min_den,
        P_path=p_path if return_path else None,
        sigma_path=s_path if return_path else None,
    )


def backstepping_residual(
    u: np.ndarray,
    p: np.ndarray,
    setpoint: SetpointConfig,
    gains: ControllerGains,
) -> float:
    """Largest gap between applied commands and the law evaluated on predictions.

    The closed predictor loop is, by construction, the delay-free law acting
    on the predicted state, so along any run under predictor feedback the
    applied command must reproduce control(P) sample for sample; the residual
    is the transformed input state that the stability argument drives to
    zero.  Samples with undefined predictions (nan) are skipped.
    """
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    if u.shape != p.shape:
        raise ParameterError("u and p must have matching shapes")
    mask = np.isfinite(p)
    if not mask.any():
        raise ParameterError("no finite predictions to compare against")
    worst = 0.0
    for ui, pi in zip(u[mask], p[mask]):
        worst = max(worst, abs(ui - control(pi, setpoint, gains)))
    return worst
