"""Parameter-space conditions keeping the delay rate below unity.

The predictor clock stretches by 1 / (1 - F); if the delay ever shrank at
unit rate the whole input buffer would arrive at once and the loop would
be ill posed.  Over all admissible feeds the delay rate at interface
position x is bounded by the envelope

    Lambda(x) = eps omega (L - x) / (theta1 (1 - eps)^2) + theta2 x / (1 + theta2 x)

(worst time modulation plus worst state drift).  Keeping sup Lambda < 1
over the barrel is sufficient for feasibility, and because Lambda has at
most one interior stationary point the supremum can be located in closed
form.  The checks below give three sufficient parameter conditions, one
per shape of the envelope, and cross-check them against a dense grid sup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError
from .model import Coefficients, Perturbation

__all__ = [
    "FeasibilityVerdict",
    "EnvelopePeak",
    "delay_rate_envelope",
    "envelope_peak",
    "check_feasibility",
]

# Grid resolution for the mandatory numerical cross-check of the sup.
_GRID_POINTS = 10_000


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of the sufficient-condition check.

    satisfied: whether any of the three conditions holds (strictly)
    branch: "increasing", "weak-coupling", "strong-coupling", or "none"
    lhs: the perturbation intensity eps * omega / (1 - eps)^2
    bounds: thresholds (increasing_max, weak_coupling_max, strong_coupling_max)
        = (theta1 theta2 / (1 + theta2 L)^2, theta1 / L, 4 theta1 theta2 / (1 + theta2 L)^2)
    x1: interior stationary point of the envelope, None if outside (0, L)
    sup_lambda: envelope supremum on a dense grid over [0, L]
    """

    satisfied: bool
    branch: str
    lhs: float
    bounds: tuple[float, float, float]
    x1: float | None
    sup_lambda: float


class EnvelopePeak(NamedTuple):
    """Stationary point of the envelope: position (or None) and side label."""

    x: float | None
    side: str


def delay_rate_envelope(coeffs: Coefficients, pert: Perturbation, x):
    """Worst-case delay rate Lambda(x) over feeds in [0, 1).

    Accepts scalars or arrays.  The first term bounds the time modulation
    of the delay uniformly in t, the second bounds the state drift (largest
    at zero feed, when discharge is unopposed).
    """
    x = np.asarray(x, dtype=float)
    trig = pert.eps * pert.omega * (coeffs.L - x) / (coeffs.theta1 * (1.0 - pert.eps) ** 2)
    drift = coeffs.theta2 * x / (1.0 + coeffs.theta2 * x)
    out = trig + drift
    return float(out) if out.ndim == 0 else out


def envelope_peak(coeffs: Coefficients, pert: Perturbation) -> EnvelopePeak:
    """Locate the stationary point of the envelope.

    Lambda' vanishes at x1 = (1 - eps) sqrt(theta1 / (theta2 eps omega)) - 1/theta2,
    the unique candidate interior maximum.  Returns the position when it
    falls strictly inside (0, L); otherwise None with the side it falls on
    ("below" the die, "beyond" the hopper), or "none" when the modulation
    vanishes and the envelope is monotone with no stationary point.
    """
    ew = pert.eps * pert.omega
    if ew == 0.0:
        return EnvelopePeak(None, "none")
    x1 = (1.0 - pert.eps) * math.sqrt(coeffs.theta1 / (coeffs.theta2 * ew)) - 1.0 / coeffs.theta2
    if x1 <= 0.0:
        return EnvelopePeak(None, "below")
    if x1 >= coeffs.L:
        return EnvelopePeak(None, "beyond")
    return EnvelopePeak(x1, "interior")


def _pick_branch(
    lhs: float,
    increasing_max: float,
    weak_max: float,
    strong_max: float,
    theta2: float,
    inv_l: float,
) -> str:
    """Strict-inequality branch selection; boundary equality satisfies nothing."""
    if 0.0 <= lhs < increasing_max:
        return "increasing"
    if increasing_max < lhs < weak_max and theta2 < inv_l:
        return "weak-coupling"
    if increasing_max < lhs < strong_max and theta2 > inv_l:
        return "strong-coupling"
    return "none"


def check_feasibility(
    coeffs: Coefficients, pert: Perturbation, L: float | None = None
) -> FeasibilityVerdict:
    """Evaluate the three sufficient feasibility conditions.

    Every condition is strict; each one implies sup Lambda < 1, which is
    verified here against a 10^4-point grid and treated as an internal
    error if it ever disagreed.  A "none" verdict is inconclusive, not a
    proof of infeasibility.
    """
    L = coeffs.L if L is None else L
    if L != coeffs.L:
        raise ParameterError(f"L = {L!r} disagrees with coefficients built for L = {coeffs.L!r}")
    lhs = pert.eps * pert.omega / (1.0 - pert.eps) ** 2
    one_plus = (1.0 + coeffs.theta2 * L) ** 2
    increasing_max = coeffs.theta1 * coeffs.theta2 / one_plus
    weak_max = coeffs.theta1 / L
    strong_max = 4.0 * coeffs.theta1 * coeffs.theta2 / one_plus
    branch = _pick_branch(lhs, increasing_max, weak_max, strong_max, coeffs.theta2, 1.0 / L)
    grid = np.linspace(0.0, L, _GRID_POINTS)
    sup_lambda = float(np.max(delay_rate_envelope(coeffs, pert, grid)))
    peak = envelope_peak(coeffs, pert)
    if branch != "none" and not sup_lambda < 1.0:
        raise AssertionError(
            f"branch {branch} satisfied but grid sup Lambda = {sup_lambda:.6g} >= 1"
        )
    return FeasibilityVerdict(
        satisfied=branch != "none",
        branch=branch,
        lhs=lhs,
        bounds=(increasing_max, weak_max, strong_max),
        x1=peak.x,
        sup_lambda=sup_lambda,
    )
