"""Piecewise-exponential setpoint controller for the filling interface.

The commanded feed saturates at v_max when the interface sits at the die,
shuts off entirely at the hopper, and blends exponentially between those
extremes on either side of the setpoint.  Both branches pass through the
open-loop equilibrium input v(x*) at x* with a common one-sided slope -S,
so the closed delay-free loop contracts at a rate that grows with S.  S
cannot be arbitrary: each exponential branch must fit between its endpoint
value and v(x*) over its side of the barrel, which puts a geometric floor
S_min under the admissible slopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NoPositiveRootError, ParameterError, SolverFailure
from .model import Coefficients, open_loop_input

__all__ = [
    "SetpointConfig",
    "ControllerGains",
    "min_slope",
    "solve_gains",
    "control",
]

# Bracketing and bisection budget for the transcendental gain equations.
_BRACKET_LO = 1e-9
_MAX_DOUBLINGS = 60
_REL_WIDTH = 1e-12
_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class SetpointConfig:
    """Operating point and shaping of the control law.

    x_star: target interface position (m), strictly inside (0, L)
    S: magnitude of the common one-sided slope at the setpoint (1/m)
    v_max: feed saturation level, in (0, 1); must exceed v(x_star)
    """

    x_star: float
    S: float
    v_max: float = 0.9

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_star) and self.x_star > 0.0):
            raise ParameterError(f"x_star must be positive, got {self.x_star!r}")
        if not (math.isfinite(self.S) and self.S > 0.0):
            raise ParameterError(f"S must be positive, got {self.S!r}")
        if not 0.0 < self.v_max < 1.0:
            raise ParameterError(f"v_max must lie in (0, 1), got {self.v_max!r}")


@dataclass(frozen=True)
class ControllerGains:
    """Solved exponential gains plus cached evaluation constants.

    a_l, a_r: left and right branch gains (1/m)
    residual_l, residual_r: absolute gain-equation residuals at the roots
    The remaining fields echo the setpoint and pre-evaluate the branch
    denominators so the control law needs no further model lookups.
    """

    a_l: float
    a_r: float
    residual_l: float
    residual_r: float
    x_star: float
    v_star: float
    v_max: float
    L: float
    den_l: float
    den_r: float

    def __post_init__(self) -> None:
        if not (self.a_l > 0.0 and self.a_r > 0.0):
            raise ParameterError("gains must be positive")
        if not (self.residual_l < _RESIDUAL_TOL and self.residual_r < _RESIDUAL_TOL):
            raise ParameterError(
                f"gain residuals {self.residual_l:.3e}, {self.residual_r:.3e} "
                f"exceed {_RESIDUAL_TOL:.0e}"
            )


def min_slope(coeffs: Coefficients, x_star: float, v_max: float) -> float:
    """Smallest slope magnitude for which both exponential branches exist.

    S_min = max{(v_max - v(x*)) / x*, v(x*) / (L - x*)}: each term is the
    mean slope of the straight chord on its side, and an exponential branch
    with the right endpoint values exists iff the commanded slope exceeds it.
    """
    if not 0.0 < x_star < coeffs.L:
        raise DomainError(f"x_star = {x_star!r} must lie strictly inside (0, {coeffs.L})")
    v_star = open_loop_input(coeffs, x_star)
    if v_max <= v_star:
        raise ParameterError(
            f"v_max = {v_max!r} must exceed the equilibrium input v(x_star) = {v_star:.6g}"
        )
    return max((v_max - v_star) / x_star, v_star / (coeffs.L - x_star))


def _solve_branch(chord: float, width: float, S: float) -> tuple[float, float]:
    """Positive root of g(a) = a * chord - S (1 - exp(-a * width)).

    Bracket from below at a fixed tiny gain, expand the upper end by
    doubling until the sign flips, bisect to relative width 1e-12, then
    apply a single Newton polish.  g is convex with g(0) = 0, so the
    positive root is unique whenever S exceeds chord / width.
    """

    def g(a: float) -> float:
        return a * chord - S * (1.0 - math.exp(-a * width))

    lo = _BRACKET_LO
    if g(lo) >= 0.0:
        raise NoPositiveRootError(
            f"slope S = {S:.6g} admits no positive gain for chord {chord:.6g} over width {width:.6g}"
        )
    hi = 2.0 * _BRACKET_LO
    doublings = 0
    while g(hi) <= 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > _MAX_DOUBLINGS:
            raise SolverFailure(f"no sign change within {_MAX_DOUBLINGS} bracket doublings")
    while hi - lo > _REL_WIDTH * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    a = 0.5 * (lo + hi)
    slope = chord - S * width * math.exp(-a * width)
    if slope != 0.0:
        a -= g(a) / slope
    return a, abs(g(a))


def solve_gains(setpoint: SetpointConfig, coeffs: Coefficients) -> ControllerGains:
    """Solve the two transcendental equations pinning the branch gains.

    The left gain makes the rising branch leave v(x*) with slope -S while
    saturating at v_max at the die; the right gain makes the falling branch
    reach zero feed at the hopper with the same setpoint slope.  Rejects
    S <= S_min, where no positive root exists.
    """
    if not 0.0 < setpoint.x_star < coeffs.L:
        raise DomainError(
            f"x_star = {setpoint.x_star!r} must lie strictly inside (0, {coeffs.L})"
        )
    s_floor = min_slope(coeffs, setpoint.x_star, setpoint.v_max)
    if setpoint.S <= s_floor:
        raise NoPositiveRootError(
            f"S = {setpoint.S:.6g} must exceed S_min = {s_floor:.6g} "
            f"for x_star = {setpoint.x_star:.6g}, v_max = {setpoint.v_max:.6g}"
        )
    v_star = open_loop_input(coeffs, setpoint.x_star)
    a_l, res_l = _solve_branch(setpoint.v_max - v_star, setpoint.x_star, setpoint.S)
    a_r, res_r = _solve_branch(v_star, coeffs.L - setpoint.x_star, setpoint.S)
    return ControllerGains(
        a_l=a_l,
        a_r=a_r,
        residual_l=res_l,
        residual_r=res_r,
        x_star=setpoint.x_star,
        v_star=v_star,
        v_max=setpoint.v_max,
        L=coeffs.L,
        den_l=1.0 - math.exp(-a_l * setpoint.x_star),
        den_r=1.0 - math.exp(-a_r * (coeffs.L - setpoint.x_star)),
    )


def control(x: float, setpoint: SetpointConfig, gains: ControllerGains) -> float:
    """Evaluate the feed command for interface position x.

    Left branch for x <= x_star (the value at exactly x_star coincides on
    both branches), right branch above.  Exactly v_max at the die, exactly
    zero at the hopper, strictly decreasing in between.
    """
    if gains.x_star != setpoint.x_star or gains.v_max != setpoint.v_max:
        raise ParameterError("gains were solved for a different setpoint")
    if not 0.0 <= x <= gains.L:
        raise DomainError(f"interface position x = {x!r} outside [0, {gains.L}]")
    if x == 0.0:
        return gains.v_max  # saturation must be exact, the blend rounds 1 ulp off
    if x <= gains.x_star:
        rise = (1.0 - math.exp(gains.a_l * (x - gains.x_star))) / gains.den_l
        return gains.v_star + (gains.v_max - gains.v_star) * rise
    # difference-of-exponentials form: subtracting v_star * fall from v_star
    # cancels to a few bits deep in the tail and flattens the curve there
    tail = math.exp(-gains.a_r * (gains.L - gains.x_star))
    return gains.v_star * (math.exp(-gains.a_r * (x - gains.x_star)) - tail) / gains.den_r
