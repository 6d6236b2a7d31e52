"""Shared fixtures: reference configurations, independent numeric oracles,
and the session-cached heavy closed-loop runs reused across test modules."""

import math
import time

import numpy as np
import pytest

import extrusim as ex


@pytest.fixture(scope="session")
def params():
    return ex.default_params()


@pytest.fixture(scope="session")
def coeffs(params):
    return ex.derive_coefficients(params)


@pytest.fixture(scope="session")
def setpoint(coeffs):
    return ex.default_setpoint(coeffs)


@pytest.fixture(scope="session")
def gains(setpoint, coeffs):
    return ex.solve_gains(setpoint, coeffs)


@pytest.fixture(scope="session")
def gain_oracle():
    """Plain 200-iteration bracketed bisection for a*chord = S*(1 - exp(-a*width)).

    Shares no code with the production solver; used to cross-check it.
    """

    def bisect(chord: float, width: float, S: float, lo: float = 1e-9, hi: float = 1e4):
        def g(a: float) -> float:
            return a * chord - S * (1.0 - math.exp(-a * width))

        flo = g(lo)
        assert flo < 0.0, "bracket low end must be below the root"
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) * flo <= 0.0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    return bisect


@pytest.fixture(scope="session")
def rk4_march():
    """Classical fourth-order march of dx/ds = f(x) along a given s grid."""

    def march(f, x0: float, s_grid) -> np.ndarray:
        xs = np.empty(len(s_grid))
        xs[0] = x0
        for i in range(len(s_grid) - 1):
            h = s_grid[i + 1] - s_grid[i]
            x = xs[i]
            k1 = f(x)
            k2 = f(x + 0.5 * h * k1)
            k3 = f(x + 0.5 * h * k2)
            k4 = f(x + h * k3)
            xs[i + 1] = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return xs

    return march


@pytest.fixture(scope="session")
def settle_time():
    """First time after which |e| stays below tol for the rest of the run.

    Returns the run's first timestamp when the error never reaches tol,
    and +inf when the error is still at or above tol at the final sample.
    """

    def measure(series, tol: float) -> float:
        ae = np.abs(series.e)
        above = np.nonzero(ae >= tol)[0]
        if above.size == 0:
            return float(series.t[0])
        if above[-1] == ae.size - 1:
            return float("inf")
        return float(series.t[above[-1] + 1])

    return measure


def _timed_run(config):
    start = time.perf_counter()
    series = ex.run_scenario(config)
    return series, time.perf_counter() - start


@pytest.fixture(scope="session")
def comp_full_a():
    return _timed_run(ex.standard_config(mode="compensated-full", eps=0.1, omega=3.5))


@pytest.fixture(scope="session")
def comp_full_b():
    return _timed_run(ex.standard_config(mode="compensated-full", eps=0.4, omega=0.4))


@pytest.fixture(scope="session")
def uncomp_a():
    return _timed_run(ex.standard_config(mode="uncompensated", eps=0.1, omega=3.5))


@pytest.fixture(scope="session")
def uncomp_b():
    return _timed_run(ex.standard_config(mode="uncompensated", eps=0.4, omega=0.4))


@pytest.fixture(scope="session")
def comp_est_b():
    return _timed_run(ex.standard_config(mode="compensated-estimated", eps=0.4, omega=0.4))
