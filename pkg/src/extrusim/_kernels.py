"""Compiled inner loop of the predictor window sweep.

The sweep is a scalar recurrence over the whole delay window and runs once
per control step, which makes it the only hot spot in the package.  Kept to
plain scalars and preallocated arrays so numba can compile it; everything
else stays ordinary Python.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Sentinel meaning "no infeasible sample found".
NO_VIOLATION = -1

# Guard threshold on the clock denominator 1 - F.
DEN_FLOOR = 1e-6


@njit(cache=True)
def predictor_sweep(
    u_win,
    x,
    t,
    tau,
    th1,
    th2,
    L,
    eps,
    omega,
    time_varying,
    f_trace,
    p_path,
    s_path,
    store_path,
):  # pragma: no cover - exercised through predictor.predict
    """Left-endpoint sweep of the prediction recurrence across the window.

    Starts from P = x, sigma = t at the window's left end and accumulates
    both running sums over the recorded inputs u_win.  Fills f_trace with
    the delay-rate values per sample, optionally records the P and sigma
    iterates, and returns (P, sigma, min_denominator, bad_index) where
    bad_index is the first sample whose denominator fell to the guard
    floor, or NO_VIOLATION.
    """
    P = x
    sig = t
    min_den = np.inf
    n = u_win.shape[0]
    if store_path:
        p_path[0] = P
        s_path[0] = sig
    for k in range(n):
        u = u_win[k]
        t2p = th2 * P
        gam = t2p / ((1.0 + t2p) * (1.0 - u)) - u / (1.0 - u)
        if time_varying:
            c = th1 * (1.0 + eps * np.cos(omega * sig))
            F = th1 * eps * omega * np.sin(omega * sig) * (L - P) / (c * c) + gam
        else:
            c = th1
            F = gam
        f_trace[k] = F
        den = 1.0 - F
        if den <= DEN_FLOOR:
            return P, sig, den, k
        if den < min_den:
            min_den = den
        step = tau / den
        P = P + step * (-c * gam)
        sig = sig + step
        if store_path:
            p_path[k + 1] = P
            s_path[k + 1] = sig
    return P, sig, min_den, NO_VIOLATION
