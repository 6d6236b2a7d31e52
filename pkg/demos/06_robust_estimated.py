"""Compensation without knowing the modulation.

The full predictor needs the speed fluctuation model.  The estimated
variant runs the nominal constant-speed predictor against the modulated
machine: the prediction is slightly wrong every step, so convergence
slows down, but for feasible perturbations the loop still settles close
to the setpoint instead of cycling.
"""

import numpy as np

import extrusim as ex


def settle(series, tol):
    ae = np.abs(series.e)
    bad = np.flatnonzero(ae >= tol)
    if bad.size == 0:
        return series.t[0]
    if bad[-1] == len(ae) - 1:
        return float("inf")
    return float(series.t[bad[-1] + 1])


print("slow-deep pair eps = 0.4, omega = 0.4, setpoint 0.16 m\n")
for mode in ("compensated-full", "compensated-estimated", "uncompensated"):
    series = ex.run_scenario(ex.standard_config(mode=mode, eps=0.4, omega=0.4))
    q = series.t >= 0.75 * series.t[-1]
    print(f"{mode:22s}: settle(5e-3) = {settle(series, 5e-3):8.4f} min, "
          f"settle(1e-3) = {settle(series, 1e-3):8.4f} min, "
          f"last-quarter sup|e| = {np.max(np.abs(series.e[q])):.3e} m")

print("\nknowing only the mean transport speed costs convergence rate, not")
print("stability: the estimated loop settles later than the full predictor")
print("but still reaches the integrator's noise floor, while the naive loop")
print("keeps orbiting the setpoint at millimetre scale")
