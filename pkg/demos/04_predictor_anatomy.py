"""One prediction, opened up.

The predictor replays the already-issued commands forward from the
current state: each stored sample advances the prediction clock by the
sample step stretched by 1/(1 - F), where F is the local delay rate.
The walk ends at the arrival time sigma of the command being issued now,
and the state reached there is where that command will land.
"""

import numpy as np

import extrusim as ex

coeffs = ex.derive_coefficients(ex.default_params())
pert = ex.Perturbation(0.1, 3.5)
tau = 1e-4
x, t = 0.1, 0.0

history = ex.ActuatorHistory.prefilled(
    tau, coeffs.L / (coeffs.theta1 * (1.0 - pert.eps)), fill=0.4, t_end=t
)
out = ex.predict(coeffs, pert, x, t, history, return_path=True)

d_now = ex.delay(coeffs, pert, t, x)
print(f"state x = {x} m at t = {t} min, constant stored feed 0.4")
print(f"current delay D(t, x)        = {d_now:.6f} min")
print(f"predicted arrival sigma      = {out.sigma:.6f} min")
print(f"predicted state P            = {out.P:.6f} m")
print(f"window samples walked        = {len(out.sigma_path) - 1}")
print(f"worst delay rate in window   = {out.max_rate:.4f} (must stay below 1)")

# self-consistency: sigma - t should equal the delay evaluated at arrival
residual = abs(out.sigma - t - ex.delay(coeffs, pert, out.sigma, out.P))
print(f"arrival self-consistency     = {residual:.2e} min (first order in tau)")

print("\nprediction path (every 80th sample):")
for s, p in list(zip(out.sigma_path, out.P_path))[::80]:
    print(f"  sigma = {s:.4f}  P = {p:.6f}")

# the residual shrinks linearly with the sample step
print("\nstep-halving study at the setpoint equilibrium:")
sp = ex.default_setpoint(coeffs)
v_star = ex.open_loop_input(coeffs, sp.x_star)
for step in (9e-5, 4.5e-5, 2.25e-5):
    h = ex.ActuatorHistory.prefilled(step, coeffs.L / coeffs.theta1, fill=v_star, t_end=0.0)
    o = ex.predict(coeffs, ex.Perturbation(0.0, 0.0), sp.x_star, 0.0, h)
    r = abs(o.sigma - ex.delay(coeffs, ex.Perturbation(0.0, 0.0), o.sigma, o.P))
    print(f"  tau = {step:.2e}: |P - x*| = {abs(o.P - sp.x_star):.2e}, "
          f"sigma residual = {r:.2e}")
