"""Solve controller gains for a few setpoints and walk the resulting law.

The feed command is built from two exponential arcs that meet at the
setpoint with a commanded slope -S: saturated at v_max against an empty
barrel, zero against a full one.  Steeper S means harder saturation and
larger exponents.
"""

import numpy as np

import extrusim as ex

coeffs = ex.derive_coefficients(ex.default_params())

print(f"barrel length L = {coeffs.L} m, transport speed {coeffs.theta1} m/min")
print(f"die coupling theta2 = {coeffs.theta2:.6g} 1/m\n")

for x_star, v_max, margin in ((0.16, 0.9, 30.0), (0.16, 0.9, 5.0), (0.08, 0.6, 20.0)):
    s_floor = ex.min_slope(coeffs, x_star, v_max)
    sp = ex.SetpointConfig(x_star=x_star, S=s_floor + margin, v_max=v_max)
    gains = ex.solve_gains(sp, coeffs)
    v_star = ex.open_loop_input(coeffs, x_star)
    print(f"setpoint x* = {x_star} m, equilibrium feed v* = {v_star:.4f}")
    print(f"  S_min = {s_floor:.4f}, commanded S = {sp.S:.4f}")
    print(f"  gains a_l = {gains.a_l:.4f}, a_r = {gains.a_r:.4f} "
          f"(residuals {gains.residual_l:.1e}, {gains.residual_r:.1e})")
    # the 10-90 saturation width on each side shows how aggressive the law is
    wl = np.log(9.0) / gains.a_l
    wr = np.log(9.0) / gains.a_r
    print(f"  10-90 widths: {wl * 1e3:.2f} mm toward the die, {wr * 1e3:.2f} mm toward the hopper")
    for x in (0.0, 0.5 * x_star, x_star, 0.5 * (x_star + coeffs.L), coeffs.L):
        print(f"    v({x:.3f}) = {ex.control(x, sp, gains):.6f}")
    print()
