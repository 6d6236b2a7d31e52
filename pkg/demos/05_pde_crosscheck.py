"""Cross-validate the delay representation against the transport equation.

The package integrates the interface against a delayed input signal; the
underlying physics is a filling-ratio profile advected along the screw.
Both routes are simulated independently on a step input.  At steady
transport speed they must converge together as the grid refines; with
speed modulation a fixed modeling gap remains, because the delay form
rescales the whole transit by the current speed while the true profile
integrates the speed history along characteristics.
"""

import extrusim as ex
from extrusim.pde import run_bizone, run_delay_reference, trace_equivalence

coeffs = ex.derive_coefficients(ex.default_params())
sp = ex.default_setpoint(coeffs)
v_star = ex.open_loop_input(coeffs, sp.x_star)

input_fn = lambda s: 0.0 if s < 0.3 else v_star
history_fn = lambda s: 0.0

for eps, omega in ((0.0, 0.0), (0.1, 3.5)):
    pert = ex.Perturbation(eps, omega)
    print(f"eps = {eps}, omega = {omega}: step 0 -> {v_star:.4f} at t = 0.3 min")
    prev = None
    for cells in (200, 400, 800):
        z = coeffs.L / cells
        dt = z / (coeffs.theta1 * (1.0 + eps))
        a = run_bizone(coeffs, pert, 0.1, input_fn, history_fn, cells, dt, 2.0)
        b = run_delay_reference(coeffs, pert, 0.1, input_fn, history_fn, dt, 2.0)
        dev = trace_equivalence(a, b)
        ratio = "" if prev is None else f"  (x{dev / prev:.2f} under refinement)"
        print(f"  {cells:4d} cells: max gap {dev:.3e} m vs 5*z = {5 * z:.1e} m{ratio}")
        prev = dev
    if eps > 0:
        print("  the gap stops shrinking: that remainder is the delay form's")
        print("  modeling error under modulation, not grid error")
    print()
