"""When is the delay loop well posed at all?

If the input delay ever shrank at unit rate, the whole command buffer
would arrive at once.  The envelope below bounds the delay rate over all
admissible feeds at each interface position; keeping its supremum under
one is sufficient, and three closed-form parameter conditions certify
that without running anything.
"""

import numpy as np

import extrusim as ex

coeffs = ex.derive_coefficients(ex.default_params())

cases = [
    (0.1, 3.5, "stock fast-shallow pair"),
    (0.4, 0.4, "stock slow-deep pair"),
    (0.1, 10.53, "fast modulation, interior envelope peak"),
    (0.5, 5.0, "violent modulation, no certificate"),
]

xs = np.linspace(0.0, coeffs.L, 9)
for eps, omega, label in cases:
    pert = ex.Perturbation(eps, omega)
    verdict = ex.check_feasibility(coeffs, pert)
    print(f"{label}: eps = {eps}, omega = {omega}")
    print(f"  intensity = {verdict.lhs:.4f}, thresholds (incr/weak/strong) = "
          f"{verdict.bounds[0]:.4f} / {verdict.bounds[1]:.4f} / {verdict.bounds[2]:.4f}")
    if verdict.satisfied:
        print(f"  certified on the {verdict.branch} branch; "
              f"sup Lambda = {verdict.sup_lambda:.4f} < 1")
    else:
        print(f"  no sufficient branch; grid sup Lambda = {verdict.sup_lambda:.4f} "
              "(inconclusive, not a disproof)")
    peak = ex.envelope_peak(coeffs, pert)
    if peak.x is not None:
        print(f"  envelope peaks inside the barrel at x = {peak.x:.4f} m")
    row = " ".join(f"{v:.3f}" for v in ex.delay_rate_envelope(coeffs, pert, xs))
    print(f"  Lambda on [0, L]: {row}")
    print()
