"""Verifying (strong) differential positivity of a flow.

The linearized flow dphi_t is integrated jointly with the state
(variational equation).  A system is differentially positive when dphi_t
maps the cone at x into the cone at phi_t(x); strongly so when boundary
rays land strictly inside.  For the linear Metzler system the
linearization is the matrix exponential, which gives an exact yardstick.
"""

import numpy as np
from scipy.linalg import expm

from conalflow import dynamics


def linearization_against_expm():
    print("== variational flow vs matrix exponential ==")
    a = np.array([[-2.0, 1.0], [1.0, -2.0]])
    system = dynamics.builtin_system("linear_metzler")
    lin = dynamics.variational_flow(system, [0.5, -0.3], [0.5, 1.0, 2.0])
    for t in (0.5, 1.0, 2.0):
        err = np.max(np.abs(lin.at(t) - expm(a * t)))
        print(f"  t={t:3.1f}: max entrywise |dphi_t - e^(At)| = {err:.3e}")
    res = dynamics.cocycle_check(system, [0.5, -0.3], 0.4, 0.6)
    print(f"  cocycle residual |J_1.0 - J_0.6(phi_0.4 x) J_0.4| = {res:.3e}")
    print()


def verdicts():
    print("== DP verdicts on the built-ins ==")
    cases = (
        ("linear_metzler", [0.5, 0.5]),
        ("bistable_tanh", [0.3, 0.2]),
        ("rotation", [0.5, 0.0]),
    )
    for name, x0 in cases:
        rep = dynamics.check_dp(
            dynamics.builtin_system(name), x0, t_grid=(0.1, 1.0, 10.0)
        )
        print(f"  {name:15s}: {rep.verdict:15s} min margin {rep.min_margin:+.4f}")
        if rep.witness is not None:
            t, ray, image_margin = rep.witness
            print(f"  {'':15s}  witness: ray {np.round(ray, 4)} at t={t:.2f} "
                  f"maps to margin {image_margin:+.4f}")
    print()


def why_rotation_fails():
    # the quarter-turn sends the second basis ray across the vertical axis
    print("== rotating the orthant by hand ==")
    system = dynamics.builtin_system("rotation")
    lin = dynamics.variational_flow(system, [0.5, 0.0], [np.pi / 2])
    j = lin.at(np.pi / 2)
    e2 = np.array([0.0, 1.0])
    print(f"  dphi_(pi/2) e2 = {np.round(j @ e2, 6)}  (left the orthant)")


def main():
    linearization_against_expm()
    verdicts()
    why_rotation_fails()


if __name__ == "__main__":
    main()
