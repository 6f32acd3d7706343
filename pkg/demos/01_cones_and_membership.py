"""Tour of the cone constructors and the membership oracle.

Every representation (orthant, halfspace intersection, finite generators,
second-order, PSD) answers the same three questions: signed margin,
three-way classification, and nearest-point projection.  The margins are
scale-free -- they are computed on the normalized vector -- so "how deep
inside the cone" is comparable across representations.
"""

import numpy as np

from conalflow import cones


def orthant_basics():
    k = cones.orthant(2)
    print("== positive orthant in R^2 ==")
    for v in ([3.0, 4.0], [1.0, 0.0], [-1.0, 2.0]):
        m = cones.margin(k, v)
        print(f"  margin({v}) = {m:+.6f}  ->  {cones.classify(k, v)}")
    # projection clips the negative part
    v = np.array([-1.0, 2.0])
    print(f"  project({v}) = {cones.project(k, v)}")
    print(f"  interior direction: {cones.interior_direction(k)}")
    print()


def three_representations_one_cone():
    # the quadrant again, as halfspaces and as generators
    print("== one cone, three descriptions ==")
    k_orth = cones.orthant(2)
    k_half = cones.halfspace_cone([[1.0, 0.0], [0.0, 1.0]])
    k_gen = cones.generator_cone([[1.0, 0.0], [0.0, 1.0]])
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(200):
        v = rng.standard_normal(2)
        ms = [cones.margin(k, v) for k in (k_orth, k_half, k_gen)]
        worst = max(worst, np.ptp(ms))
    print(f"  max margin spread across representations: {worst:.2e}")
    print()


def ice_cream_and_loewner():
    print("== second-order and PSD cones ==")
    soc = cones.second_order_cone([1.0, 0.0, 0.0], np.pi / 4)
    axis = np.array([1.0, 0.0, 0.0])
    print(f"  SOC margin along the axis: {cones.margin(soc, axis):.16f}")

    psd = cones.psd_cone(2)
    from conalflow.geometry import sym_to_vec

    for m in (np.eye(2), np.diag([1.0, 0.0]), np.diag([-1.0, 1.0])):
        v = sym_to_vec(m)
        print(f"  PSD margin(diag {np.diag(m)}) = {cones.margin(psd, v):+.6f}")
    print()


def surrounding_cones():
    # a narrow cone sits strictly inside a wider one: the basis of the
    # strict-order perturbation arguments
    print("== surrounding cones ==")
    narrow = cones.second_order_cone([1.0, 0.0], 0.3)
    wide = cones.second_order_cone([1.0, 0.0], 0.8)
    print(f"  wide surrounds narrow: {cones.surrounds(wide, narrow)}")
    print(f"  narrow surrounds wide: {cones.surrounds(narrow, wide)}")
    print()


def axioms_hold_by_sampling():
    print("== sampled cone-axiom report (generator cone in R^3) ==")
    g = np.array([
        [1.0, 0.1, 0.0],
        [0.1, 1.0, 0.0],
        [0.2, 0.2, 1.0],
        [0.9, 0.0, 0.5],
    ])
    k = cones.generator_cone(g)
    rep = cones.cone_axiom_report(k, n_samples=500, seed=1)
    print(f"  {rep}")


def main():
    orthant_basics()
    three_representations_one_cone()
    ice_cream_and_loewner()
    surrounding_cones()
    axioms_hold_by_sampling()


if __name__ == "__main__":
    main()
