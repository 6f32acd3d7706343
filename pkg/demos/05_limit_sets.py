"""Omega-limit estimation and the order properties of limit sets.

For a strongly differentially positive flow on an ordered region, three
sampled properties hold: the flow preserves strict order, a single
omega-limit set never contains two ordered points, and ordered initial
conditions satisfy the limit-set dichotomy -- their limits are either the
same equilibrium or strictly ordered.  The bistable system makes every
branch visible: same-basin pairs share an attractor, straddling pairs
split to ordered attractors.
"""

import numpy as np

from conalflow import dynamics, limits


def omega_estimates():
    print("== omega-limit estimates ==")
    bistable = dynamics.builtin_system("bistable_tanh")
    est = limits.omega_estimate(bistable, [0.3, 0.1])
    print(f"  bistable from (0.3, 0.1): {est.kind} -> "
          f"{np.round(est.omega_samples[0], 6)} (residual {est.residual:.1e})")

    rotation = dynamics.builtin_system("rotation")
    est = limits.omega_estimate(rotation, [0.5, 0.0])
    print(f"  rotation from (0.5, 0.0): {est.kind}, "
          f"period {est.period:.6f} (2*pi = {2 * np.pi:.6f})")

    inv = limits.omega_invariance_check(rotation, est)
    print(f"  omega set flow-invariant: {inv['holds']} "
          f"(max drift {inv['max_deviation']:.2e})")
    print()


def monotone_and_nonordering():
    print("== order preservation and non-ordered limit sets ==")
    system = dynamics.builtin_system("bistable_tanh")
    pairs = limits.sample_ordered_pairs(system, 40, seed=5)
    rep = limits.monotone_flow_check(system, pairs)
    print(f"  monotone flow: {rep.n_passed} passed, {rep.n_failed} failed, "
          f"{rep.n_undecided} undecided")

    rot = dynamics.builtin_system("rotation")
    est = limits.omega_estimate(rot, [0.7, 0.0])
    rep = limits.nonordering_check(rot, est)
    print(f"  rotation limit cycle unordered pairs: holds={rep.holds} "
          f"(a circle carries ordered pairs -> failure expected)")
    print()


def dichotomy_branches():
    print("== limit-set dichotomy ==")
    system = dynamics.builtin_system("bistable_tanh")
    budget = limits.OmegaBudget(t_max=50.0)
    cases = (
        ("same basin     ", [0.1, 0.1], [0.4, 0.4]),
        ("across the ridge", [-0.5, -0.5], [0.5, 0.5]),
    )
    for label, x, y in cases:
        rep = limits.dichotomy_check(system, x, y, budget=budget)
        print(f"  {label}: branch ({rep.details.get('branch')}), "
              f"holds={rep.holds}")
    print()


def full_suite():
    print("== property suite on the bistable system ==")
    system = dynamics.builtin_system("bistable_tanh")
    suite = limits.run_property_suite(system, n_pairs=25, seed=1)
    for name, rep in suite.items():
        print(f"  {name:28s}: holds={rep.holds} "
              f"({rep.n_passed}/{rep.n_tested} decided-pass)")


def main():
    omega_estimates()
    monotone_and_nonordering()
    dichotomy_branches()
    full_suite()


if __name__ == "__main__":
    main()
