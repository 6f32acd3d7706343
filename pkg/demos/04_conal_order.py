"""The conal order: deciding x <= y and probing when it is a partial order.

Between two points, the order oracle tries the exact cone test first
(constant fields) and otherwise searches for a conal curve -- a path whose
tangent stays inside the cone field along the way.  The search produces a
checkable witness curve.

The second half looks at antisymmetry.  A spinning halfspace field admits
genuine closed conal loops (go around the origin once), so x <= y and
y <= x both hold for far-apart points and the order collapses.  A pointed
swirling cone behaves differently: the detector finds no violations, only
honest Undecided verdicts.
"""

import numpy as np

from conalflow import cones, geometry, order


def decided_by_cone_test():
    print("== constant orthant field: exact verdicts ==")
    man = geometry.euclidean(2)
    fld = cones.constant_field(man, cones.orthant(2))
    for x, y in (([0.0, 0.0], [1.0, 2.0]),
                 ([0.0, 0.0], [1.0, 0.0]),
                 ([0.0, 0.0], [-1.0, 1.0]),
                 ([0.5, 0.5], [0.5, 0.5])):
        v = order.compare(fld, x, y)
        eq = " (equal)" if v.equal else ""
        print(f"  {x} vs {y}: {v.relation}{eq}, margin {v.margin:+.4f}")
    print()


def witness_curves():
    print("== curve-search witness for a varying field ==")
    man = geometry.euclidean(2)

    def narrow_then_wide(p):
        # aperture widens with x1: order reaches more points downstream
        half = 0.3 + 0.25 * np.clip(p.coords[0], 0.0, 2.0)
        return cones.second_order_cone([1.0, 0.0], half)

    fld = cones.custom_field(man, narrow_then_wide)
    budget = order.SearchBudget(target_radius=0.02, max_steps=5000)
    v = order.compare(fld, [0.0, 0.0], [1.8, 0.9], budget)
    print(f"  verdict: {v.relation} ({v.reason})")
    if v.witness is not None:
        c = v.witness
        print(f"  witness curve: {c.nodes.shape[0]} nodes, "
              f"min tangent margin {c.min_margin:+.2e}")
    print()


def spinning_halfspace_breaks_antisymmetry():
    print("== spinning halfspace field: order collapses ==")
    man = geometry.euclidean(2)

    def swirl(p):
        x1, x2 = p.coords
        r = np.hypot(x1, x2)
        if r < 1e-9:
            return cones.orthant(2)
        t = np.array([-x2, x1]) / r
        return cones.halfspace_cone(t[None, :])

    fld = cones.custom_field(man, swirl)
    budget = order.SearchBudget(target_radius=0.05, max_steps=2500)
    rep = order.antisymmetry_diagnostic(
        fld, ([-1.5, -1.5], [1.5, 1.5]), n_samples=10, seed=3, budget=budget
    )
    print(f"  antisymmetry holds: {rep.holds} "
          f"({len(rep.violations)} two-way pairs of {rep.n_pairs})")
    if rep.violations:
        a, b, fwd, bwd = rep.violations[0]
        print(f"  e.g. {np.round(a, 3)} <= {np.round(b, 3)} and back "
              f"({fwd.relation} / {bwd.relation})")
    print()


def pointed_swirl_stays_honest():
    print("== pointed swirling cone: no false violations ==")
    man = geometry.euclidean(2)

    def swirl(p):
        x1, x2 = p.coords
        r = np.hypot(x1, x2)
        axis = [1.0, 0.0] if r < 1e-9 else [-x2 / r, x1 / r]
        return cones.second_order_cone(axis, 1.2)

    fld = cones.custom_field(man, swirl)
    budget = order.SearchBudget(target_radius=5e-3, max_steps=2000)
    rep = order.antisymmetry_diagnostic(
        fld, ([-1.5, -1.5], [1.5, 1.5]), n_samples=15, seed=0, budget=budget
    )
    print(f"  antisymmetry holds: {rep.holds}, "
          f"undecided pairs: {rep.n_undecided} of {rep.n_pairs}")
    print()


def limits_keep_order():
    print("== quasi-closedness: ordered sequences have ordered limits ==")
    man = geometry.euclidean(2)
    fld = cones.constant_field(man, cones.orthant(2))
    ns = np.arange(2.0, 8.0)
    seq = order.OrderedPairSequence(
        xs=tuple([1.0 - 1.0 / n, 1.0 - 1.0 / n] for n in ns),
        ys=tuple([1.5 - 1.0 / n, 1.25 - 1.0 / n] for n in ns),
        x_limit=[1.0, 1.0], y_limit=[1.5, 1.25],
    )
    rep = order.quasi_closedness_probe(fld, [seq])
    print(f"  sequences checked: {rep.n_sequences}, held: {rep.n_held}, "
          f"violations: {len(rep.violations)}")


def main():
    decided_by_cone_test()
    witness_curves()
    spinning_halfspace_breaks_antisymmetry()
    pointed_swirl_stays_honest()
    limits_keep_order()


if __name__ == "__main__":
    main()
