"""Tests for the ordered-line foliation census.

Cluster counting and label changes are checked against hand-enumerated
code arrays; the partition-invariance test asserts bitwise equality, not
closeness, because parallel census runs must reproduce serial ones exactly.
"""

import numpy as np
import pytest

from conalflow import census, cones, dynamics, geometry
from conalflow.census import (
    CLASS_CONVERGENT,
    CLASS_ESCAPED,
    CLASS_PERIODIC,
    CLASS_UNDECIDED,
    CensusBudget,
    build_foliation,
    cluster_count,
    label_changes,
    measure_estimate,
    run_line_census,
)
from conalflow.errors import ArgumentError, FoliationError


# ---------------------------------------------------------------------------
# foliation construction
# ---------------------------------------------------------------------------


def test_foliation_bistable_geometry(bistable):
    fol = build_foliation(bistable, resolution=(5, 9))
    d = 1 / np.sqrt(2)
    np.testing.assert_allclose(fol.v, [d, d], atol=1e-12)
    assert fol.v_margin == pytest.approx(d)
    # the complement row spans the anti-diagonal (sign is free)
    assert abs(fol.complement[0] @ np.array([d, -d])) == pytest.approx(1.0)
    assert fol.complement @ fol.v == pytest.approx(0.0, abs=1e-12)
    assert fol.n_shrinks == 0
    assert fol.split_condition == pytest.approx(1.0)
    assert fol.n_total_lines == 5
    assert fol.dim == 2
    lo, hi = fol.region
    np.testing.assert_allclose(lo, [-2.0, -2.0])
    np.testing.assert_allclose(hi, [2.0, 2.0])
    assert np.all(fol.chords[:, 1] > fol.chords[:, 0])
    assert fol.line_extent <= np.linalg.norm(hi - lo) + 1e-9
    assert fol.offset_cell_volume > 0


def test_foliation_line_samples_are_cell_centered(bistable):
    fol = build_foliation(bistable, resolution=(3, 4))
    s, pts = fol.line_samples(1)
    s_min, s_max = fol.chords[1]
    step = (s_max - s_min) / 4
    np.testing.assert_allclose(s, s_min + step * (np.arange(4) + 0.5))
    # consecutive samples differ by a positive multiple of v
    np.testing.assert_allclose(np.diff(pts, axis=0),
                               np.tile(step * fol.v, (3, 1)), atol=1e-12)
    assert np.all(pts >= fol.region[0] - 1e-9)
    assert np.all(pts <= fol.region[1] + 1e-9)


def test_foliation_one_dimensional_degenerate_split():
    sys1 = dynamics.builtin_system("linear_metzler", a=[[-1.0]])
    fol = build_foliation(sys1, region=([-1.0], [1.0]), resolution=(7, 8))
    assert fol.dim == 1
    # a 1-D box is a single line regardless of the requested line count
    assert fol.n_total_lines == 1
    assert fol.offsets.shape == (1, 0)
    assert fol.offset_cell_volume == 1.0
    np.testing.assert_allclose(fol.chords[0], [-1.0, 1.0], atol=1e-12)
    s, pts = fol.line_samples(0)
    np.testing.assert_allclose(s, [-0.875, -0.625, -0.375, -0.125,
                                   0.125, 0.375, 0.625, 0.875])


def test_foliation_refined_doubles_points_only(bistable):
    fol = build_foliation(bistable, resolution=(5, 10))
    ref = fol.refined(2)
    assert ref.n_points == 20
    assert ref.n_total_lines == fol.n_total_lines
    np.testing.assert_array_equal(ref.offsets, fol.offsets)
    np.testing.assert_array_equal(ref.chords, fol.chords)


def test_foliation_argument_validation(bistable):
    with pytest.raises(ArgumentError):
        build_foliation(bistable, resolution=(0, 5))
    with pytest.raises(ArgumentError):
        build_foliation(bistable, region=([0.0, 0.0], [0.0, 1.0]))
    with pytest.raises(ArgumentError):
        build_foliation(bistable, x=[-2.0, 0.0])  # base on the boundary


def test_foliation_shrinks_when_direction_not_interior_everywhere():
    # cone flips to its negative on the left half plane; no direction is
    # interior over a box straddling x1 = 0
    man = geometry.euclidean(2)
    neg = cones.generator_cone([[-1.0, 0.0], [0.0, -1.0]])

    def flip(p):
        return cones.orthant(2) if p.coords[0] >= 0 else neg

    sysf = dynamics.SystemSpec(
        name="flip", manifold=man, cone_field=cones.custom_field(man, flip),
        f=lambda y: -y, region=([-1.0, -1.0], [1.0, 1.0]),
    )
    # an off-center base recovers: the box shrinks clear of the flip line
    fol = build_foliation(sysf, x=[0.5, 0.0])
    assert fol.n_shrinks >= 5
    assert fol.region[0][0] > 0.0
    # centered on the flip line every shrunk box still straddles it
    with pytest.raises(FoliationError):
        build_foliation(sysf, x=[0.0, 0.0], max_shrinks=5)


# ---------------------------------------------------------------------------
# cluster counting and label changes
# ---------------------------------------------------------------------------


C, P, E, U = CLASS_CONVERGENT, CLASS_PERIODIC, CLASS_ESCAPED, CLASS_UNDECIDED


@pytest.mark.parametrize("codes,expected", [
    ([C, C, C, C], 0),
    ([C, U, U, C], 1),              # one undecided run
    ([C, P, P, C, E, C], 2),        # two separated decided runs
    ([U, U, U], 1),                 # pure undecided line
    ([P, C, P], 2),
    ([C, U, P, U, C], 1),           # undecided padding merges into one crossing
    ([C, P, U, P, C], 2),           # decided sub-runs count separately
    ([E], 1),
    ([], 0),
])
def test_cluster_count(codes, expected):
    assert cluster_count(np.array(codes, dtype=int)) == expected


def _mk_census(codes, eq_index):
    codes = np.asarray(codes, dtype=int)
    n = len(codes)
    return census.LineCensus(
        line_index=0, offset=np.zeros(1), s_values=np.linspace(0, 1, n),
        codes=codes, eq_index=np.asarray(eq_index, dtype=int),
        residuals=np.zeros(n), t_used=np.zeros(n), chord=(0.0, 1.0),
        cluster_count=cluster_count(codes),
    )


def test_label_changes_counts_basin_switches():
    assert label_changes(_mk_census([C, C, C, C], [0, 0, 1, 1])) == 1
    # non-convergent samples are skipped, not counted as switches
    assert label_changes(_mk_census([C, C, U, C, C], [0, 0, -1, 1, 1])) == 1
    assert label_changes(_mk_census([C, U, U, U], [0, -1, -1, -1])) == 0
    assert label_changes(_mk_census([C, C], [2, 2])) == 0


# ---------------------------------------------------------------------------
# line census
# ---------------------------------------------------------------------------


def test_line_census_stable_linear_all_convergent(metzler):
    fol = build_foliation(metzler, region=([-1.0, -1.0], [1.0, 1.0]),
                          resolution=(3, 16))
    cs = run_line_census(metzler, fol, CensusBudget(t_max=30.0))
    assert len(cs) == 3
    for c in cs:
        assert np.all(c.codes == CLASS_CONVERGENT)
        assert np.all(c.eq_index == 0)
        assert c.cluster_count == 0
        assert c.mu_y == 0.0 and c.mu_y_upper == 0.0
        assert c.order_pairs_checked >= 1
        assert c.order_pairs_failed == 0
        assert c.order_pairs_undecided == 0
        assert np.all(c.t_used <= 30.0)
        assert c.length == pytest.approx(c.chord[1] - c.chord[0])


def test_line_census_partition_invariance(bistable):
    # classifying lines in chunks must reproduce the full run bit for bit
    fol = build_foliation(bistable, resolution=(3, 24))
    budget = CensusBudget(t_max=50.0)
    full = run_line_census(bistable, fol, budget, seed=11)
    parts = run_line_census(bistable, fol, budget, seed=11, line_indices=[0, 1])
    parts += run_line_census(bistable, fol, budget, seed=11, line_indices=[2])
    assert [c.line_index for c in parts] == [c.line_index for c in full]
    for a, b in zip(full, parts):
        assert np.array_equal(a.codes, b.codes)
        assert np.array_equal(a.eq_index, b.eq_index)
        assert np.array_equal(a.residuals, b.residuals)
        assert np.array_equal(a.t_used, b.t_used)
        assert a.order_pairs_checked == b.order_pairs_checked
        assert a.order_pairs_failed == b.order_pairs_failed


def test_line_census_bistable_small_grid(bistable):
    fol = build_foliation(bistable, resolution=(4, 24))
    cs = run_line_census(bistable, fol, CensusBudget(t_max=50.0))
    for c in cs:
        assert c.cluster_count in (0, 1)
        assert c.order_pairs_failed == 0
        # both basins appear on lines that cross the anti-diagonal
        if c.cluster_count == 1 or label_changes(c) > 0:
            conv = c.eq_index[c.codes == CLASS_CONVERGENT]
            assert len(np.unique(conv)) == 2


# ---------------------------------------------------------------------------
# measure estimates
# ---------------------------------------------------------------------------


def test_measure_estimate_stable_linear_is_zero(metzler):
    fol = build_foliation(metzler, region=([-1.0, -1.0], [1.0, 1.0]),
                          resolution=(3, 12))
    rep = measure_estimate(metzler, fol, CensusBudget(t_max=30.0),
                           refinements=(1, 2))
    assert rep.fubini_estimate == 0.0
    assert rep.mc_estimate == 0.0
    assert rep.nonconvergent_fraction == 0.0
    assert rep.undecided_fraction == 0.0
    assert rep.estimators_agree
    assert rep.agreement_gap == 0.0
    assert rep.basin_fractions == {0: 1.0}
    assert rep.region_volume == pytest.approx(4.0)
    assert [r["factor"] for r in rep.refinement] == [1, 2]
    assert rep.refinement[1]["n_points"] == 24
    assert all(r["max_cluster_count"] == 0 for r in rep.refinement)
    assert rep.n_samples == 3 * 12
    assert rep.order_check_failures == 0


def test_measure_estimate_bistable_small(bistable):
    fol = build_foliation(bistable, resolution=(5, 24))
    rep = measure_estimate(bistable, fol, CensusBudget(t_max=50.0),
                           refinements=(1, 2))
    assert 0.0 <= rep.fubini_estimate <= rep.region_volume
    assert rep.fubini_upper >= rep.fubini_estimate
    assert rep.mc_upper >= rep.mc_estimate
    assert rep.mc_n == rep.n_samples
    # at this resolution the non-convergent fraction is already small
    assert rep.nonconvergent_fraction <= 0.1
    assert set(rep.basin_fractions) <= {0, 1, 2, -1}
    assert sum(rep.basin_fractions.values()) == pytest.approx(
        1.0 - rep.nonconvergent_fraction - rep.undecided_fraction
    )
    assert len(rep.cluster_counts) == 5
    assert all(k in (0, 1) for k in rep.cluster_counts)


def test_measure_estimate_reuses_provided_censuses(metzler):
    fol = build_foliation(metzler, region=([-1.0, -1.0], [1.0, 1.0]),
                          resolution=(2, 8))
    budget = CensusBudget(t_max=30.0)
    cs = run_line_census(metzler, fol, budget)
    rep = measure_estimate(metzler, fol, budget, censuses=cs,
                           refinements=(1,))
    assert rep.censuses is cs
    assert len(rep.refinement) == 1


# ---------------------------------------------------------------------------
# countability probe
# ---------------------------------------------------------------------------


def test_countability_probe_bistable(bistable):
    fol = build_foliation(bistable, resolution=(4, 20))
    budget = CensusBudget(t_max=50.0)
    base = run_line_census(bistable, fol, budget)
    rep = census.countability_probe(bistable, fol, base, budget=budget)
    assert rep.holds
    assert rep.n_lines == 4
    assert rep.n_unstable == 0
    assert rep.n_shared_omega == 0
    assert len(rep.base_counts) == len(rep.refined_counts) == 4
    # refinement may only sharpen the crossing, never split it
    for b, r in zip(rep.base_counts, rep.refined_counts):
        assert r <= b


def test_countability_probe_flags_synthetic_instability(metzler):
    # hand-built censuses where refinement splits one cluster into two
    fol = build_foliation(metzler, region=([-1.0, -1.0], [1.0, 1.0]),
                          resolution=(1, 4))
    base = [_mk_census([C, U, C, C], [0, -1, 0, 0])]
    refined = [_mk_census([C, U, C, U, C, C, C, C], [0, -1, 0, -1, 0, 0, 0, 0])]
    rep = census.countability_probe(metzler, fol, base,
                                    refined_censuses=refined)
    assert not rep.holds
    assert rep.n_unstable == 1
    assert rep.details[0]["base"] == 1
    assert rep.details[0]["refined"] == 2
