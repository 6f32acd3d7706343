"""Tests for manifolds, metrics, geodesics, and invariant transports.

Scalar SPD instances have closed forms used as oracles (congruence sends v to
(y/x)v, the geodesic from x to y is x(y/x)^t, the distance is |log(y/x)|);
matrix instances are checked against invariance properties instead.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conalflow import cones, geometry
from conalflow.errors import ArgumentError, DomainError


def spd1_point(x):
    return geometry.point(geometry.spd_manifold(1), [x])


# ---------------------------------------------------------------------------
# specs, points, flattening
# ---------------------------------------------------------------------------


def test_manifold_dims():
    assert geometry.euclidean(3).dim == 3
    assert geometry.spd_manifold(2).dim == 3
    assert geometry.spd_manifold(3).dim == 6
    with pytest.raises(ArgumentError):
        geometry.ManifoldSpec(kind="spd", dim=4, matrix_size=2)
    with pytest.raises(ArgumentError):
        geometry.ManifoldSpec(kind="torus", dim=2)


def test_point_validation():
    man = geometry.euclidean(2)
    with pytest.raises(ArgumentError):
        geometry.point(man, [1.0, 2.0, 3.0])
    # SPD points must be positive definite
    spd = geometry.spd_manifold(2)
    geometry.point(spd, geometry.sym_to_vec(np.eye(2)))
    with pytest.raises(DomainError):
        geometry.point(spd, geometry.sym_to_vec(np.diag([1.0, -1.0])))


def test_point_coords_are_frozen():
    p = geometry.point(geometry.euclidean(2), [1.0, 2.0])
    with pytest.raises(ValueError):
        p.coords[0] = 5.0


@given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=2**32 - 1))
def test_sym_vec_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    m = a + a.T
    v = geometry.sym_to_vec(m)
    assert v.shape == (n * (n + 1) // 2,)
    np.testing.assert_allclose(geometry.vec_to_sym(v, n), m, atol=0)


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------


def test_euclidean_inner_is_dot():
    man = geometry.euclidean(3)
    x = geometry.point(man, [0.0, 0.0, 0.0])
    u = geometry.tangent(x, [1.0, 2.0, 3.0])
    v = geometry.tangent(x, [-1.0, 0.5, 2.0])
    assert geometry.inner(x, u, v) == pytest.approx(1 * -1 + 2 * 0.5 + 3 * 2)


def test_spd_scalar_inner():
    # <u, v>_x = uv / x^2 for 1x1 matrices
    x = spd1_point(2.0)
    u = geometry.tangent(x, [3.0])
    v = geometry.tangent(x, [5.0])
    assert geometry.inner(x, u, v) == pytest.approx(15.0 / 4.0, rel=1e-12)


def test_spd_gram_matches_trace_form():
    man = geometry.spd_manifold(2)
    rng = np.random.default_rng(3)
    x = geometry.random_point(man, rng)
    g = geometry.metric_gram(x)
    for _ in range(10):
        u = geometry.random_tangent(x, rng)
        v = geometry.random_tangent(x, rng)
        direct = geometry.inner(x, u, v)
        via_gram = u.components @ g @ v.components
        assert via_gram == pytest.approx(direct, rel=1e-10, abs=1e-12)


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_metric_symmetric_positive(seed):
    rng = np.random.default_rng(seed)
    man = geometry.spd_manifold(2)
    x = geometry.random_point(man, rng)
    u = geometry.random_tangent(x, rng)
    v = geometry.random_tangent(x, rng)
    assert geometry.inner(x, u, v) == pytest.approx(
        geometry.inner(x, v, u), rel=1e-10, abs=1e-12
    )
    if np.linalg.norm(u.components) > 1e-8:
        assert geometry.inner(x, u, u) > 0


def test_volume_density():
    x = geometry.point(geometry.euclidean(4), np.zeros(4))
    assert geometry.volume_density(x) == 1.0
    # scalar SPD: g = 1/x^2, so the density is 1/x
    assert geometry.volume_density(spd1_point(2.0)) == pytest.approx(0.5, rel=1e-12)


# ---------------------------------------------------------------------------
# geodesics and distance
# ---------------------------------------------------------------------------


def test_geodesic_euclidean_midpoint():
    man = geometry.euclidean(2)
    x = geometry.point(man, [0.0, 0.0])
    y = geometry.point(man, [2.0, 2.0])
    mid = geometry.geodesic(x, y, 0.5)
    np.testing.assert_allclose(mid.coords, [1.0, 1.0])


def test_geodesic_scalar_spd():
    # x (y/x)^t: from 1 to 4 the midpoint is 2, not 2.5
    x, y = spd1_point(1.0), spd1_point(4.0)
    assert geometry.geodesic(x, y, 0.5).coords[0] == pytest.approx(2.0, rel=1e-12)


@given(st.integers(min_value=0, max_value=2**32 - 1),
       st.sampled_from(["euclidean", "spd"]))
def test_geodesic_endpoints(seed, kind):
    rng = np.random.default_rng(seed)
    man = geometry.euclidean(3) if kind == "euclidean" else geometry.spd_manifold(2)
    x = geometry.random_point(man, rng)
    y = geometry.random_point(man, rng)
    np.testing.assert_allclose(geometry.geodesic(x, y, 0.0).coords, x.coords,
                               rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(geometry.geodesic(x, y, 1.0).coords, y.coords,
                               rtol=1e-10, atol=1e-12)


def test_distance_scalar_spd():
    assert geometry.distance(spd1_point(1.0), spd1_point(4.0)) == pytest.approx(
        np.log(4.0), rel=1e-12
    )


def test_spd_distance_is_affine_invariant():
    man = geometry.spd_manifold(2)
    rng = np.random.default_rng(7)
    x = geometry.random_point(man, rng)
    y = geometry.random_point(man, rng)
    a = rng.standard_normal((2, 2))
    a += 3 * np.eye(2)  # invertible
    conj = lambda p: geometry.point(man, geometry.sym_to_vec(a @ p.as_matrix() @ a.T))
    assert geometry.distance(conj(x), conj(y)) == pytest.approx(
        geometry.distance(x, y), rel=1e-9
    )


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------


def test_identity_transport_euclidean():
    man = geometry.euclidean(2)
    tmap = geometry.default_transport(man)
    x1 = geometry.point(man, [0.3, -0.7])
    x2 = geometry.point(man, [5.0, 5.0])
    v = geometry.tangent(x1, [1.0, 2.0])
    np.testing.assert_array_equal(
        geometry.transport(tmap, x1, x2, v).components, [1.0, 2.0]
    )


def test_scalar_spd_transport():
    # congruence with E = sqrt(y) / sqrt(x): v -> (y/x) v
    tmap = geometry.TransportMap(kind="spd_congruence")
    x, y = spd1_point(1.0), spd1_point(4.0)
    v = geometry.tangent(x, [1.0])
    assert geometry.transport(tmap, x, y, v).components[0] == pytest.approx(4.0)


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_transport_at_same_point_is_identity(seed):
    rng = np.random.default_rng(seed)
    man = geometry.spd_manifold(2)
    tmap = geometry.default_transport(man)
    x = geometry.random_point(man, rng)
    v = geometry.random_tangent(x, rng)
    np.testing.assert_allclose(
        geometry.transport(tmap, x, x, v).components, v.components,
        rtol=1e-9, atol=1e-9,
    )


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=25)
def test_spd_transport_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    man = geometry.spd_manifold(2)
    tmap = geometry.default_transport(man)
    x1 = geometry.random_point(man, rng)
    x2 = geometry.random_point(man, rng)
    v = geometry.random_tangent(x1, rng)
    gv = geometry.transport(tmap, x1, x2, v)
    n1, n2 = geometry.norm(x1, v), geometry.norm(x2, gv)
    assert n2 == pytest.approx(n1, rel=1e-9, abs=1e-12)


@given(st.integers(min_value=0, max_value=2**32 - 1),
       st.floats(min_value=0.1, max_value=0.9))
@settings(max_examples=25)
def test_spd_transport_composes_along_geodesics(seed, t):
    rng = np.random.default_rng(seed)
    man = geometry.spd_manifold(2)
    tmap = geometry.default_transport(man)
    x1 = geometry.random_point(man, rng)
    x3 = geometry.random_point(man, rng)
    x2 = geometry.geodesic(x1, x3, t)
    v = geometry.random_tangent(x1, rng)
    two_hops = geometry.transport(tmap, x2, x3, geometry.transport(tmap, x1, x2, v))
    direct = geometry.transport(tmap, x1, x3, v)
    np.testing.assert_allclose(two_hops.components, direct.components,
                               rtol=1e-9, atol=1e-9)


def test_transport_matrix_matches_transport():
    man = geometry.spd_manifold(2)
    tmap = geometry.default_transport(man)
    rng = np.random.default_rng(11)
    x1 = geometry.random_point(man, rng)
    x2 = geometry.random_point(man, rng)
    m = geometry.transport_matrix(tmap, x1, x2)
    v = geometry.random_tangent(x1, rng)
    np.testing.assert_allclose(
        m @ v.components,
        geometry.transport(tmap, x1, x2, v).components,
        rtol=1e-10, atol=1e-12,
    )


# ---------------------------------------------------------------------------
# invariance verification
# ---------------------------------------------------------------------------


def test_invariance_euclidean_identity():
    man = geometry.euclidean(2)
    k = cones.orthant(2)
    rep = geometry.verify_transport_invariance(
        man, geometry.default_transport(man),
        cone_margin=lambda p, v: cones.margin(k, v),
        n_trials=1000, seed=0,
    )
    assert rep.max_metric_residual == 0.0
    assert rep.n_cone_mismatches == 0
    assert rep.max_identity_residual == 0.0


def test_invariance_spd_congruence():
    man = geometry.spd_manifold(2)
    base = geometry.point(man, geometry.sym_to_vec(np.eye(2)))
    fld = cones.transported_field(man, cones.psd_cone(2), base)
    rep = geometry.verify_transport_invariance(
        man, geometry.default_transport(man),
        cone_margin=cones.field_margin_fn(fld),
        n_trials=1000, seed=0,
    )
    assert rep.max_metric_residual <= 1e-9
    assert rep.n_cone_mismatches == 0


def test_invariance_detects_rotation_flips():
    # a 90-degree rotation maps (1, 0) out of the orthant: not cone-invariant
    man = geometry.euclidean(2)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    tmap = geometry.TransportMap(kind="linear", map_fn=lambda x, y: rot)
    k = cones.orthant(2)
    rep = geometry.verify_transport_invariance(
        man, tmap,
        cone_margin=lambda p, v: cones.margin(k, v),
        n_trials=1000, seed=0,
    )
    assert rep.n_cone_mismatches > 0
    assert len(rep.mismatch_examples) > 0
