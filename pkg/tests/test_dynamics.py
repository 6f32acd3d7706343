"""Flow, variational flow, differential-positivity checks, equilibria.

Frozen oracles (computed independently before the implementation):

* e^{-2} cosh(1) = 0.20883325476965314 and e^{-2} sinh(1) =
  0.1590461864017892 are the entries of expm([[-2,1],[1,-2]]);
* x* = 0.9575040240772688 is the positive root of x = tanh(2x) (bisection);
* the cross-coupled tanh system has saddle eigenvalues {1, -3} at the
  origin and sink eigenvalues -1 -/+ 2 sech^2(2 x*) =
  {-1.1663720877516743, -0.8336279122483257} at (x*, x*).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conalflow import cones, dynamics, geometry
from conalflow.errors import ArgumentError
from conalflow.integrate import IntegratorOptions

X_STAR = 0.9575040240772688
EXPM_DIAG = 0.20883325476965314
EXPM_OFF = 0.1590461864017892
SINK_EIGS = (-1.1663720877516743, -0.8336279122483257)


def decay_system():
    return dynamics.builtin_system("linear_metzler", a=[[-1.0]])


# ---------------------------------------------------------------------------
# flow
# ---------------------------------------------------------------------------


def test_flow_linear_decay():
    tr = dynamics.flow(decay_system(), [1.0], 1.0)
    assert abs(tr.coords[-1, 0] - np.exp(-1.0)) < 1e-6


def test_flow_zero_time():
    tr = dynamics.flow(decay_system(), [1.0], 0.0)
    assert len(tr.times) == 1
    np.testing.assert_array_equal(tr.coords[0], [1.0])


def test_flow_bistable_reaches_sink(bistable):
    tr = dynamics.flow(bistable, [1.0, 1.0], 50.0)
    np.testing.assert_allclose(tr.coords[-1], [X_STAR, X_STAR], atol=1e-4)


def test_flow_defect_small_on_dense_grid(bistable):
    t_eval = np.linspace(0.01, 2.0, 400)
    tr = dynamics.flow(bistable, [0.3, -0.2], 2.0, t_eval=t_eval)
    # defect of the midpoint quotient scales like h^2; h = 5e-3 here
    assert tr.max_defect() < 1e-4


@given(st.floats(min_value=0.2, max_value=3.0),
       st.floats(min_value=0.2, max_value=3.0))
@settings(max_examples=20)
def test_flow_semigroup(t, s):
    sys = dynamics.builtin_system("bistable_tanh")
    x0 = [0.4, -0.7]
    one_leg = dynamics.flow(sys, x0, t + s)
    first = dynamics.flow(sys, x0, t)
    second = dynamics.flow(sys, first.coords[-1], s)
    assert np.linalg.norm(one_leg.coords[-1] - second.coords[-1]) < 1e-8


# ---------------------------------------------------------------------------
# variational flow
# ---------------------------------------------------------------------------


def test_variational_flow_matches_matrix_exponential(metzler):
    lin = dynamics.variational_flow(metzler, [0.5, 0.5], [1.0])
    expected = np.array([[EXPM_DIAG, EXPM_OFF], [EXPM_OFF, EXPM_DIAG]])
    np.testing.assert_allclose(lin.at(1.0), expected, atol=1e-6)


def test_variational_flow_identity_at_zero(bistable):
    lin = dynamics.variational_flow(bistable, [0.2, 0.1], [0.0, 1.0])
    np.testing.assert_allclose(lin.at(0.0), np.eye(2), atol=1e-10)


def test_variational_flow_scalar_decay():
    lin = dynamics.variational_flow(decay_system(), [1.0], [np.log(2.0)])
    assert lin.at(np.log(2.0))[0, 0] == pytest.approx(0.5, abs=1e-8)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=10)
def test_variational_flow_matches_finite_differences(seed):
    sys = dynamics.builtin_system("bistable_tanh")
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-1.5, 1.5, size=2)
    v = rng.standard_normal(2)
    v /= np.linalg.norm(v)
    t = 1.5
    lin = dynamics.variational_flow(sys, x0, [t])
    h = 1e-5
    plus = dynamics.flow(sys, x0 + h * v, t).coords[-1]
    minus = dynamics.flow(sys, x0 - h * v, t).coords[-1]
    fd = (plus - minus) / (2 * h)
    np.testing.assert_allclose(lin.at(t) @ v, fd, atol=5e-9 + 1e-6 * h)


def test_cocycle_residuals(metzler, bistable):
    assert dynamics.cocycle_check(metzler, [0.5, 0.5], 0.5, 0.5) <= 1e-7
    assert dynamics.cocycle_check(metzler, [0.5, 0.5], 1.0, 0.0) <= 1e-10
    assert dynamics.cocycle_check(bistable, [0.3, 0.4], 1.0, 1.0) <= 1e-6


# ---------------------------------------------------------------------------
# differential positivity
# ---------------------------------------------------------------------------


def test_check_dp_metzler_sdp(metzler):
    rep = dynamics.check_dp(metzler, [0.5, 0.5], t_grid=[0.1, 1.0, 10.0])
    assert rep.dp_consistent and rep.sdp_consistent
    assert rep.min_margin > 0
    assert rep.verdict == "SDP-consistent"


def test_check_dp_rotation_violated(rotation):
    rep = dynamics.check_dp(rotation, [0.5, 0.0], t_grid=[np.pi / 2])
    assert not rep.dp_consistent
    assert rep.verdict == "Violated"
    t_w, ray_w, margin_w = rep.witness
    assert margin_w < -1e-7
    # (0, 1) rotated by pi/2 lands at (-1, 0): check the recorded image
    assert t_w == pytest.approx(np.pi / 2)


def test_check_dp_decoupled_decay_is_dp_not_sdp():
    # d(phi_t) = e^{-t} I maps boundary rays to boundary rays exactly
    sys = dynamics.builtin_system("linear_metzler", a=[[-1.0, 0.0], [0.0, -1.0]])
    rep = dynamics.check_dp(sys, [1.0, 1.0], t_grid=[0.5, 1.0])
    assert rep.dp_consistent
    assert not rep.sdp_consistent
    assert rep.verdict == "DP-consistent"


def test_check_dp_bistable_sdp(bistable):
    rep = dynamics.check_dp(bistable, [0.3, -0.4], t_grid=[0.1, 1.0, 10.0])
    assert rep.sdp_consistent
    assert rep.min_margin > 0


def test_dp_margin_does_not_degrade_for_sdp_claims(metzler, bistable):
    for sys in (metzler, bistable):
        assert sys.declared.claims_sdp
        rep = dynamics.check_dp(sys, [0.2, 0.2], t_grid=[1.0, 2.0, 5.0, 10.0])
        assert rep.margins.min() > 0


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------


def test_find_equilibria_decay():
    eqs = dynamics.find_equilibria(decay_system())
    assert len(eqs) == 1
    assert eqs[0].classification == "stable"
    np.testing.assert_allclose(eqs[0].coords, [0.0], atol=1e-10)


def test_find_equilibria_bistable(bistable):
    eqs = dynamics.find_equilibria(bistable)
    assert len(eqs) == 3
    classes = sorted(e.classification for e in eqs)
    assert classes == ["saddle", "stable", "stable"]
    saddle = next(e for e in eqs if e.classification == "saddle")
    np.testing.assert_allclose(saddle.coords, [0.0, 0.0], atol=1e-10)
    np.testing.assert_allclose(sorted(saddle.eigenvalues.real), [-3.0, 1.0],
                               atol=1e-8)
    sinks = sorted((e for e in eqs if e.classification == "stable"),
                   key=lambda e: e.coords[0])
    np.testing.assert_allclose(sinks[1].coords, [X_STAR, X_STAR], atol=1e-10)
    np.testing.assert_allclose(sinks[0].coords, [-X_STAR, -X_STAR], atol=1e-10)
    np.testing.assert_allclose(sorted(sinks[1].eigenvalues.real), SINK_EIGS,
                               atol=1e-10)


def test_find_equilibria_rotation(rotation):
    eqs = dynamics.find_equilibria(rotation)
    assert len(eqs) == 1
    assert eqs[0].classification == "center"
    np.testing.assert_allclose(eqs[0].coords, [0.0, 0.0], atol=1e-12)


def test_equilibria_are_fixed_points(bistable):
    for e in dynamics.find_equilibria(bistable):
        assert np.linalg.norm(bistable.f(e.coords)) < 1e-10
        moved = dynamics.flow(bistable, e.coords, 1.0).coords[-1]
        assert np.linalg.norm(moved - e.coords) < 1e-8


def test_newton_refine_converges_to_sink(bistable):
    x = dynamics.newton_refine(bistable, [0.9, 1.0])
    np.testing.assert_allclose(x, [X_STAR, X_STAR], atol=1e-12)


def test_equilibrium_set_nearest(bistable):
    eqs = dynamics.find_equilibria(bistable)
    i, d = eqs.nearest([0.9, 0.9])
    np.testing.assert_allclose(eqs[i].coords, [X_STAR, X_STAR], atol=1e-10)
    assert d == pytest.approx(np.sqrt(2) * abs(0.9 - X_STAR), rel=1e-6)


# ---------------------------------------------------------------------------
# built-in registry
# ---------------------------------------------------------------------------


def test_builtin_names_construct():
    for name in dynamics.builtin_names():
        sys = dynamics.builtin_system(name)
        assert sys.manifold.dim >= 1
        lo, hi = sys.region_box()
        x = 0.5 * (np.asarray(lo) + np.asarray(hi))
        if sys.manifold.kind == "spd":
            x = geometry.sym_to_vec(np.eye(sys.manifold.matrix_size))
        fx = sys.f(np.asarray(x, dtype=float))
        assert np.all(np.isfinite(fx))


def test_metzler_rejects_non_metzler_matrix():
    with pytest.raises(ArgumentError):
        dynamics.builtin_system("linear_metzler", a=[[-1.0, -0.5], [0.2, -1.0]])


def test_unknown_builtin():
    with pytest.raises(ArgumentError):
        dynamics.builtin_system("van_der_pol")


def test_with_region_override(bistable):
    shrunk = bistable.with_region((np.array([-1.0, -1.0]), np.array([1.0, 1.0])))
    lo, hi = shrunk.region_box()
    np.testing.assert_array_equal(lo, [-1.0, -1.0])
    assert shrunk.name == bistable.name


def test_tristable_has_five_equilibria():
    sys = dynamics.builtin_system("tristable_sigmoid")
    eqs = dynamics.find_equilibria(sys, n_seeds=400)
    classes = sorted(e.classification for e in eqs)
    assert classes == ["saddle", "saddle", "stable", "stable", "stable"]
