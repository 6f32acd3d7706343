"""Tests for the inline expression language.

Evaluation is checked against numpy closures on the same formulas, and the
symbolic Jacobian against central finite differences.
"""

import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conalflow.errors import ConfigError
from conalflow.expressions import ExpressionField, parse_expression

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def ev(text, **env):
    return parse_expression(text).eval(env)


# ---------------------------------------------------------------------------
# parsing and evaluation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("text,expected", [
    ("1 + 2 * 3", 7.0),
    ("(1 + 2) * 3", 9.0),
    ("2 - 3 - 4", -5.0),            # left-associative subtraction
    ("12 / 4 / 3", 1.0),
    ("-2 ** 2", -4.0),              # unary minus binds looser than **
    ("2 ** -1", 0.5),
    ("2 ** 3 ** 2", 512.0),         # right-associative power
    ("pow(2, 10)", 1024.0),
    ("--3", 3.0),
    ("+5", 5.0),
    ("1.5e2", 150.0),
    (".25", 0.25),
    ("2e-3", 0.002),
])
def test_literal_arithmetic(text, expected):
    assert ev(text) == pytest.approx(expected)


def test_variables_and_functions():
    assert ev("x1 * x2", x1=3.0, x2=4.0) == 12.0
    assert ev("tanh(2 * x1)", x1=0.5) == pytest.approx(np.tanh(1.0))
    assert ev("exp(log(x1))", x1=2.5) == pytest.approx(2.5)
    assert ev("sin(x1) ** 2 + cos(x1) ** 2", x1=0.7) == pytest.approx(1.0)


@pytest.mark.parametrize("text", [
    "1 +",
    "(1 + 2",
    "1 ** ",
    "foo(3)",          # unknown function
    "pow(2)",          # wrong arity
    "tanh(1, 2)",
    "1 2",
    "x1 $ 2",
])
def test_malformed_expressions_rejected(text):
    with pytest.raises(ConfigError):
        parse_expression(text)


@settings(max_examples=60)
@given(a=finite, b=finite)
def test_eval_matches_numpy(a, b):
    """Property: the tree evaluates exactly as the equivalent closure."""
    got = ev("x1 * x2 - tanh(x1 + 2.0) / (3.0 + cos(x2))", x1=a, x2=b)
    want = a * b - np.tanh(a + 2.0) / (3.0 + np.cos(b))
    assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_eval_broadcasts_over_arrays():
    node = parse_expression("x1 ** 2 + 1")
    x = np.linspace(-1.0, 1.0, 7)
    np.testing.assert_allclose(node.eval({"x1": x}), x**2 + 1)


# ---------------------------------------------------------------------------
# symbolic derivatives
# ---------------------------------------------------------------------------


@settings(max_examples=40)
@given(x=st.floats(min_value=-2.0, max_value=2.0, allow_nan=False))
def test_diff_matches_finite_differences(x):
    """Property: symbolic derivative == central difference on a smooth term."""
    node = parse_expression("tanh(2 * x1) - x1 ** 3 / 3 + sin(x1) * cos(x1)")
    d = node.diff("x1")
    h = 1e-6
    fd = (node.eval({"x1": x + h}) - node.eval({"x1": x - h})) / (2 * h)
    assert d.eval({"x1": x}) == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_diff_general_power_uses_log():
    node = parse_expression("x1 ** x2")
    d = node.diff("x2")
    env = {"x1": 2.0, "x2": 3.0}
    assert d.eval(env) == pytest.approx(8.0 * np.log(2.0))


def test_diff_of_constant_is_zero():
    assert parse_expression("3 * 7").diff("x1").eval({}) == 0.0


# ---------------------------------------------------------------------------
# ExpressionField
# ---------------------------------------------------------------------------


def test_field_matches_builtin_bistable():
    from conalflow import dynamics

    fld = ExpressionField(
        ["-x1 + tanh(g * x2)", "-x2 + tanh(g * x1)"], dim=2,
        params={"g": 2.0},
    )
    builtin = dynamics.builtin_system("bistable_tanh", gain=2.0)
    pts = np.array([[0.3, -0.7], [1.2, 0.4], [-0.05, 0.0]])
    np.testing.assert_allclose(fld(pts), builtin.f(pts), atol=1e-14)
    for p in pts:
        np.testing.assert_allclose(fld.jacobian(p), builtin.jac(p), atol=1e-12)


def test_field_aliases_xyz():
    fld = ExpressionField(["y", "-x"], dim=2)
    np.testing.assert_allclose(fld(np.array([2.0, 5.0])), [5.0, -2.0])


def test_field_params_are_folded_in():
    fld = ExpressionField(["-a * x1"], dim=1, params={"a": 2.5})
    np.testing.assert_allclose(fld(np.array([2.0])), [-5.0])
    # parameters are gone from the tree: nothing left to bind at eval time
    assert fld(np.array([1.0]))[0] == -2.5


def test_field_validation():
    with pytest.raises(ConfigError):
        ExpressionField(["x1 + b"], dim=1)             # unbound name
    with pytest.raises(ConfigError):
        ExpressionField(["x3"], dim=2)                 # variable out of range
    with pytest.raises(ConfigError):
        ExpressionField(["x1", "x2"], dim=3)           # wrong component count
    with pytest.raises(ConfigError):
        ExpressionField(["x1"], dim=1, params={"x1": 2.0})   # shadows variable
    with pytest.raises(ConfigError):
        ExpressionField(["x1"], dim=1, params={"y": 2.0})    # shadows alias


def test_field_jacobian_requires_single_point():
    fld = ExpressionField(["-x1"], dim=1)
    with pytest.raises(ConfigError):
        fld.jacobian(np.zeros((3, 1)))


def test_field_pickles_for_worker_processes():
    fld = ExpressionField(
        ["-x1 + tanh(g * x2)", "-x2 + tanh(g * x1)"], dim=2,
        params={"g": 2.0},
    )
    clone = pickle.loads(pickle.dumps(fld))
    p = np.array([0.4, -0.2])
    np.testing.assert_array_equal(clone(p), fld(p))
    np.testing.assert_array_equal(clone.jacobian(p), fld.jacobian(p))
