"""Tests for the deterministic JSON serializer, payload builders, CSV output,
and the text renderer."""

import json

import numpy as np
import pytest

from conalflow import census, dynamics, limits, order, reports
from conalflow.census import CensusBudget, build_foliation, run_line_census
from conalflow.errors import ArgumentError


# ---------------------------------------------------------------------------
# serializer
# ---------------------------------------------------------------------------


def test_dumps_json_is_deterministic_and_parseable():
    payload = {"a": 1, "b": [1.5, 2.0, None], "c": {"nested": True},
               "d": "text", "empty": {}, "none": None, "list": []}
    s1 = reports.dumps_json(payload)
    s2 = reports.dumps_json(payload)
    assert s1 == s2
    assert json.loads(s1) == payload


def test_floats_round_trip_exactly():
    vals = [0.1, 1 / 3, np.pi, 1e-308, -2.5e17, 0.9575040240772688]
    s = reports.dumps_json({"vals": vals})
    back = json.loads(s)["vals"]
    assert back == vals  # 17 significant digits reproduce every double


def test_serializer_rejects_nonfinite_and_unknown_types():
    with pytest.raises(ArgumentError, match="non-finite"):
        reports.dumps_json({"x": float("nan")})
    with pytest.raises(ArgumentError, match="non-finite"):
        reports.dumps_json({"x": float("inf")})
    with pytest.raises(ArgumentError, match="cannot serialize"):
        reports.dumps_json({"x": object()})


def test_jsonable_converts_numpy_and_nonfinite():
    out = reports.jsonable({
        "arr": np.array([[1.0, 2.0]]),
        "i": np.int64(3),
        "f": np.float64(0.5),
        "b": np.bool_(True),
        "nan": float("nan"),
        "inf": np.float64("inf"),
        "tup": (1, 2),
    })
    assert out == {"arr": [[1.0, 2.0]], "i": 3, "f": 0.5, "b": True,
                   "nan": None, "inf": None, "tup": [1, 2]}
    assert isinstance(out["i"], int) and isinstance(out["b"], bool)


def test_write_json_writes_atomically(tmp_path):
    path = tmp_path / "doc.json"
    reports.write_json(str(path), {"kind": "demo", "x": 1.0})
    assert json.loads(path.read_text())["x"] == 1.0
    assert not (tmp_path / "doc.json.tmp").exists()


# ---------------------------------------------------------------------------
# payload builders
# ---------------------------------------------------------------------------


def test_document_envelope_and_config_embedding(metzler):
    rep = dynamics.check_dp(metzler, [0.5, 0.5], t_grid=(0.5,), n_rays=8)
    doc = reports.dp_report_payload(rep, config={"system": {"builtin": "x"}})
    assert doc["schema_version"] == reports.SCHEMA_VERSION == "1.0"
    assert doc["kind"] == "dp_report"
    assert "timestamp" in doc
    assert doc["config"] == {"system": {"builtin": "x"}}
    assert doc["verdict"] == rep.verdict
    assert doc["dp_consistent"] is True
    # the whole document must serialize
    reports.dumps_json(doc)


def test_dp_payload_carries_witness(rotation):
    rep = dynamics.check_dp(rotation, [0.5, 0.0], t_grid=(0.5, np.pi / 2), n_rays=16)
    doc = reports.dp_report_payload(rep)
    assert doc["verdict"] == "Violated"
    assert doc["witness"] is not None
    assert doc["witness"]["image_margin"] < 0
    reports.dumps_json(doc)


def test_order_verdict_payload(bistable):
    v = order.compare(bistable, [0.1, 0.1], [0.5, 0.4])
    doc = reports.order_verdict_payload(v, [0.1, 0.1], [0.5, 0.4])
    assert doc["kind"] == "order_verdict"
    assert doc["relation"] == order.STRICTLY_LESS
    assert doc["x"] == [0.1, 0.1]
    reports.dumps_json(doc)


def test_omega_estimate_payload(bistable):
    est = limits.omega_estimate(bistable, [0.2, 0.2])
    doc = reports.omega_estimate_payload(est)
    assert doc["kind"] == "omega_estimate"
    assert doc["class"] == "ConvergedTo"
    assert doc["equilibrium"]["classification"] == "stable"
    assert doc["n_samples"] == 1
    reports.dumps_json(doc)


def test_suite_payload(bistable):
    suite = limits.run_property_suite(bistable, n_pairs=6, seed=2)
    doc = reports.suite_payload(suite)
    assert doc["kind"] == "property_suite"
    assert set(doc["suites"]) == set(suite)
    assert doc["all_hold"] is True
    reports.dumps_json(doc)


@pytest.fixture(scope="module")
def tiny_census(metzler):
    fol = build_foliation(metzler, region=([-1.0, -1.0], [1.0, 1.0]),
                          resolution=(3, 8))
    budget = CensusBudget(t_max=30.0)
    rep = census.measure_estimate(metzler, fol, budget, refinements=(1, 2))
    return fol, rep


def test_census_payload(tiny_census):
    _, rep = tiny_census
    doc = reports.census_report_payload(rep, config={"run": {"seed": 0}})
    assert doc["kind"] == "census_report"
    assert doc["foliation"]["n_total_lines"] == 3
    assert doc["fubini"]["estimate"] == 0.0
    assert doc["monte_carlo"]["estimate"] == 0.0
    assert doc["estimators_agree"] is True
    assert len(doc["lines"]) == 3
    assert [r["factor"] for r in doc["refinement"]] == [1, 2]
    reports.dumps_json(doc)


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def test_census_csv_shape_and_content(tmp_path, tiny_census):
    fol, rep = tiny_census
    path = tmp_path / "grid.csv"
    n = reports.write_census_csv(str(path), fol, rep.censuses)
    assert n == 3 * 8
    raw = path.read_bytes()
    assert b"\r\n" in raw
    lines = raw.decode().strip().split("\r\n")
    assert lines[0] == ("line_index,point_index,x1,x2,class,"
                        "equilibrium_index,omega_residual")
    assert len(lines) == 1 + n
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "0"
    assert first[4] == "Convergent"
    assert first[5] == "0"
    float(first[6])  # residual column parses


def test_census_csv_is_deterministic(tmp_path, tiny_census):
    fol, rep = tiny_census
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    reports.write_census_csv(str(a), fol, rep.censuses)
    reports.write_census_csv(str(b), fol, rep.censuses)
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def test_render_dispatch(bistable, tiny_census):
    rep = dynamics.check_dp(bistable, [0.3, 0.2], t_grid=(0.5,), n_rays=8)
    text = reports.render_report(reports.dp_report_payload(rep))
    assert "DP-consistent:  True" in text

    v = order.compare(bistable, [0.1, 0.1], [0.5, 0.4])
    text = reports.render_report(
        reports.order_verdict_payload(v, [0.1, 0.1], [0.5, 0.4])
    )
    assert "StrictlyLess" in text

    est = limits.omega_estimate(bistable, [0.2, 0.2])
    text = reports.render_report(reports.omega_estimate_payload(est))
    assert "ConvergedTo" in text

    _, crep = tiny_census
    text = reports.render_report(reports.census_report_payload(crep))
    assert "Fubini estimate" in text and "Monte-Carlo" in text

    suite = limits.run_property_suite(bistable, n_pairs=5, seed=1)
    text = reports.render_report(reports.suite_payload(suite))
    assert "All hold: True" in text


def test_render_rejects_wrong_schema_or_kind():
    with pytest.raises(ArgumentError, match="schema version"):
        reports.render_report({"schema_version": "0.9", "kind": "dp_report"})
    with pytest.raises(ArgumentError, match="unknown report kind"):
        reports.render_report({"schema_version": "1.0", "kind": "mystery"})
