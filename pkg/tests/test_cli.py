"""End-to-end tests of the command-line interface.

Every invocation goes through ``cli.main(argv)`` in-process; artifacts land
in pytest tmp dirs.  Reproducibility tests compare serialized bytes (with
the timestamp line removed), not in-memory objects.
"""

import json

import pytest

from conalflow import cli


def run(*argv):
    return cli.main(list(argv))


def load_doc(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def strip_timestamp(text: str) -> str:
    return "\n".join(
        ln for ln in text.splitlines() if not ln.lstrip().startswith('"timestamp"')
    )


# ---------------------------------------------------------------------------
# order
# ---------------------------------------------------------------------------


def test_order_equal_points(tmp_path, capsys):
    code = run("order", "--system", "bistable_tanh",
               "--x", "0.5,0.5", "--y", "0.5,0.5", "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "(equal)" in out
    doc = load_doc(tmp_path / "order_bistable_tanh.json")
    assert doc["equal"] is True
    assert doc["kind"] == "order_verdict"


def test_order_strictly_less(tmp_path, capsys):
    code = run("order", "--system", "bistable_tanh",
               "--x", "0,0", "--y", "1,2", "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    assert "StrictlyLess" in capsys.readouterr().out


def test_order_requires_both_points(tmp_path, capsys):
    code = run("order", "--system", "bistable_tanh", "--x", "0,0",
               "--out", str(tmp_path))
    assert code == cli.EXIT_CONFIG_ERROR
    assert "configuration error" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# verify-dp
# ---------------------------------------------------------------------------


def test_verify_dp_passes_for_metzler(tmp_path, capsys):
    code = run("verify-dp", "--system", "linear_metzler",
               "--x0", "0.5,0.5", "--times", "0.1,1.0", "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    doc = load_doc(tmp_path / "verify_dp_linear_metzler.json")
    assert doc["verdict"] == "SDP-consistent"
    assert doc["config"]["system"]["builtin"] == "linear_metzler"


def test_verify_dp_fails_for_rotation(tmp_path, capsys):
    code = run("verify-dp", "--system", "rotation",
               "--x0", "0.5,0.0", "--times", "0.5,1.5707963",
               "--out", str(tmp_path))
    assert code == cli.EXIT_PROPERTY_FAILURE
    out = capsys.readouterr().out
    assert "violation witness" in out
    doc = load_doc(tmp_path / "verify_dp_rotation.json")
    assert doc["verdict"] == "Violated"


# ---------------------------------------------------------------------------
# omega
# ---------------------------------------------------------------------------


def test_omega_bistable(tmp_path, capsys):
    code = run("omega", "--system", "bistable_tanh", "--x", "0.1,0.1",
               "--budget-T", "50", "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    assert "ConvergedTo" in capsys.readouterr().out
    doc = load_doc(tmp_path / "omega_bistable_tanh.json")
    assert doc["class"] == "ConvergedTo"
    assert doc["config"]["census"]["budget_t"] == 50.0


def test_omega_requires_x(tmp_path, capsys):
    assert run("omega", "--system", "bistable_tanh",
               "--out", str(tmp_path)) == cli.EXIT_CONFIG_ERROR


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------


def test_suite_bistable_passes(tmp_path, capsys):
    code = run("suite", "--system", "bistable_tanh", "--pairs", "8",
               "--seed", "4", "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    assert "All hold: True" in capsys.readouterr().out
    doc = load_doc(tmp_path / "suite_bistable_tanh.json")
    assert doc["all_hold"] is True
    assert doc["config"]["run"]["seed"] == 4


def test_suite_rotation_fails(tmp_path, capsys):
    code = run("suite", "--system", "rotation", "--pairs", "5",
               "--out", str(tmp_path))
    assert code == cli.EXIT_PROPERTY_FAILURE
    doc = load_doc(tmp_path / "suite_rotation.json")
    assert doc["all_hold"] is False
    assert not doc["suites"]["monotone_flow"]["holds"]


# ---------------------------------------------------------------------------
# census
# ---------------------------------------------------------------------------


def test_census_small_grid(tmp_path, capsys):
    code = run("census", "--system", "linear_metzler",
               "--resolution", "3x8", "--budget-T", "30",
               "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "Fubini estimate: 0" in out
    doc = load_doc(tmp_path / "census_linear_metzler.json")
    assert doc["kind"] == "census_report"
    assert doc["foliation"]["n_total_lines"] == 3
    assert doc["foliation"]["n_points"] == 8
    assert doc["estimators_agree"] is True
    csv_lines = (tmp_path / "census_linear_metzler.csv").read_bytes().split(b"\r\n")
    assert len([ln for ln in csv_lines if ln]) == 1 + 3 * 8


def test_census_same_seed_reproduces_bytes(tmp_path):
    argv = ("census", "--system", "bistable_tanh", "--resolution", "3x10",
            "--budget-T", "50", "--seed", "9", "--out", str(tmp_path))
    assert run(*argv) == cli.EXIT_OK
    j1 = (tmp_path / "census_bistable_tanh.json").read_text()
    c1 = (tmp_path / "census_bistable_tanh.csv").read_bytes()
    assert run(*argv) == cli.EXIT_OK
    j2 = (tmp_path / "census_bistable_tanh.json").read_text()
    c2 = (tmp_path / "census_bistable_tanh.csv").read_bytes()
    assert strip_timestamp(j1) == strip_timestamp(j2)
    assert j1.count('"timestamp"') == 1
    assert c1 == c2


def test_census_threads_match_serial(tmp_path):
    serial, parallel = tmp_path / "s", tmp_path / "p"
    common = ("census", "--system", "linear_metzler", "--resolution", "4x6",
              "--budget-T", "30", "--seed", "2")
    assert run(*common, "--threads", "1", "--out", str(serial)) == cli.EXIT_OK
    assert run(*common, "--threads", "2", "--out", str(parallel)) == cli.EXIT_OK
    s_json = (serial / "census_linear_metzler.json").read_text()
    p_json = (parallel / "census_linear_metzler.json").read_text()
    # thread count and output dir are part of the embedded config;
    # everything else must match exactly
    s_doc, p_doc = json.loads(s_json), json.loads(p_json)
    for doc in (s_doc, p_doc):
        doc.pop("timestamp")
        doc["config"]["run"].pop("threads", None)
        doc["config"]["run"].pop("out", None)
    assert s_doc == p_doc
    assert (serial / "census_linear_metzler.csv").read_bytes() == (
        parallel / "census_linear_metzler.csv"
    ).read_bytes()


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def test_report_renders_artifact(tmp_path, capsys):
    run("omega", "--system", "bistable_tanh", "--x", "0.2,0.2",
        "--out", str(tmp_path))
    capsys.readouterr()
    code = run("report", "--input", str(tmp_path / "omega_bistable_tanh.json"))
    assert code == cli.EXIT_OK
    assert "ConvergedTo" in capsys.readouterr().out


def test_report_errors(tmp_path, capsys):
    assert run("report", "--input", str(tmp_path / "missing.json")) == \
        cli.EXIT_CONFIG_ERROR
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("report", "--input", str(bad)) == cli.EXIT_CONFIG_ERROR
    wrong = tmp_path / "wrong.json"
    wrong.write_text('{"schema_version": "9.9", "kind": "dp_report"}')
    assert run("report", "--input", str(wrong)) == cli.EXIT_PROPERTY_FAILURE
    assert "schema version mismatch" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# configuration errors and overrides
# ---------------------------------------------------------------------------


def test_missing_system_and_config(capsys):
    assert run("omega", "--x", "0,0") == cli.EXIT_CONFIG_ERROR
    assert "provide --config FILE or --system NAME" in capsys.readouterr().err


def test_unknown_builtin(capsys, tmp_path):
    assert run("omega", "--system", "wobbler", "--x", "0,0",
               "--out", str(tmp_path)) == cli.EXIT_CONFIG_ERROR
    assert "unknown builtin" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ("census", "--system", "rotation", "--resolution", "5by5"),
    ("census", "--system", "rotation", "--resolution", "0x5"),
    ("census", "--system", "rotation", "--threads", "0"),
    ("census", "--system", "rotation", "--budget-T", "-3"),
    ("order", "--system", "rotation", "--x", "1,oops", "--y", "0,0"),
])
def test_flag_validation(argv, capsys, tmp_path):
    assert run(*argv, "--out", str(tmp_path)) == cli.EXIT_CONFIG_ERROR


def test_config_file_with_cli_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        '[system]\nbuiltin = "linear_metzler"\n\n'
        "[census]\nlines = 2\npoints = 4\n\n[run]\nseed = 1\n"
    )
    out = tmp_path / "out"
    code = run("census", "--config", str(cfg), "--resolution", "3x6",
               "--seed", "7", "--budget-T", "25", "--out", str(out))
    assert code == cli.EXIT_OK
    doc = load_doc(out / "census_linear_metzler.json")
    assert doc["config"]["census"]["lines"] == 3
    assert doc["config"]["census"]["points"] == 6
    assert doc["config"]["census"]["budget_t"] == 25.0
    assert doc["config"]["run"]["seed"] == 7
    assert doc["foliation"]["n_total_lines"] == 3
    assert doc["budget"]["t_max"] == 25.0
