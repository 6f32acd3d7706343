"""Machine-readable report artifacts: JSON documents and CSV grids.

JSON is emitted by a small deterministic serializer rather than the stdlib
encoder so floats can be written with 17 significant digits (round-trip
exact) and byte-identical output is guaranteed for identical inputs --
reproducibility is asserted on the serialized artifact, not on in-memory
objects.  Every document carries ``schema_version``, ``kind`` and a
``timestamp`` (the one field excluded from reproducibility comparisons).

CSV grids follow RFC 4180: CRLF line endings, a header row, quoting only
where needed.
"""

from __future__ import annotations

import csv
import datetime
import json
import os
from typing import Optional

import numpy as np

from .census import CLASS_CONVERGENT, CLASS_NAMES, CensusReport, FoliationSpec
from .dynamics import DPReport
from .errors import ArgumentError
from .limits import OmegaEstimate, PropertyReport
from .order import OrderVerdict

__all__ = [
    "SCHEMA_VERSION",
    "dumps_json",
    "write_json",
    "jsonable",
    "dp_report_payload",
    "order_verdict_payload",
    "omega_estimate_payload",
    "suite_payload",
    "census_report_payload",
    "write_census_csv",
    "render_report",
]

SCHEMA_VERSION = "1.0"


def _format_float(v: float) -> str:
    if not np.isfinite(v):
        raise ArgumentError("non-finite float reached the JSON serializer")
    return "%.17g" % v


def _emit(obj, out, indent: int):
    pad = "  " * indent
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append("  " * (indent + 1))
            out.append(json.dumps(str(k), ensure_ascii=False))
            out.append(": ")
            _emit(v, out, indent + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append("  " * (indent + 1))
            _emit(v, out, indent + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise ArgumentError(f"cannot serialize {type(obj).__name__} to JSON")


def dumps_json(payload: dict) -> str:
    out: list = []
    _emit(payload, out, 0)
    out.append("\n")
    return "".join(out)


def jsonable(obj):
    """Recursively convert numpy containers/scalars to plain Python.

    Non-finite floats become None (JSON has no representation for them;
    reports treat them as "not available").
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _document(kind: str, body: dict, config: Optional[dict] = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    if config is not None:
        doc["config"] = jsonable(config)
    doc.update(jsonable(body))
    return doc


def write_json(path: str, payload: dict) -> None:
    text = dumps_json(payload)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# payload builders
# ---------------------------------------------------------------------------


def dp_report_payload(report: DPReport, config: Optional[dict] = None) -> dict:
    return _document("dp_report", {
        "system": report.system,
        "verdict": report.verdict,
        "dp_consistent": report.dp_consistent,
        "sdp_consistent": report.sdp_consistent,
        "min_margin": report.min_margin,
        "min_boundary_image_margin": report.min_boundary_image_margin,
        "t_grid": list(report.t_grid),
        "n_rays": report.n_rays,
        "witness": None if report.witness is None else {
            "t": report.witness[0],
            "ray": report.witness[1],
            "image_margin": report.witness[2],
        },
    }, config)


def order_verdict_payload(verdict: OrderVerdict, x, y,
                          config: Optional[dict] = None) -> dict:
    return _document("order_verdict", {
        "x": np.asarray(x, dtype=float),
        "y": np.asarray(y, dtype=float),
        "relation": verdict.relation,
        "oracle_used": verdict.oracle_used,
        "equal": verdict.equal,
        "margin": verdict.margin,
        "reason": verdict.reason,
        "curve": None if verdict.witness is None else {
            "reached": verdict.witness.reached,
            "n_nodes": len(verdict.witness.nodes),
            "min_margin": verdict.witness.min_margin,
            "final_gap": verdict.witness.final_gap,
        },
    }, config)


def omega_estimate_payload(est: OmegaEstimate,
                           config: Optional[dict] = None) -> dict:
    return _document("omega_estimate", {
        "x0": est.x0,
        "class": est.kind,
        "budget_used": est.budget_used,
        "residual": est.residual,
        "equilibrium": None if est.equilibrium is None else {
            "coords": est.equilibrium.coords,
            "classification": est.equilibrium.classification,
            "eigenvalues_real": est.equilibrium.eigenvalues.real,
        },
        "period": est.period,
        "n_samples": len(est.omega_samples),
        "sample_resolution": est.resolution,
        "omega_samples": est.omega_samples,
        "notes": est.notes,
    }, config)


def _property_report_dict(r: PropertyReport) -> dict:
    return {
        "name": r.name,
        "n_tested": r.n_tested,
        "n_passed": r.n_passed,
        "n_failed": r.n_failed,
        "n_undecided": r.n_undecided,
        "holds": r.holds,
        "details": jsonable(_plain(r.details)),
    }


def _plain(obj):
    """Strip non-serializable values (verdict objects etc.) from details."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (str, bool, int, float, np.ndarray, np.generic)) or obj is None:
        return obj
    return str(obj)


def suite_payload(reports: dict, config: Optional[dict] = None) -> dict:
    body = {
        "suites": {k: _property_report_dict(v) for k, v in reports.items()},
        "all_hold": all(v.holds for v in reports.values()),
    }
    return _document("property_suite", body, config)


def census_report_payload(report: CensusReport,
                          config: Optional[dict] = None) -> dict:
    fol = report.foliation
    body = {
        "system": report.system_name,
        "foliation": {
            "region_lo": fol.region[0],
            "region_hi": fol.region[1],
            "base_point": fol.base_point,
            "direction": fol.v,
            "direction_margin": fol.v_margin,
            "complement": fol.complement,
            "n_lines": fol.n_lines,
            "n_points": fol.n_points,
            "n_total_lines": fol.n_total_lines,
            "line_extent": fol.line_extent,
            "n_shrinks": fol.n_shrinks,
        },
        "budget": {
            "t_max": report.budget.t_max,
            "eps_conv": report.budget.eps_conv,
            "recheck_undecided": report.budget.recheck_undecided,
        },
        "region_volume": report.region_volume,
        "nonconvergent_fraction": report.nonconvergent_fraction,
        "undecided_fraction": report.undecided_fraction,
        "fubini": {
            "estimate": report.fubini_estimate,
            "upper_bound": report.fubini_upper,
            "sigma": report.fubini_sigma,
        },
        "monte_carlo": {
            "estimate": report.mc_estimate,
            "upper_bound": report.mc_upper,
            "sigma": report.mc_sigma,
            "n_samples": report.mc_n,
        },
        "estimators_agree": report.estimators_agree,
        "agreement_gap": report.agreement_gap,
        "refinement": report.refinement,
        "basin_fractions": {str(k): v for k, v in report.basin_fractions.items()},
        "equilibria": [
            {
                "coords": e.coords,
                "classification": e.classification,
                "f_norm": e.f_norm,
            }
            for e in report.equilibria
        ],
        "cluster_counts": report.cluster_counts,
        "order_checks": {
            "n_checked": sum(c.order_pairs_checked for c in report.censuses),
            "n_failed": report.order_check_failures,
            "n_undecided": sum(c.order_pairs_undecided for c in report.censuses),
        },
        "lines": [
            {
                "line_index": c.line_index,
                "offset": c.offset,
                "chord": list(c.chord),
                "cluster_count": c.cluster_count,
                "mu_y": c.mu_y,
                "mu_y_upper": c.mu_y_upper,
                "n_undecided": c.n_undecided,
                "n_nonconvergent": c.n_nonconvergent,
            }
            for c in report.censuses
        ],
    }
    return _document("census_report", body, config)


def write_census_csv(path: str, foliation: FoliationSpec, censuses: list) -> int:
    """Write the per-sample census grid; returns the number of data rows.

    Columns: line_index, point_index, one column per chart coordinate,
    class, equilibrium_index (empty when not Convergent), omega_residual.
    """
    dim = foliation.dim
    header = (
        ["line_index", "point_index"]
        + [f"x{i+1}" for i in range(dim)]
        + ["class", "equilibrium_index", "omega_residual"]
    )
    n_rows = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for c in sorted(censuses, key=lambda c: c.line_index):
            _, pts = foliation.line_samples(c.line_index, len(c.s_values))
            for i in range(len(c.s_values)):
                eq = (
                    str(int(c.eq_index[i]))
                    if c.codes[i] == CLASS_CONVERGENT and c.eq_index[i] >= 0
                    else ""
                )
                w.writerow(
                    [c.line_index, i]
                    + [_format_float(float(v)) for v in pts[i]]
                    + [CLASS_NAMES[int(c.codes[i])], eq,
                       _format_float(float(c.residuals[i]))]
                )
                n_rows += 1
    return n_rows


# ---------------------------------------------------------------------------
# human-readable rendering
# ---------------------------------------------------------------------------


def _render_dp(doc: dict) -> str:
    lines = [
        f"Differential positivity report for {doc['system']}",
        f"  DP-consistent:  {doc['dp_consistent']}",
        f"  SDP-consistent: {doc['sdp_consistent']}",
        f"  min margin:     {doc['min_margin']:.3e}",
        f"  t grid:         {doc['t_grid']}",
    ]
    if doc.get("witness"):
        w = doc["witness"]
        lines.append(
            f"  violation witness: t={w['t']:g}, image margin {w['image_margin']:.3e}"
        )
        lines.append(f"    ray: {w['ray']}")
    return "\n".join(lines)


def _render_order(doc: dict) -> str:
    eq = " (equal)" if doc.get("equal") else ""
    lines = [
        f"Order verdict: {doc['relation']}{eq}  [oracle: {doc['oracle_used']}]",
        f"  x: {doc['x']}",
        f"  y: {doc['y']}",
    ]
    if doc.get("margin") is not None:
        lines.append(f"  margin: {doc['margin']:.6g}")
    if doc.get("reason"):
        lines.append(f"  reason: {doc['reason']}")
    return "\n".join(lines)


def _render_omega(doc: dict) -> str:
    lines = [
        f"Omega-limit estimate: {doc['class']}",
        f"  x0: {doc['x0']}",
        f"  budget used: {doc['budget_used']:g}   residual: {doc['residual']:.3e}",
    ]
    if doc.get("equilibrium"):
        e = doc["equilibrium"]
        lines.append(f"  equilibrium: {e['coords']} ({e['classification']})")
    if doc.get("period") is not None:
        lines.append(f"  period: {doc['period']:.6g}")
    return "\n".join(lines)


def _render_suite(doc: dict) -> str:
    lines = ["Property suites:"]
    for name, r in doc["suites"].items():
        mark = "ok" if r["holds"] else "FAIL"
        lines.append(
            f"  [{mark}] {name}: {r['n_passed']}/{r['n_tested']} pass, "
            f"{r['n_failed']} fail, {r['n_undecided']} undecided"
        )
    lines.append(f"All hold: {doc['all_hold']}")
    return "\n".join(lines)


def _render_census(doc: dict) -> str:
    f = doc["fubini"]
    m = doc["monte_carlo"]
    lines = [
        f"Census report for {doc['system']}",
        f"  grid: {doc['foliation']['n_total_lines']} lines x "
        f"{doc['foliation']['n_points']} points, "
        f"region volume {doc['region_volume']:g}",
        f"  non-convergent fraction: {doc['nonconvergent_fraction']:.3e} "
        f"(undecided {doc['undecided_fraction']:.3e})",
        f"  Fubini estimate: {f['estimate']:.6g} "
        f"(upper {f['upper_bound']:.6g}, sigma {f['sigma']:.3g})",
        f"  Monte-Carlo:     {m['estimate']:.6g} "
        f"(upper {m['upper_bound']:.6g}, sigma {m['sigma']:.3g}, N={m['n_samples']})",
        f"  estimators agree (3 sigma): {doc['estimators_agree']}",
        "  refinement series:",
    ]
    for r in doc["refinement"]:
        lines.append(
            f"    {r['factor']}x ({r['n_points']} pts/line): fraction "
            f"{r['nonconvergent_fraction']:.3e}, max clusters {r['max_cluster_count']}"
        )
    counts = doc["cluster_counts"]
    lines.append(
        f"  cluster counts: min {min(counts)}, max {max(counts)} over {len(counts)} lines"
    )
    oc = doc["order_checks"]
    lines.append(
        f"  ordered-line checks: {oc['n_checked']} pairs, {oc['n_failed']} failed"
    )
    return "\n".join(lines)


_RENDERERS = {
    "dp_report": _render_dp,
    "order_verdict": _render_order,
    "omega_estimate": _render_omega,
    "property_suite": _render_suite,
    "census_report": _render_census,
}


def render_report(doc: dict) -> str:
    """Render a previously written JSON document as human-readable text."""
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ArgumentError(
            f"schema version mismatch: document has {version!r}, "
            f"this build reads {SCHEMA_VERSION!r}"
        )
    kind = doc.get("kind")
    if kind not in _RENDERERS:
        raise ArgumentError(f"unknown report kind {kind!r}")
    return _RENDERERS[kind](doc)
