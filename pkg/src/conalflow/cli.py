"""Command-line interface.

Subcommands::

    conalflow verify-dp --system bistable_tanh --x0 0.2,0.1
    conalflow order     --system bistable_tanh --x 0,0 --y 1,2
    conalflow omega     --system bistable_tanh --x 0.1,0.1 --budget-T 50
    conalflow suite     --system bistable_tanh --pairs 100
    conalflow census    --config run.toml --resolution 101x201 --threads 4
    conalflow report    --input out/census.json

Exit codes: 0 all asserted properties pass; 1 a property failed; 2
configuration error; 3 numeric/integration error.  Every run requires a
seed (default 0) and embeds its fully-resolved config in the JSON artifact,
so identical config + seed reproduces identical bytes (timestamp aside).

Census lines are independent work items: with ``--threads N`` they are
classified in worker processes, each rebuilding the system from the config
(nothing closure-shaped crosses process boundaries), and merged by the
parent, which alone writes output files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from . import census as census_mod
from . import limits, reports
from .config import RunConfig, build_system, load_config
from .dynamics import check_dp, find_equilibria
from .errors import (
    ConalflowError,
    ConfigError,
    FoliationError,
    NumericError,
    StiffnessError,
)
from .order import compare

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",")], dtype=float)
    except ValueError:
        raise ConfigError(f"expected comma-separated floats, got {text!r}")


def _parse_resolution(text: str) -> tuple:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"--resolution must look like 101x201, got {text!r}")
    try:
        lines, points = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"--resolution must look like 101x201, got {text!r}")
    if lines < 1 or points < 1:
        raise ConfigError("--resolution values must be positive")
    return lines, points


def _effective_config(args) -> RunConfig:
    """Merge the config file (if any) with command-line overrides."""
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    elif getattr(args, "system", None):
        cfg = load_config({"system": {"builtin": args.system}})
    else:
        raise ConfigError("provide --config FILE or --system NAME")
    if getattr(args, "seed", None) is not None:
        cfg.run["seed"] = args.seed
    cfg.run.setdefault("seed", 0)
    if getattr(args, "out", None):
        cfg.run["out"] = args.out
    if getattr(args, "threads", None) is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg.run["threads"] = args.threads
    if getattr(args, "resolution", None):
        lines, points = _parse_resolution(args.resolution)
        cfg.census["lines"] = lines
        cfg.census["points"] = points
    if getattr(args, "budget_T", None) is not None:
        if args.budget_T <= 0:
            raise ConfigError("--budget-T must be positive")
        cfg.census["budget_t"] = args.budget_T
    return cfg.validate()


def _out_path(cfg: RunConfig, name: str) -> str:
    out = cfg.out_dir
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory {out!r}: {e}")
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out!r} is not writable")
    return os.path.join(out, name)


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_verify_dp(args) -> int:
    cfg = _effective_config(args)
    system = build_system(cfg)
    lo, hi = system.region_box()
    x0 = _parse_vector(args.x0) if args.x0 else 0.25 * (hi - lo) + lo
    t_grid = (
        [float(t) for t in args.times.split(",")] if args.times else None
    )
    report = check_dp(
        system, x0, t_grid=t_grid, seed=cfg.seed,
        options=cfg.integrator_options(),
    )
    payload = reports.dp_report_payload(report, cfg.to_dict())
    path = _out_path(cfg, f"verify_dp_{system.name}.json")
    reports.write_json(path, payload)
    print(reports.render_report(payload))
    print(f"wrote {path}")
    return EXIT_OK if report.dp_consistent else EXIT_PROPERTY_FAILURE


def _cmd_order(args) -> int:
    cfg = _effective_config(args)
    system = build_system(cfg)
    if not args.x or not args.y:
        raise ConfigError("order requires --x and --y")
    x = _parse_vector(args.x)
    y = _parse_vector(args.y)
    verdict = compare(system, x, y, cfg.search_budget())
    payload = reports.order_verdict_payload(verdict, x, y, cfg.to_dict())
    path = _out_path(cfg, f"order_{system.name}.json")
    reports.write_json(path, payload)
    print(reports.render_report(payload))
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_omega(args) -> int:
    cfg = _effective_config(args)
    system = build_system(cfg)
    if not args.x:
        raise ConfigError("omega requires --x")
    x = _parse_vector(args.x)
    est = limits.omega_estimate(system, x, cfg.omega_budget())
    payload = reports.omega_estimate_payload(est, cfg.to_dict())
    path = _out_path(cfg, f"omega_{system.name}.json")
    reports.write_json(path, payload)
    print(reports.render_report(payload))
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_suite(args) -> int:
    cfg = _effective_config(args)
    system = build_system(cfg)
    suite = limits.run_property_suite(
        system,
        n_pairs=args.pairs,
        seed=cfg.seed,
        dichotomy_budget=limits.OmegaBudget(
            t_max=float(cfg.census.get("budget_t", 50.0))
        ),
    )
    payload = reports.suite_payload(suite, cfg.to_dict())
    path = _out_path(cfg, f"suite_{system.name}.json")
    reports.write_json(path, payload)
    print(reports.render_report(payload))
    print(f"wrote {path}")
    ok = all(r.holds for r in suite.values())
    return EXIT_OK if ok else EXIT_PROPERTY_FAILURE


def _census_worker(cfg_dict: dict, resolution: tuple, line_ids: list, seed: int):
    """Classify a chunk of foliation lines in a worker process."""
    cfg = load_config(cfg_dict)
    system = build_system(cfg)
    foliation = census_mod.build_foliation(
        system, resolution=resolution, seed=seed
    )
    equilibria = find_equilibria(system)
    return census_mod.run_line_census(
        system, foliation, cfg.census_budget(), seed=seed,
        equilibria=equilibria, line_indices=line_ids,
    )


def _cmd_census(args) -> int:
    cfg = _effective_config(args)
    system = build_system(cfg)
    resolution = cfg.resolution
    seed = cfg.seed
    budget = cfg.census_budget()
    foliation = census_mod.build_foliation(system, resolution=resolution, seed=seed)
    equilibria = find_equilibria(system)

    threads = cfg.threads
    if threads > 1:
        ids = list(range(foliation.n_total_lines))
        chunks = [ids[i::threads] for i in range(threads)]
        chunks = [c for c in chunks if c]
        censuses = []
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_census_worker, cfg.to_dict(), resolution, c, seed)
                for c in chunks
            ]
            for fut in futures:
                censuses.extend(fut.result())
        censuses.sort(key=lambda c: c.line_index)
    else:
        censuses = census_mod.run_line_census(
            system, foliation, budget, seed=seed, equilibria=equilibria
        )

    report = census_mod.measure_estimate(
        system, foliation, budget, seed=seed,
        censuses=censuses, equilibria=equilibria,
    )
    payload = reports.census_report_payload(report, cfg.to_dict())
    json_path = _out_path(cfg, f"census_{system.name}.json")
    csv_path = _out_path(cfg, f"census_{system.name}.csv")
    reports.write_json(json_path, payload)
    n_rows = reports.write_census_csv(csv_path, foliation, censuses)
    print(reports.render_report(payload))
    print(f"wrote {json_path}")
    print(f"wrote {csv_path} ({n_rows} rows)")
    ok = report.estimators_agree and report.order_check_failures == 0
    return EXIT_OK if ok else EXIT_PROPERTY_FAILURE


def _cmd_report(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such report: {args.input}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed report JSON: {e}")
    print(reports.render_report(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--system", help="built-in system name (shortcut for --config)")
    p.add_argument("--seed", type=int, default=None, help="global RNG seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, default=None, help="worker processes")
    p.add_argument("--resolution", help="census grid, LINESxPOINTS (e.g. 101x201)")
    p.add_argument("--budget-T", type=float, default=None, dest="budget_T",
                   help="integration horizon for omega/census budgets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conalflow",
        description="Verification and census tools for differentially "
                    "positive flows with cone fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-dp", help="check differential positivity")
    _add_common(p)
    p.add_argument("--x0", help="base point, comma-separated")
    p.add_argument("--times", help="comma-separated t grid")
    p.set_defaults(fn=_cmd_verify_dp)

    p = sub.add_parser("order", help="decide the conal order of two points")
    _add_common(p)
    p.add_argument("--x", help="first point, comma-separated")
    p.add_argument("--y", help="second point, comma-separated")
    p.set_defaults(fn=_cmd_order)

    p = sub.add_parser("omega", help="estimate an omega-limit set")
    _add_common(p)
    p.add_argument("--x", help="initial point, comma-separated")
    p.set_defaults(fn=_cmd_omega)

    p = sub.add_parser("suite", help="run the order-theoretic property suites")
    _add_common(p)
    p.add_argument("--pairs", type=int, default=100, help="ordered pairs to sample")
    p.set_defaults(fn=_cmd_suite)

    p = sub.add_parser("census", help="ordered-line foliation census")
    _add_common(p)
    p.set_defaults(fn=_cmd_census)

    p = sub.add_parser("report", help="render a JSON report as text")
    p.add_argument("--input", required=True, help="path to a report JSON")
    p.set_defaults(fn=_cmd_report)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (NumericError, StiffnessError, FoliationError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC_ERROR
    except ConalflowError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PROPERTY_FAILURE


if __name__ == "__main__":
    sys.exit(main())
