"""Run configuration: TOML parsing, validation, and system construction.

A config file has up to five tables::

    [system]
    builtin = "bistable_tanh"          # or an inline definition:
    # dim = 2
    # f = ["-x + tanh(g*y)", "-y + tanh(g*x)"]
    # cone = "orthant"                 # orthant | halfspace | generators |
    #                                  # secondorder | psd
    # claims_dp = true
    # claims_sdp = true
    region = [[-2.0, -2.0], [2.0, 2.0]]

    [system.params]
    g = 2.0

    [integrator]
    rtol = 1e-9
    atol = 1e-12

    [order]
    target_radius = 1e-3
    max_steps = 100000

    [census]
    lines = 101
    points = 201
    budget_t = 50.0
    eps_conv = 1e-6

    [run]
    seed = 42
    out = "out"
    threads = 1

Everything has defaults except the system itself.  CLI flags override the
file; the effective, fully-resolved config is embedded in every JSON
report so a run can be reproduced from its artifact alone.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on older interpreters
    import tomli as tomllib

from . import cones, geometry
from .census import CensusBudget
from .dynamics import DeclaredProperties, SystemSpec, builtin_names, builtin_system
from .errors import ConfigError
from .expressions import ExpressionField
from .integrate import IntegratorOptions
from .limits import OmegaBudget
from .order import SearchBudget

__all__ = ["RunConfig", "load_config", "build_system", "DEFAULT_RESOLUTION"]

DEFAULT_RESOLUTION = (101, 201)


@dataclass
class RunConfig:
    """Validated, fully-resolved run configuration."""

    system: dict
    integrator: dict = dc_field(default_factory=dict)
    order: dict = dc_field(default_factory=dict)
    census: dict = dc_field(default_factory=dict)
    run: dict = dc_field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.run.get("seed", 0))

    @property
    def threads(self) -> int:
        return int(self.run.get("threads", 1))

    @property
    def out_dir(self) -> str:
        return str(self.run.get("out", "."))

    @property
    def resolution(self) -> tuple:
        return (
            int(self.census.get("lines", DEFAULT_RESOLUTION[0])),
            int(self.census.get("points", DEFAULT_RESOLUTION[1])),
        )

    def integrator_options(self) -> IntegratorOptions:
        allowed = {"rtol", "atol", "h0", "max_step", "max_steps", "escape_bound"}
        _check_keys(self.integrator, allowed, "integrator")
        return IntegratorOptions(**self.integrator)

    def search_budget(self) -> SearchBudget:
        allowed = {"target_radius", "step", "max_steps"}
        _check_keys(self.order, allowed, "order")
        return SearchBudget(**self.order)

    def census_budget(self) -> CensusBudget:
        kw = {}
        for key in ("t_max", "eps_conv", "check_interval", "recheck_undecided",
                    "batch_size", "rtol", "atol", "escape_bound"):
            if key in self.census:
                kw[key] = self.census[key]
        if "budget_t" in self.census:
            kw["t_max"] = float(self.census["budget_t"])
        return CensusBudget(**kw)

    def omega_budget(self) -> OmegaBudget:
        t = float(self.census.get("budget_t", self.census.get("t_max", 200.0)))
        eps = float(self.census.get("eps_conv", 1e-6))
        return OmegaBudget(t_max=t, eps_conv=eps)

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "integrator": self.integrator,
            "order": self.order,
            "census": self.census,
            "run": self.run,
        }

    def validate(self) -> "RunConfig":
        for table in ("integrator", "order", "census"):
            for k, v in getattr(self, table).items():
                if isinstance(v, (int, float)) and not isinstance(v, bool):
                    if k in ("rtol", "atol", "eps_conv", "target_radius",
                             "budget_t", "t_max", "check_interval") and v <= 0:
                        raise ConfigError(f"{table}.{k} must be positive, got {v}")
        lines, points = self.resolution
        if lines < 1 or points < 1:
            raise ConfigError(f"census resolution {lines}x{points} must be positive")
        region = self.system.get("region")
        if region is not None:
            lo, hi = _parse_region(region)
            if np.any(hi <= lo):
                raise ConfigError("system.region is degenerate")
        return self


def _check_keys(table: dict, allowed: set, name: str):
    extra = set(table) - allowed
    if extra:
        raise ConfigError(f"unknown {name} option(s): {sorted(extra)}")


def _parse_region(region):
    try:
        lo = np.asarray(region[0], dtype=float)
        hi = np.asarray(region[1], dtype=float)
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"region must be [[lo...], [hi...]], got {region!r}")
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ConfigError("region lo/hi must be equal-length vectors")
    return lo, hi


def load_config(path_or_dict) -> RunConfig:
    """Load and validate a RunConfig from a TOML file path or a dict."""
    if isinstance(path_or_dict, dict):
        raw = path_or_dict
    else:
        try:
            with open(path_or_dict, "rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path_or_dict}")
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"malformed config: {e}")
    known = {"system", "integrator", "order", "census", "run"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config table(s): {sorted(extra)}")
    if "system" not in raw:
        raise ConfigError("config needs a [system] table")
    cfg = RunConfig(
        system=dict(raw["system"]),
        integrator=dict(raw.get("integrator", {})),
        order=dict(raw.get("order", {})),
        census=dict(raw.get("census", {})),
        run=dict(raw.get("run", {})),
    )
    return cfg.validate()


def _build_cone_field(manifold, sys_table: dict):
    variant = sys_table.get("cone", "orthant")
    dim = manifold.dim
    if variant == "orthant":
        cone = cones.orthant(dim)
    elif variant == "halfspace":
        normals = np.asarray(sys_table.get("cone_normals", []), dtype=float)
        if normals.size == 0:
            raise ConfigError("halfspace cone needs cone_normals")
        cone = cones.halfspace_cone(normals)
    elif variant == "generators":
        gens = np.asarray(sys_table.get("cone_generators", []), dtype=float)
        if gens.size == 0:
            raise ConfigError("generators cone needs cone_generators")
        cone = cones.generator_cone(gens)
    elif variant == "secondorder":
        axis = np.asarray(sys_table.get("cone_axis", [1.0] + [0.0] * (dim - 1)))
        aperture = float(sys_table.get("cone_aperture", np.pi / 4))
        cone = cones.second_order_cone(axis, aperture)
    elif variant == "psd":
        raise ConfigError("psd cone fields require an SPD builtin system")
    else:
        raise ConfigError(f"unknown cone variant {variant!r}")
    if cone.dim != dim:
        raise ConfigError(f"cone dim {cone.dim} != system dim {dim}")
    return cones.constant_field(manifold, cone)


def build_system(cfg: RunConfig) -> SystemSpec:
    """Construct the SystemSpec a config describes (builtin or inline)."""
    sys_table = cfg.system
    params = dict(sys_table.get("params", {}))
    if "builtin" in sys_table:
        name = sys_table["builtin"]
        if name not in builtin_names():
            raise ConfigError(
                f"unknown builtin system {name!r}; available: {builtin_names()}"
            )
        system = builtin_system(name, **params)
        if "region" in sys_table:
            lo, hi = _parse_region(sys_table["region"])
            system = system.with_region((lo, hi))
        return system

    if "f" not in sys_table:
        raise ConfigError("system needs either builtin = \"name\" or inline f = [...]")
    exprs = sys_table["f"]
    if not isinstance(exprs, (list, tuple)) or not exprs:
        raise ConfigError("system.f must be a non-empty list of expressions")
    dim = int(sys_table.get("dim", len(exprs)))
    if dim != len(exprs):
        raise ConfigError(f"system.dim = {dim} but f has {len(exprs)} components")
    fld = ExpressionField(exprs, dim, params)
    manifold = geometry.euclidean(dim)
    cone_field = _build_cone_field(manifold, sys_table)
    if "region" in sys_table:
        region = tuple(_parse_region(sys_table["region"]))
    else:
        region = (np.full(dim, -2.0), np.full(dim, 2.0))
    name = sys_table.get("name", "inline")
    return SystemSpec(
        name=str(name),
        manifold=manifold,
        cone_field=cone_field,
        f=fld,
        jac=fld.jacobian,
        region=region,
        declared=DeclaredProperties(
            claims_dp=bool(sys_table.get("claims_dp", False)),
            claims_sdp=bool(sys_table.get("claims_sdp", False)),
        ),
        params=params,
    )
