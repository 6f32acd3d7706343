"""Dynamical systems on conal manifolds: flows, linearizations, positivity checks.

A :class:`SystemSpec` bundles an autonomous chart vector field with the
manifold it lives on, the cone field of interest, a region of study, and the
author's declared positivity properties.  Vector fields are written to
broadcast over a leading batch axis (``y`` of shape ``(..., dim)``), which
lets the ensemble integrator drive thousands of trajectories at once.

The module provides:

* :func:`flow` / :func:`variational_flow` -- trajectories and the
  linearization J(t) = d(phi_t)/dx0 obtained by integrating the variational
  equation J' = Df(phi_t(x)) J alongside the state.
* :func:`check_dp` -- sampling verdict on differential positivity: does the
  linearized flow map the cone at x0 into the cone along the trajectory, and
  strictly into the interior for t > 0 (strong differential positivity)?
* :func:`cocycle_check` -- consistency of the linearization with the flow
  property phi_{t+s} = phi_s . phi_t.
* :func:`find_equilibria` -- damped-Newton equilibrium search with
  eigenvalue classification.
* :func:`builtin_system` -- the library of reference systems used by the
  test-suite, demos and CLI.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import cones, geometry
from .cones import ConeFieldSpec
from .errors import ArgumentError
from .geometry import ManifoldSpec, Point
from .integrate import IntegratorOptions, OdeResult, integrate_adaptive

__all__ = [
    "DeclaredProperties",
    "SystemSpec",
    "Trajectory",
    "FlowLinearization",
    "DPReport",
    "Equilibrium",
    "EquilibriumSet",
    "flow",
    "variational_flow",
    "check_dp",
    "cocycle_check",
    "numerical_jacobian",
    "find_equilibria",
    "builtin_system",
    "builtin_names",
]


@dataclass(frozen=True)
class DeclaredProperties:
    """Positivity properties the system's author claims (to be verified)."""

    claims_dp: bool = False
    claims_sdp: bool = False
    notes: str = ""


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """An autonomous vector field on a manifold with an attached cone field.

    Attributes
    ----------
    f : callable
        Chart vector field, broadcastable: (..., dim) -> (..., dim).
    jac : callable, optional
        Analytic Jacobian at a single point, (dim,) -> (dim, dim).  When
        omitted a central finite difference is used.
    region : (lo, hi)
        Default box of study in chart coordinates.
    """

    name: str
    manifold: ManifoldSpec
    cone_field: ConeFieldSpec
    f: Callable[[np.ndarray], np.ndarray]
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    region: Optional[tuple] = None
    declared: DeclaredProperties = DeclaredProperties()
    params: dict = field(default_factory=dict)

    def region_box(self) -> tuple:
        if self.region is not None:
            lo, hi = self.region
            return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        d = self.manifold.dim
        return -np.ones(d), np.ones(d)

    def with_region(self, region: tuple) -> "SystemSpec":
        return replace(self, region=region)


def _as_coords(system: SystemSpec, x) -> np.ndarray:
    if isinstance(x, Point):
        if x.manifold != system.manifold:
            raise ArgumentError("point manifold does not match system manifold")
        return np.asarray(x.coords, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != (system.manifold.dim,):
        raise ArgumentError("coords do not match system dimension")
    return x


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled solution curve in chart coordinates with diagnostics."""

    system: SystemSpec
    times: np.ndarray
    coords: np.ndarray  # (N, dim)
    diagnostics: object
    escaped: bool = False
    escape_time: Optional[float] = None

    @property
    def endpoint(self) -> Point:
        return Point(self.system.manifold, self.coords[-1])

    def point(self, i: int) -> Point:
        return Point(self.system.manifold, self.coords[i])

    @property
    def points(self) -> list:
        return [Point(self.system.manifold, c) for c in self.coords]

    def max_defect(self) -> float:
        """max_k | (y_{k+1}-y_k)/dt - f(midpoint) |_2 over recorded steps.

        For densely sampled output this measures how well the discrete
        samples satisfy the differential equation; it scales like h^2/24
        times the third derivative, so it is only a tight certificate when
        the recording step is small.
        """
        if len(self.times) < 2:
            return 0.0
        dt = np.diff(self.times)[:, None]
        sec = (self.coords[1:] - self.coords[:-1]) / dt
        mids = 0.5 * (self.coords[1:] + self.coords[:-1])
        fm = self.system.f(mids)
        return float(np.max(np.linalg.norm(sec - fm, axis=1)))


def flow(
    system: SystemSpec,
    x0,
    t_final: float,
    options: IntegratorOptions = IntegratorOptions(),
    t_eval=None,
) -> Trajectory:
    """Integrate the system from x0 to time t_final (negative runs backward)."""
    y0 = _as_coords(system, x0)
    res = integrate_adaptive(
        lambda t, y: system.f(y), y0, (0.0, float(t_final)), options, t_eval=t_eval
    )
    return Trajectory(
        system=system, times=res.ts, coords=res.ys, diagnostics=res.diagnostics,
        escaped=res.escaped, escape_time=res.escape_time,
    )


# ---------------------------------------------------------------------------
# linearization
# ---------------------------------------------------------------------------


def numerical_jacobian(f: Callable, y: np.ndarray, rel_h: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of a broadcastable field."""
    y = np.asarray(y, dtype=float)
    d = y.size
    h = rel_h * (1.0 + np.abs(y))
    pts = np.repeat(y[None, :], 2 * d, axis=0)
    for j in range(d):
        pts[2 * j, j] += h[j]
        pts[2 * j + 1, j] -= h[j]
    vals = f(pts)
    cols = [(vals[2 * j] - vals[2 * j + 1]) / (2 * h[j]) for j in range(d)]
    return np.column_stack(cols)


def _system_jacobian(system: SystemSpec, y: np.ndarray) -> np.ndarray:
    if system.jac is not None:
        return np.asarray(system.jac(y), dtype=float)
    return numerical_jacobian(system.f, y)


@dataclass
class FlowLinearization:
    """J(t_k) = d phi_{t_k} / d x0 along one trajectory."""

    system: SystemSpec
    x0: np.ndarray
    times: np.ndarray
    states: np.ndarray      # (N, dim)
    jacobians: np.ndarray   # (N, dim, dim)
    diagnostics: object

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ArgumentError(f"time {t} not on the recorded grid")
        return self.jacobians[i]


def variational_flow(
    system: SystemSpec,
    x0,
    t_grid,
    options: IntegratorOptions = IntegratorOptions(),
) -> FlowLinearization:
    """Jointly integrate x' = f(x), J' = Df(x) J with J(0) = I.

    ``t_grid`` lists the output times (all of one sign; 0 is implicit).
    """
    y0 = _as_coords(system, x0)
    d = y0.size
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t_grid.size == 0:
        raise ArgumentError("t_grid must be nonempty")

    def rhs(t, z):
        y = z[:d]
        j = z[d:].reshape(d, d)
        dy = system.f(y)
        dj = _system_jacobian(system, y) @ j
        return np.concatenate([dy, dj.ravel()])

    z0 = np.concatenate([y0, np.eye(d).ravel()])
    grid = t_grid[np.argsort(np.abs(t_grid))]
    res = integrate_adaptive(
        rhs, z0, (0.0, float(grid[-1])), options, t_eval=grid
    )
    states = res.ys[:, :d]
    jacs = res.ys[:, d:].reshape(-1, d, d)
    return FlowLinearization(
        system=system, x0=y0, times=res.ts, states=states,
        jacobians=jacs, diagnostics=res.diagnostics,
    )


def cocycle_check(
    system: SystemSpec,
    x0,
    t: float,
    s: float,
    options: IntegratorOptions = IntegratorOptions(),
) -> float:
    """Frobenius residual of J_{t+s}(x0) - J_s(phi_t(x0)) J_t(x0).

    Near-zero residuals certify that the computed linearization respects the
    flow's cocycle (chain-rule) structure.
    """
    lin1 = variational_flow(system, x0, [t, t + s], options)
    j_t = lin1.at(t)
    j_ts = lin1.at(t + s)
    x_t = lin1.states[int(np.argmin(np.abs(lin1.times - t)))]
    lin2 = variational_flow(system, x_t, [s], options)
    j_s = lin2.at(s)
    return float(np.linalg.norm(j_ts - j_s @ j_t, ord="fro"))


# ---------------------------------------------------------------------------
# differential positivity check
# ---------------------------------------------------------------------------


@dataclass
class DPReport:
    """Sampled verdict on (strong) differential positivity at one base point.

    ``dp_consistent``: no sampled cone direction was carried strictly outside
    the cone along the trajectory.  ``sdp_consistent``: additionally every
    sampled direction (boundary rays included) lands strictly inside the
    interior for all positive grid times.  ``witness`` holds the worst
    violating sample (t, ray, image margin) when there is one.
    """

    system: str
    x0: np.ndarray
    t_grid: np.ndarray
    n_rays: int
    dp_consistent: bool
    sdp_consistent: bool
    min_margin: float
    min_boundary_image_margin: float
    witness: Optional[tuple]
    margins: np.ndarray  # (n_times, n_rays)

    @property
    def verdict(self) -> str:
        if not self.dp_consistent:
            return "Violated"
        return "SDP-consistent" if self.sdp_consistent else "DP-consistent"

    def __str__(self):
        verdict = (
            "strongly differentially positive" if self.sdp_consistent
            else "differentially positive" if self.dp_consistent
            else "NOT differentially positive"
        )
        return (
            f"DPReport({self.system} at {np.round(self.x0, 4)}: {verdict}, "
            f"min margin {self.min_margin:.3e})"
        )


def check_dp(
    system: SystemSpec,
    x0,
    t_grid=None,
    n_rays: int = 32,
    n_interior: int = 8,
    seed: int = 0,
    dp_tol: float = 1e-7,
    strict_tol: float = 1e-9,
    options: IntegratorOptions = IntegratorOptions(),
) -> DPReport:
    """Sample cone directions at x0 and test their images under d(phi_t).

    Directions are boundary rays of the cone at x0 (extreme rays first for
    polyhedral cones) plus a few strictly interior ones.  For each positive
    time in ``t_grid`` the image margin in the cone at phi_t(x0) is recorded.

    * A margin below ``-dp_tol`` anywhere refutes differential positivity
      (the witness records where).
    * Strong differential positivity additionally requires every image
      margin at t > 0 to exceed ``strict_tol``.

    The verdict is a sampled certificate, not a proof: `dp_consistent`
    means "no violation found at this resolution".
    """
    y0 = _as_coords(system, x0)
    if t_grid is None:
        t_grid = np.array([0.25, 0.5, 1.0, 2.0])
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t_grid <= 0):
        raise ArgumentError("t_grid times must be positive")

    fld = system.cone_field
    rays = list(cones.field_boundary_rays(fld, y0, n_rays, seed=seed))
    n_boundary = len(rays)
    interior = cones.field_interior_direction(fld, y0)
    rays.append(interior)
    rng = np.random.default_rng(seed + 1)
    for _ in range(max(n_interior - 1, 0)):
        w = cones.field_project(fld, y0, rng.standard_normal(y0.size))
        nl = np.linalg.norm(w)
        # blend toward the interior direction so samples are strictly inside
        v = 0.5 * interior + (0.5 * w / nl if nl > 1e-12 else 0.0)
        rays.append(v / np.linalg.norm(v))
    rays = np.array(rays)

    lin = variational_flow(system, y0, t_grid, options)
    margins = np.empty((len(lin.times), len(rays)))
    for i, (t, x_t) in enumerate(zip(lin.times, lin.states)):
        j = lin.jacobians[i]
        images = rays @ j.T
        for r, img in enumerate(images):
            margins[i, r] = cones.field_margin(fld, x_t, img)

    min_margin = float(margins.min())
    min_boundary = float(margins[:, :n_boundary].min()) if n_boundary else np.inf
    dp_ok = min_margin >= -dp_tol
    sdp_ok = dp_ok and min_margin > strict_tol
    witness = None
    if not dp_ok or not sdp_ok:
        i, r = np.unravel_index(np.argmin(margins), margins.shape)
        witness = (float(lin.times[i]), rays[r].copy(), float(margins[i, r]))
    return DPReport(
        system=system.name,
        x0=y0,
        t_grid=t_grid,
        n_rays=len(rays),
        dp_consistent=dp_ok,
        sdp_consistent=sdp_ok,
        min_margin=min_margin,
        min_boundary_image_margin=min_boundary,
        witness=witness,
        margins=margins,
    )


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------


@dataclass
class Equilibrium:
    point: Point
    f_norm: float
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    classification: str  # stable | unstable | saddle | center | nonhyperbolic

    @property
    def coords(self) -> np.ndarray:
        return self.point.coords


@dataclass
class EquilibriumSet:
    equilibria: list
    n_seeds: int
    n_converged: int

    def __len__(self):
        return len(self.equilibria)

    def __iter__(self):
        return iter(self.equilibria)

    def __getitem__(self, i):
        return self.equilibria[i]

    def nearest(self, coords) -> tuple:
        """(index, distance) of the nearest equilibrium, or (-1, inf)."""
        coords = np.asarray(coords, dtype=float)
        if not self.equilibria:
            return -1, np.inf
        dists = [np.linalg.norm(e.coords - coords) for e in self.equilibria]
        i = int(np.argmin(dists))
        return i, float(dists[i])


def _classify_eigenvalues(eigs: np.ndarray, tol: float) -> str:
    re = eigs.real
    if np.all(np.abs(re) <= tol):
        return "center" if np.any(np.abs(eigs.imag) > tol) else "nonhyperbolic"
    if np.any(np.abs(re) <= tol):
        return "nonhyperbolic"
    if np.all(re < 0):
        return "stable"
    if np.all(re > 0):
        return "unstable"
    return "saddle"


def newton_refine(
    system: SystemSpec, x0, tol: float = 1e-12, max_iter: int = 60
) -> Optional[np.ndarray]:
    """Damped Newton iteration on f(x) = 0; None if it fails to converge."""
    x = _as_coords(system, x0).copy()
    fx = system.f(x)
    for _ in range(max_iter):
        nf = np.linalg.norm(fx)
        if nf < tol:
            return x
        j = _system_jacobian(system, x)
        try:
            step = np.linalg.solve(j, -fx)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        for _ in range(30):
            x_new = x + lam * step
            f_new = system.f(x_new)
            if np.linalg.norm(f_new) < (1.0 - 0.5 * lam) * nf + tol:
                x, fx = x_new, f_new
                break
            lam *= 0.5
        else:
            return None
    return x if np.linalg.norm(system.f(x)) < max(tol, 1e-10) else None


def find_equilibria(
    system: SystemSpec,
    region: Optional[tuple] = None,
    n_seeds: int = 200,
    seed: int = 0,
    merge_radius: Optional[float] = None,
    eig_tol: float = 1e-8,
) -> EquilibriumSet:
    """Multi-start damped Newton search for equilibria in a box region.

    Every returned equilibrium satisfies |f(e)| < 1e-10.  Roots closer than
    ``merge_radius`` (default 1e-5 times the box diagonal) are merged; roots
    that leave twice the box are discarded.  Classification compares
    Jacobian eigenvalue real parts against ``eig_tol`` scaled by the
    spectral radius.
    """
    lo, hi = region if region is not None else system.region_box()
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    diag = float(np.linalg.norm(hi - lo))
    if merge_radius is None:
        merge_radius = 1e-5 * max(diag, 1.0)
    rng = np.random.default_rng(seed)
    seeds = [0.5 * (lo + hi)]
    seeds.extend(rng.uniform(lo, hi, size=(n_seeds - 1, lo.size)))
    roots = []
    n_conv = 0
    margin_lo = lo - 0.5 * (hi - lo)
    margin_hi = hi + 0.5 * (hi - lo)
    for s in seeds:
        x = newton_refine(system, np.asarray(s, dtype=float))
        if x is None or np.linalg.norm(system.f(x)) >= 1e-10:
            continue
        n_conv += 1
        if np.any(x < margin_lo) or np.any(x > margin_hi):
            continue
        if any(np.linalg.norm(x - r) < merge_radius for r in roots):
            continue
        roots.append(x)
    roots.sort(key=lambda r: tuple(r))
    eqs = []
    for r in roots:
        j = _system_jacobian(system, r)
        eigs = np.linalg.eigvals(j)
        scale = max(np.max(np.abs(eigs)), 1.0)
        eqs.append(
            Equilibrium(
                point=Point(system.manifold, r),
                f_norm=float(np.linalg.norm(system.f(r))),
                jacobian=j,
                eigenvalues=eigs,
                classification=_classify_eigenvalues(eigs, eig_tol * scale),
            )
        )
    return EquilibriumSet(equilibria=eqs, n_seeds=len(seeds), n_converged=n_conv)


# ---------------------------------------------------------------------------
# built-in systems
# ---------------------------------------------------------------------------
# Vector fields are module-level so systems can be rebuilt cheaply anywhere
# (subprocesses included) from just (name, params).


def _linear_f(y, a):
    return y @ a.T


def _linear_jac(y, a):
    return a.copy()


def _rotation_f(y, omega):
    return np.stack([-omega * y[..., 1], omega * y[..., 0]], axis=-1)


def _rotation_jac(y, omega):
    return np.array([[0.0, -omega], [omega, 0.0]])


def _bistable_f(y, gain):
    return np.stack(
        [
            -y[..., 0] + np.tanh(gain * y[..., 1]),
            -y[..., 1] + np.tanh(gain * y[..., 0]),
        ],
        axis=-1,
    )


def _bistable_jac(y, gain):
    s0 = gain / np.cosh(gain * y[0]) ** 2
    s1 = gain / np.cosh(gain * y[1]) ** 2
    return np.array([[-1.0, s1], [s0, -1.0]])


def _lv_f(y, r, c):
    x0, x1 = y[..., 0], y[..., 1]
    return np.stack(
        [x0 * (r[0] - x0 + c * x1), x1 * (r[1] - x1 + c * x0)], axis=-1
    )


def _lv_jac(y, r, c):
    x0, x1 = y[0], y[1]
    return np.array(
        [[r[0] - 2 * x0 + c * x1, c * x0], [c * x1, r[1] - 2 * x1 + c * x0]]
    )


def _double_sigmoid(u, gain, centers):
    return np.tanh(gain * (u - centers[1])) + np.tanh(gain * (u - centers[0]))


def _tristable_f(y, gain, centers):
    return np.stack(
        [
            -y[..., 0] + _double_sigmoid(y[..., 1], gain, centers),
            -y[..., 1] + _double_sigmoid(y[..., 0], gain, centers),
        ],
        axis=-1,
    )


def _tristable_jac(y, gain, centers):
    def sp(u):
        return gain / np.cosh(gain * (u - centers[1])) ** 2 + gain / np.cosh(
            gain * (u - centers[0])
        ) ** 2

    return np.array([[-1.0, sp(y[1])], [sp(y[0]), -1.0]])


def _batch_vec_to_sym(v: np.ndarray, n: int) -> np.ndarray:
    v = np.atleast_2d(v)
    b = v.shape[0]
    m = np.zeros((b, n, n))
    iu = np.triu_indices(n)
    m[:, iu[0], iu[1]] = v
    mt = np.transpose(m, (0, 2, 1))
    diag = m * np.eye(n)
    return m + mt - diag


def _batch_sym_to_vec(m: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(m.shape[-1])
    return m[:, iu[0], iu[1]]


def _spd_relax_f(y, target, n):
    """Chart field of X' = Log_X(A): geodesic pursuit of the target matrix."""
    single = y.ndim == 1
    x = _batch_vec_to_sym(np.atleast_2d(y), n)
    w, q = np.linalg.eigh(x)
    w = np.maximum(w, 1e-12)
    sq = np.sqrt(w)
    xs = np.einsum("bij,bj,bkj->bik", q, sq, q)
    xis = np.einsum("bij,bj,bkj->bik", q, 1.0 / sq, q)
    inner = np.einsum("bij,jk,bkl->bil", xis, target, xis)
    inner = 0.5 * (inner + np.transpose(inner, (0, 2, 1)))
    wi, qi = np.linalg.eigh(inner)
    wi = np.maximum(wi, 1e-12)
    logm = np.einsum("bij,bj,bkj->bik", qi, np.log(wi), qi)
    out = np.einsum("bij,bjk,bkl->bil", xs, logm, xs)
    out = 0.5 * (out + np.transpose(out, (0, 2, 1)))
    vec = _batch_sym_to_vec(out)
    return vec[0] if single else vec


_DEFAULT_METZLER = np.array([[-2.0, 1.0], [1.0, -2.0]])


def builtin_names() -> list:
    return [
        "linear_metzler",
        "rotation",
        "bistable_tanh",
        "coop_lotka_volterra",
        "tristable_sigmoid",
        "spd_geodesic_relax",
    ]


def builtin_system(name: str, **params) -> SystemSpec:
    """Construct one of the reference systems.

    linear_metzler(a=[[-2,1],[1,-2]])
        Linear system with a Metzler matrix; the orthant is forward
        invariant for the linearized (= actual) flow.  Declared strongly
        differentially positive when exp(A) is entrywise positive.
    rotation(omega=1.0)
        Rigid rotation; periodic orbits, violates differential positivity
        with respect to the orthant.
    bistable_tanh(gain=2.0)
        Smooth cooperative system with two sinks and a saddle at the origin.
    coop_lotka_volterra(r=(1,1), coupling=0.5)
        Cooperative population model on the open positive quadrant.
    tristable_sigmoid(gain=4.0, centers=(-1,1))
        Cooperative system with three sinks and two saddles on the diagonal.
    spd_geodesic_relax(n=2, target=diag(2, 0.5))
        Geodesic pursuit flow X' = Log_X(A) on SPD(n) with the transported
        positive-semidefinite cone field.
    """
    if name == "linear_metzler":
        a = np.asarray(params.get("a", _DEFAULT_METZLER), dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ArgumentError("matrix must be square")
        off = a - np.diag(np.diag(a))
        if np.any(off < 0):
            raise ArgumentError("matrix is not Metzler (negative off-diagonal)")
        n = a.shape[0]
        strongly = bool(np.all(scipy.linalg.expm(a) > 0))
        man = geometry.euclidean(n)
        return SystemSpec(
            name="linear_metzler",
            manifold=man,
            cone_field=cones.constant_field(man, cones.orthant(n)),
            f=functools.partial(_linear_f, a=a),
            jac=functools.partial(_linear_jac, a=a),
            region=(-2 * np.ones(n), 2 * np.ones(n)),
            declared=DeclaredProperties(
                claims_dp=True, claims_sdp=strongly,
                notes="Metzler generator: linearized flow preserves the orthant",
            ),
            params={"a": a.tolist()},
        )
    if name == "rotation":
        omega = float(params.get("omega", 1.0))
        man = geometry.euclidean(2)
        return SystemSpec(
            name="rotation",
            manifold=man,
            cone_field=cones.constant_field(man, cones.orthant(2)),
            f=functools.partial(_rotation_f, omega=omega),
            jac=functools.partial(_rotation_jac, omega=omega),
            region=(np.array([-2.0, -2.0]), np.array([2.0, 2.0])),
            declared=DeclaredProperties(
                claims_dp=False, claims_sdp=False,
                notes="rigid rotation: cone directions rotate out of the orthant",
            ),
            params={"omega": omega},
        )
    if name == "bistable_tanh":
        gain = float(params.get("gain", 2.0))
        if gain <= 0:
            raise ArgumentError("gain must be positive")
        man = geometry.euclidean(2)
        return SystemSpec(
            name="bistable_tanh",
            manifold=man,
            cone_field=cones.constant_field(man, cones.orthant(2)),
            f=functools.partial(_bistable_f, gain=gain),
            jac=functools.partial(_bistable_jac, gain=gain),
            region=(np.array([-2.0, -2.0]), np.array([2.0, 2.0])),
            declared=DeclaredProperties(
                claims_dp=True, claims_sdp=True,
                notes="cooperative: off-diagonal Jacobian entries strictly positive",
            ),
            params={"gain": gain},
        )
    if name == "coop_lotka_volterra":
        r = tuple(float(v) for v in params.get("r", (1.0, 1.0)))
        c = float(params.get("coupling", 0.5))
        if c < 0 or c >= 1:
            raise ArgumentError("coupling must lie in [0, 1) for bounded growth")
        man = geometry.euclidean(2)
        return SystemSpec(
            name="coop_lotka_volterra",
            manifold=man,
            cone_field=cones.constant_field(man, cones.orthant(2)),
            f=functools.partial(_lv_f, r=r, c=c),
            jac=functools.partial(_lv_jac, r=r, c=c),
            region=(np.array([0.05, 0.05]), np.array([4.0, 4.0])),
            declared=DeclaredProperties(
                claims_dp=True, claims_sdp=True,
                notes="cooperative on the open positive quadrant",
            ),
            params={"r": list(r), "coupling": c},
        )
    if name == "tristable_sigmoid":
        gain = float(params.get("gain", 4.0))
        centers = tuple(float(v) for v in params.get("centers", (-1.0, 1.0)))
        man = geometry.euclidean(2)
        return SystemSpec(
            name="tristable_sigmoid",
            manifold=man,
            cone_field=cones.constant_field(man, cones.orthant(2)),
            f=functools.partial(_tristable_f, gain=gain, centers=centers),
            jac=functools.partial(_tristable_jac, gain=gain, centers=centers),
            region=(np.array([-3.0, -3.0]), np.array([3.0, 3.0])),
            declared=DeclaredProperties(
                claims_dp=True, claims_sdp=True,
                notes="cooperative with three stable equilibria on the diagonal",
            ),
            params={"gain": gain, "centers": list(centers)},
        )
    if name == "spd_geodesic_relax":
        n = int(params.get("n", 2))
        target = np.asarray(params.get("target", np.diag([2.0, 0.5])[:n, :n]), dtype=float)
        if target.shape != (n, n):
            raise ArgumentError("target shape does not match n")
        target = 0.5 * (target + target.T)
        if np.linalg.eigvalsh(target).min() <= 0:
            raise ArgumentError("target must be SPD")
        man = geometry.spd_manifold(n)
        base = geometry.point(man, geometry.sym_to_vec(np.eye(n)))
        fld = cones.transported_field(man, cones.psd_cone(n), base)
        eye_vec = geometry.sym_to_vec(np.eye(n))
        return SystemSpec(
            name="spd_geodesic_relax",
            manifold=man,
            cone_field=fld,
            f=functools.partial(_spd_relax_f, target=target, n=n),
            region=(eye_vec - 0.35, eye_vec + 0.35),
            declared=DeclaredProperties(
                claims_dp=False, claims_sdp=False,
                notes="geodesic pursuit of a target matrix; positivity left to checks",
            ),
            params={"n": n, "target": target.tolist()},
        )
    raise ArgumentError(
        f"unknown system {name!r}; available: {', '.join(builtin_names())}"
    )
