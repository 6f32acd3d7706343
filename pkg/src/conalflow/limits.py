"""Omega-limit set estimation and the order-theoretic property suites.

The central object is :func:`omega_estimate`, a budgeted forward-integration
classifier with four outcomes:

* ``ConvergedTo``   -- the trailing window of the orbit settled within
  ``eps_conv`` of a Newton-refined equilibrium.  For equilibria that are not
  linearly stable (saddles), the verdict is only issued at budget
  exhaustion: near-saddle transients must be given the chance to leave.
* ``PeriodicOrbit`` -- a near-return to an earlier post-transient state was
  detected and confirmed by refining the return time; the orbit is
  resampled evenly over one period.
* ``Escaped``       -- the trajectory left the escape bound.
* ``Undecided``     -- budget exhausted; tail samples are reported.

On top of it sit sampling suites for the order-theoretic properties of
strongly differentially positive flows: preservation of strict order along
the flow, openness of the strict order, non-ordering inside limit sets,
intersection of limit sets only at equilibria, convergence of
order-recurrent points, and the limit-set dichotomy.  All suites use
three-valued accounting -- Undecided never counts as pass or fail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import cones, order
from .dynamics import (
    Equilibrium,
    SystemSpec,
    _as_coords,
    _classify_eigenvalues,
    _system_jacobian,
    flow,
    newton_refine,
)
from .errors import ConalflowError, NumericError, StiffnessError
from .geometry import Point
from .integrate import IntegratorOptions
from .order import SearchBudget, compare

__all__ = [
    "OmegaBudget",
    "OmegaEstimate",
    "PropertyReport",
    "omega_estimate",
    "omega_invariance_check",
    "sample_ordered_pairs",
    "monotone_flow_check",
    "nonordering_check",
    "intersection_check",
    "dichotomy_check",
    "order_recurrence_check",
    "order_openness_probe",
    "run_property_suite",
]

CONVERGED = "ConvergedTo"
PERIODIC = "PeriodicOrbit"
ESCAPED = "Escaped"
UNDECIDED = "Undecided"


@dataclass(frozen=True)
class OmegaBudget:
    """Resource limits and tolerances for omega-limit estimation."""

    t_max: float = 200.0
    eps_conv: float = 1e-6
    recurrence_tol: float = 1e-4
    min_period: float = 0.5
    sample_dt: float = 0.05
    n_samples: int = 64
    window: int = 5
    escape_bound: float = 1e6
    rtol: float = 1e-9
    atol: float = 1e-12

    def integrator_options(self, **overrides) -> IntegratorOptions:
        kw = dict(rtol=self.rtol, atol=self.atol, escape_bound=self.escape_bound)
        kw.update(overrides)
        return IntegratorOptions(**kw)


@dataclass
class OmegaEstimate:
    """Budgeted classification of an orbit's omega-limit set."""

    kind: str                       # ConvergedTo | PeriodicOrbit | Escaped | Undecided
    x0: np.ndarray
    omega_samples: np.ndarray       # (k, dim) tail / orbit samples
    budget_used: float
    residual: float                 # |f| at the final integrated state
    equilibrium: Optional[Equilibrium] = None
    period: Optional[float] = None
    notes: str = ""

    @property
    def decided(self) -> bool:
        return self.kind in (CONVERGED, PERIODIC, ESCAPED)

    @property
    def resolution(self) -> float:
        """Largest nearest-neighbor gap among the omega samples."""
        s = self.omega_samples
        if len(s) < 2:
            return 0.0
        d = np.linalg.norm(s[:, None, :] - s[None, :, :], axis=2)
        np.fill_diagonal(d, np.inf)
        return float(d.min(axis=1).max())

    def __str__(self):
        if self.kind == CONVERGED:
            return f"ConvergedTo({np.round(self.equilibrium.coords, 6)})"
        if self.kind == PERIODIC:
            return f"PeriodicOrbit(period={self.period:.6g})"
        return self.kind


def _thin(arr: np.ndarray, k: int) -> np.ndarray:
    if len(arr) <= k:
        return np.array(arr)
    idx = np.linspace(0, len(arr) - 1, k).round().astype(int)
    return np.array(arr)[idx]


def _equilibrium_at(system: SystemSpec, coords: np.ndarray) -> Equilibrium:
    j = _system_jacobian(system, coords)
    eigs = np.linalg.eigvals(j)
    scale = max(np.max(np.abs(eigs)), 1.0)
    return Equilibrium(
        point=Point(system.manifold, coords),
        f_norm=float(np.linalg.norm(system.f(coords))),
        jacobian=j,
        eigenvalues=eigs,
        classification=_classify_eigenvalues(eigs, 1e-8 * scale),
    )


def omega_estimate(
    system: SystemSpec,
    x,
    budget: OmegaBudget = OmegaBudget(),
) -> OmegaEstimate:
    """Classify the omega-limit set of the orbit through x (see module docs).

    Integrator failures are degraded to Undecided with a diagnostic note
    rather than raised.
    """
    y = _as_coords(system, x)
    x0 = y.copy()
    opts = budget.integrator_options()
    chunk = max(2.0, 20 * budget.sample_dt)
    hist_t = [0.0]
    hist_y = [y.copy()]
    t = 0.0
    # saddle candidates are held until the budget runs out
    pending: Optional[Equilibrium] = None

    def converged(eq: Equilibrium) -> OmegaEstimate:
        return OmegaEstimate(
            kind=CONVERGED, x0=x0, omega_samples=eq.coords[None, :],
            budget_used=t, residual=float(np.linalg.norm(system.f(y))),
            equilibrium=eq,
        )

    while t < budget.t_max:
        t_next = min(t + chunk, budget.t_max)
        n_grid = max(int(round((t_next - t) / budget.sample_dt)), 1)
        grid = np.linspace(0.0, t_next - t, n_grid + 1)[1:]
        try:
            tr = flow(system, y, t_next - t, opts, t_eval=grid)
        except StiffnessError as e:
            return OmegaEstimate(
                kind=UNDECIDED, x0=x0,
                omega_samples=_thin(np.array(hist_y), budget.n_samples),
                budget_used=t, residual=float(np.linalg.norm(system.f(y))),
                notes=f"integrator failure: {e}",
            )
        if tr.escaped:
            return OmegaEstimate(
                kind=ESCAPED, x0=x0, omega_samples=tr.coords[-1:][:],
                budget_used=t + (tr.escape_time or 0.0),
                residual=float(np.linalg.norm(system.f(tr.coords[-1]))),
                notes=f"left |x| <= {opts.escape_bound:g}",
            )
        for dt_i, y_i in zip(tr.times, tr.coords):
            hist_t.append(t + dt_i)
            hist_y.append(y_i.copy())
        y = tr.coords[-1].copy()
        t = t_next

        speed = float(np.linalg.norm(system.f(y)))
        if speed < budget.eps_conv:
            e_coords = newton_refine(system, y)
            if (
                e_coords is not None
                and np.linalg.norm(system.f(e_coords)) < 1e-10
                and np.linalg.norm(y - e_coords) < budget.eps_conv
            ):
                eq = _equilibrium_at(system, e_coords)
                w = budget.window
                tail = np.array(hist_y[-w:])
                window_ok = bool(
                    np.all(np.linalg.norm(tail - e_coords, axis=1) < budget.eps_conv)
                )
                if window_ok:
                    if eq.classification == "stable":
                        return converged(eq)
                    pending = eq  # saddle-like: confirm only at budget end
            # else: slow passage, keep integrating
        elif pending is not None:
            pending = None  # left the neighborhood again

        per = _detect_recurrence(system, y, t, hist_t, hist_y, budget, opts)
        if per is not None:
            return per

    if pending is not None and np.linalg.norm(y - pending.coords) < budget.eps_conv:
        return converged(pending)
    return OmegaEstimate(
        kind=UNDECIDED, x0=x0,
        omega_samples=_thin(np.array(hist_y), budget.n_samples),
        budget_used=t, residual=float(np.linalg.norm(system.f(y))),
        notes="budget exhausted",
    )


def _detect_recurrence(system, y, t, hist_t, hist_y, budget, opts):
    """Near-return scan: trigger coarsely, then refine the return time."""
    ht = np.asarray(hist_t)
    ages = t - ht
    eligible = ages >= budget.min_period
    if not np.any(eligible):
        return None
    speed = float(np.linalg.norm(system.f(y)))
    if speed < 10 * budget.eps_conv:
        return None  # creeping toward an equilibrium, not an orbit
    coarse_tol = max(budget.recurrence_tol, 1.5 * speed * budget.sample_dt)
    hy = np.asarray(hist_y)
    d = np.linalg.norm(hy[eligible] - y, axis=1)
    hits = np.nonzero(d < coarse_tol)[0]
    if hits.size == 0:
        return None
    # most recent eligible return gives the base period
    j = hits[-1]
    t_j = ht[eligible][j]
    period0 = t - t_j
    seg = hy[ht >= t_j]
    diam = float(np.max(np.linalg.norm(seg - y, axis=1)))
    if diam <= 10 * budget.recurrence_tol:
        return None  # the whole "loop" fits in the tolerance ball: not a cycle
    # refine: minimize |phi_tau(y) - y| around tau = period0
    lo = max(period0 - 2 * budget.sample_dt, budget.min_period)
    hi = period0 + 2 * budget.sample_dt
    fine = np.linspace(lo, hi, 801)
    tr = flow(system, y, hi, opts, t_eval=fine)
    dist = np.linalg.norm(tr.coords - y, axis=1)
    i_min = int(np.argmin(dist))
    if dist[i_min] >= budget.recurrence_tol:
        return None
    period = float(tr.times[i_min])
    n = budget.n_samples
    orbit_grid = np.linspace(0.0, period, n, endpoint=False)[1:]
    tr_orbit = flow(system, y, period, opts, t_eval=orbit_grid)
    samples = np.vstack([y[None, :], tr_orbit.coords])
    return OmegaEstimate(
        kind=PERIODIC, x0=np.array(hist_y[0]), omega_samples=samples,
        budget_used=t, residual=float(dist[i_min]), period=period,
        notes=f"return distance {dist[i_min]:.2e}",
    )


def omega_invariance_check(
    system: SystemSpec,
    estimate: OmegaEstimate,
    s_values=(0.5, 1.0, 2.0),
    budget: OmegaBudget = OmegaBudget(),
) -> dict:
    """Check flow-invariance of the sampled omega set.

    Flows every sample forward by each s and measures the directed Hausdorff
    distance back to the sample set.  A finite sample of a continuum can
    only be invariant up to its own resolution, so the tolerance is
    ``10 * eps_conv + resolution``; the dict records both sides.
    """
    if not estimate.decided:
        return {"applicable": False}
    samples = estimate.omega_samples
    tol = 10 * budget.eps_conv + estimate.resolution
    opts = budget.integrator_options()
    worst = 0.0
    for s in s_values:
        flowed = np.array(
            [flow(system, p, s, opts).coords[-1] for p in samples]
        )
        d = np.linalg.norm(flowed[:, None, :] - samples[None, :, :], axis=2)
        worst = max(worst, float(d.min(axis=1).max()))
    return {
        "applicable": True,
        "holds": worst <= tol,
        "max_deviation": worst,
        "tolerance": tol,
        "sample_resolution": estimate.resolution,
    }


# ---------------------------------------------------------------------------
# property reports
# ---------------------------------------------------------------------------


@dataclass
class PropertyReport:
    """Three-valued tally for a sampled property suite."""

    name: str
    n_tested: int
    n_passed: int
    n_failed: int
    n_undecided: int
    witness: Optional[tuple] = None   # worst failing (or undecided) case
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_passed + self.n_failed + self.n_undecided != self.n_tested:
            raise ConalflowError(
                "report counts are inconsistent: "
                f"{self.n_passed}+{self.n_failed}+{self.n_undecided} != {self.n_tested}"
            )

    @property
    def holds(self) -> bool:
        return self.n_failed == 0

    def __str__(self):
        return (
            f"{self.name}: {self.n_passed}/{self.n_tested} pass, "
            f"{self.n_failed} fail, {self.n_undecided} undecided"
        )


def sample_ordered_pairs(
    system: SystemSpec,
    n_pairs: int,
    seed: int = 0,
    region: Optional[tuple] = None,
    max_offset: float = 0.4,
    strict: bool = True,
) -> list:
    """Random pairs (x, y) in the region with x strictly below y.

    y is x plus a random cone vector blended toward the interior direction,
    scaled to a fraction of the region diagonal; pairs are re-drawn until
    the order oracle confirms strictness and both ends lie in the region.
    """
    lo, hi = region if region is not None else system.region_box()
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    diag = float(np.linalg.norm(hi - lo))
    rng = np.random.default_rng(seed)
    fld = system.cone_field
    pairs = []
    attempts = 0
    while len(pairs) < n_pairs and attempts < 100 * n_pairs:
        attempts += 1
        x = rng.uniform(lo, hi)
        w = cones.field_project(fld, x, rng.standard_normal(lo.size))
        nw = np.linalg.norm(w)
        v = cones.field_interior_direction(fld, x)
        if nw > 1e-12:
            v = 0.5 * v + 0.5 * w / nw
            v = v / np.linalg.norm(v)
        step = rng.uniform(0.02, max_offset) * diag
        y = x + step * v
        if np.any(y < lo) or np.any(y > hi):
            continue
        verdict = compare(fld, x, y)
        want = order.STRICTLY_LESS if strict else (order.STRICTLY_LESS, order.LESS)
        if (strict and verdict.relation == order.STRICTLY_LESS) or (
            not strict and verdict.relation in want
        ):
            pairs.append((x, y))
    if len(pairs) < n_pairs:
        raise NumericError(
            f"could only sample {len(pairs)}/{n_pairs} ordered pairs"
        )
    return pairs


def monotone_flow_check(
    system: SystemSpec,
    pairs,
    t_grid=(0.1, 1.0, 5.0, 20.0),
    options: Optional[IntegratorOptions] = None,
    search_budget: SearchBudget = SearchBudget(),
) -> PropertyReport:
    """Strict order preservation: phi_t(x) strictly below phi_t(y) for t > 0.

    A pair passes when every grid time yields a decided StrictlyLess; it
    fails at the first decided non-strict verdict; pairs with only Undecided
    degradations count as undecided.
    """
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    if np.any(t_grid <= 0):
        raise ConalflowError("t_grid times must be positive")
    opts = options or IntegratorOptions()
    fld = system.cone_field
    n_pass = n_fail = n_und = 0
    witness = None
    worst_margin = np.inf
    for x, y in pairs:
        tx = flow(system, x, float(t_grid[-1]), opts, t_eval=t_grid)
        ty = flow(system, y, float(t_grid[-1]), opts, t_eval=t_grid)
        if tx.escaped or ty.escaped:
            n_und += 1
            continue
        failed = undecided = False
        for t, px, py in zip(t_grid, tx.coords, ty.coords):
            v = compare(fld, px, py, search_budget)
            if v.relation == order.STRICTLY_LESS:
                if v.margin is not None and v.margin < worst_margin:
                    worst_margin = v.margin
                continue
            if v.relation == order.UNDECIDED:
                undecided = True
                continue
            failed = True
            if witness is None or (v.margin or 0.0) < (witness[3].margin or 0.0):
                witness = (x, y, float(t), v)
            break
        if failed:
            n_fail += 1
        elif undecided:
            n_und += 1
        else:
            n_pass += 1
    return PropertyReport(
        name="monotone_flow",
        n_tested=len(pairs),
        n_passed=n_pass,
        n_failed=n_fail,
        n_undecided=n_und,
        witness=witness,
        details={"t_grid": t_grid.tolist(), "worst_strict_margin": worst_margin},
    )


def nonordering_check(
    system: SystemSpec,
    estimate: OmegaEstimate,
    search_budget: SearchBudget = SearchBudget(),
    duplicate_tol: Optional[float] = None,
) -> PropertyReport:
    """No two distinct points of one omega-limit set are order-related.

    Tests all sample pairs; near-duplicate samples (within duplicate_tol,
    default 10 * target_radius) are skipped as "the same point".  Singleton
    estimates pass vacuously.
    """
    samples = estimate.omega_samples
    fld = system.cone_field
    if duplicate_tol is None:
        duplicate_tol = 10 * search_budget.target_radius
    n_pass = n_fail = n_und = 0
    witness = None
    n_total = 0
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            if np.linalg.norm(samples[j] - samples[i]) <= duplicate_tol:
                continue
            n_total += 1
            fwd = compare(fld, samples[i], samples[j], search_budget)
            if fwd.relation == order.UNDECIDED:
                n_und += 1
                continue
            if fwd.decided_leq:
                n_fail += 1
                if witness is None:
                    witness = (samples[i], samples[j], fwd)
                continue
            bwd = compare(fld, samples[j], samples[i], search_budget)
            if bwd.relation == order.UNDECIDED:
                n_und += 1
            elif bwd.decided_leq:
                n_fail += 1
                if witness is None:
                    witness = (samples[j], samples[i], bwd)
            else:
                n_pass += 1
    return PropertyReport(
        name="nonordering_of_limit_sets",
        n_tested=n_total,
        n_passed=n_pass,
        n_failed=n_fail,
        n_undecided=n_und,
        witness=witness,
        details={"n_samples": len(samples), "kind": estimate.kind},
    )


def intersection_check(
    system: SystemSpec,
    x,
    y,
    budget: OmegaBudget = OmegaBudget(),
) -> PropertyReport:
    """Common omega points of an ordered pair must be equilibria.

    Intersects the two sampled omega sets at resolution eps_conv and asserts
    |f| < 10 * eps_conv at each common point (midpoint of the matched
    samples).  Empty intersections pass vacuously.
    """
    pre = compare(system, x, y)
    if not (pre.decided_leq or pre.equal):
        return PropertyReport(
            name="intersection_in_equilibria", n_tested=1, n_passed=0,
            n_failed=0, n_undecided=1,
            details={"precondition": str(pre)},
        )
    ox = omega_estimate(system, x, budget)
    oy = omega_estimate(system, y, budget)
    if not (ox.decided and oy.decided):
        return PropertyReport(
            name="intersection_in_equilibria", n_tested=1, n_passed=0,
            n_failed=0, n_undecided=1,
            details={"omega_x": ox.kind, "omega_y": oy.kind},
        )
    d = np.linalg.norm(
        ox.omega_samples[:, None, :] - oy.omega_samples[None, :, :], axis=2
    )
    ii, jj = np.nonzero(d < budget.eps_conv)
    n_pass = n_fail = 0
    witness = None
    for i, j in zip(ii, jj):
        mid = 0.5 * (ox.omega_samples[i] + oy.omega_samples[j])
        fn = float(np.linalg.norm(system.f(mid)))
        if fn < 10 * budget.eps_conv:
            n_pass += 1
        else:
            n_fail += 1
            if witness is None:
                witness = (mid, fn)
    return PropertyReport(
        name="intersection_in_equilibria",
        n_tested=n_pass + n_fail,
        n_passed=n_pass,
        n_failed=n_fail,
        n_undecided=0,
        witness=witness,
        details={"n_common": int(len(ii)), "omega_x": ox.kind, "omega_y": oy.kind},
    )


def dichotomy_check(
    system: SystemSpec,
    x,
    y,
    budget: OmegaBudget = OmegaBudget(t_max=50.0),
    search_budget: SearchBudget = SearchBudget(),
) -> PropertyReport:
    """Limit-set dichotomy for an ordered pair.

    Branch (a): both orbits converge to the same equilibrium.  Branch (b):
    every decided cross-pair of omega samples is StrictlyLess.  Any decided
    cross-pair that is not strict fails; undecided omega estimates or
    cross-pairs leave the verdict undecided.  details["branch"] records
    which branch was witnessed.
    """
    name = "limit_set_dichotomy"
    pre = compare(system, x, y, search_budget)
    if not pre.decided_leq or pre.equal:
        return PropertyReport(
            name=name, n_tested=1, n_passed=0, n_failed=0, n_undecided=1,
            details={"branch": None, "precondition": str(pre)},
        )
    ox = omega_estimate(system, x, budget)
    oy = omega_estimate(system, y, budget)
    if not (ox.decided and oy.decided):
        return PropertyReport(
            name=name, n_tested=1, n_passed=0, n_failed=0, n_undecided=1,
            details={"branch": None, "omega_x": ox.kind, "omega_y": oy.kind},
        )
    if ox.kind == CONVERGED and oy.kind == CONVERGED:
        gap = np.linalg.norm(ox.equilibrium.coords - oy.equilibrium.coords)
        if gap < 10 * budget.eps_conv:
            return PropertyReport(
                name=name, n_tested=1, n_passed=1, n_failed=0, n_undecided=0,
                details={"branch": "a",
                         "equilibrium": ox.equilibrium.coords.tolist()},
            )
    fld = system.cone_field
    n_pass = n_fail = n_und = 0
    witness = None
    for p in ox.omega_samples:
        for q in oy.omega_samples:
            v = compare(fld, p, q, search_budget)
            if v.relation == order.STRICTLY_LESS:
                n_pass += 1
            elif v.relation == order.UNDECIDED:
                n_und += 1
            else:
                n_fail += 1
                if witness is None:
                    witness = (p, q, v)
    return PropertyReport(
        name=name,
        n_tested=n_pass + n_fail + n_und,
        n_passed=n_pass,
        n_failed=n_fail,
        n_undecided=n_und,
        witness=witness,
        details={"branch": "b" if n_fail == 0 and n_und == 0 else None,
                 "omega_x": str(ox), "omega_y": str(oy)},
    )


def order_recurrence_check(
    system: SystemSpec,
    x,
    t_return: float,
    budget: OmegaBudget = OmegaBudget(),
    search_budget: SearchBudget = SearchBudget(),
) -> PropertyReport:
    """An orbit ordered against its own future must converge.

    Precondition: compare(x, phi_T(x)) decided Less/StrictlyLess (equality
    -- x is an equilibrium -- passes vacuously).  Then omega_estimate(x)
    must be ConvergedTo.
    """
    name = "order_recurrence_convergence"
    opts = budget.integrator_options()
    xt = flow(system, x, t_return, opts).coords[-1]
    pre = compare(system, x, xt, search_budget)
    if pre.equal:
        return PropertyReport(
            name=name, n_tested=1, n_passed=1, n_failed=0, n_undecided=0,
            details={"vacuous": "x is (numerically) an equilibrium"},
        )
    if not pre.decided_leq:
        return PropertyReport(
            name=name, n_tested=1, n_passed=0, n_failed=0, n_undecided=1,
            details={"precondition": str(pre)},
        )
    est = omega_estimate(system, x, budget)
    if est.kind == CONVERGED:
        return PropertyReport(
            name=name, n_tested=1, n_passed=1, n_failed=0, n_undecided=0,
            details={"equilibrium": est.equilibrium.coords.tolist()},
        )
    if est.kind == UNDECIDED:
        return PropertyReport(
            name=name, n_tested=1, n_passed=0, n_failed=0, n_undecided=1,
            details={"omega": est.kind},
        )
    return PropertyReport(
        name=name, n_tested=1, n_passed=0, n_failed=1, n_undecided=0,
        witness=(np.asarray(x, dtype=float), est.kind),
        details={"omega": str(est)},
    )


def order_openness_probe(
    system: SystemSpec,
    x,
    y,
    delta: float,
    n: int = 10,
    t_grid=(0.1, 0.25, 0.5, 1.0, 2.0, 5.0),
    seed: int = 0,
    options: Optional[IntegratorOptions] = None,
    search_budget: SearchBudget = SearchBudget(),
) -> PropertyReport:
    """Ordered pairs become strictly ordered, robustly, after some t_0.

    Samples n perturbations of x and of y inside delta-balls and scans the
    time grid for the first t_0 from which *all* n x n perturbed cross-pairs
    compare StrictlyLess at every remaining grid time.  Reports the found
    t_0 in details, or failure at grid end.
    """
    x = _as_coords(system, x)
    y = _as_coords(system, y)
    pre = compare(system, x, y, search_budget)
    if not (pre.decided_leq):
        return PropertyReport(
            name="order_openness", n_tested=1, n_passed=0, n_failed=0,
            n_undecided=1, details={"precondition": str(pre)},
        )
    rng = np.random.default_rng(seed)
    dim = x.size

    def ball(center):
        u = rng.standard_normal(dim)
        u /= np.linalg.norm(u)
        r = delta * rng.uniform() ** (1.0 / dim)
        return center + r * u

    xs = [ball(x) for _ in range(n)]
    ys = [ball(y) for _ in range(n)]
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    opts = options or IntegratorOptions()
    fx = [flow(system, p, float(t_grid[-1]), opts, t_eval=t_grid).coords for p in xs]
    fy = [flow(system, q, float(t_grid[-1]), opts, t_eval=t_grid).coords for q in ys]
    fld = system.cone_field
    # strict_at[k] == True iff all cross-pairs are strictly ordered at t_grid[k]
    strict_at = np.zeros(len(t_grid), dtype=bool)
    any_undecided = False
    for k in range(len(t_grid)):
        ok = True
        for a in fx:
            for b in fy:
                v = compare(fld, a[k], b[k], search_budget)
                if v.relation == order.UNDECIDED:
                    any_undecided = True
                if v.relation != order.STRICTLY_LESS:
                    ok = False
                    break
            if not ok:
                break
        strict_at[k] = ok
    t0 = None
    for k in range(len(t_grid)):
        if np.all(strict_at[k:]):
            t0 = float(t_grid[k])
            break
    if t0 is not None:
        return PropertyReport(
            name="order_openness", n_tested=1, n_passed=1, n_failed=0,
            n_undecided=0, details={"t0": t0, "delta": delta, "n": n},
        )
    if any_undecided:
        return PropertyReport(
            name="order_openness", n_tested=1, n_passed=0, n_failed=0,
            n_undecided=1, details={"delta": delta, "n": n},
        )
    return PropertyReport(
        name="order_openness", n_tested=1, n_passed=0, n_failed=1,
        n_undecided=0, witness=(x, y, delta),
        details={"delta": delta, "n": n, "strict_at": strict_at.tolist()},
    )


# ---------------------------------------------------------------------------
# suite orchestration
# ---------------------------------------------------------------------------


def run_property_suite(
    system: SystemSpec,
    n_pairs: int = 100,
    seed: int = 0,
    t_grid=(0.1, 1.0, 5.0, 20.0),
    dichotomy_budget: OmegaBudget = OmegaBudget(t_max=50.0),
    region: Optional[tuple] = None,
) -> dict:
    """Run the order-theoretic property suites on sampled ordered pairs.

    Returns a dict of PropertyReports keyed by suite name plus aggregate
    dichotomy branch counts (details["branch_a"/"branch_b"]).
    """
    pairs = sample_ordered_pairs(system, n_pairs, seed=seed, region=region)
    reports = {}
    reports["monotone_flow"] = monotone_flow_check(system, pairs, t_grid)

    n_pass = n_fail = n_und = 0
    branch_a = branch_b = 0
    witness = None
    for x, y in pairs:
        r = dichotomy_check(system, x, y, dichotomy_budget)
        if r.n_failed > 0:
            n_fail += 1
            if witness is None:
                witness = r.witness
        elif r.n_undecided > 0:
            n_und += 1
        else:
            n_pass += 1
            if r.details.get("branch") == "a":
                branch_a += 1
            elif r.details.get("branch") == "b":
                branch_b += 1
    reports["limit_set_dichotomy"] = PropertyReport(
        name="limit_set_dichotomy",
        n_tested=len(pairs),
        n_passed=n_pass,
        n_failed=n_fail,
        n_undecided=n_und,
        witness=witness,
        details={"branch_a": branch_a, "branch_b": branch_b,
                 "decided_fraction": (n_pass + n_fail) / max(len(pairs), 1)},
    )

    # intersection principle on a subsample
    sub = pairs[: max(10, n_pairs // 10)]
    n_pass = n_fail = n_und = 0
    for x, y in sub:
        r = intersection_check(system, x, y, dichotomy_budget)
        if r.n_failed:
            n_fail += 1
        elif r.n_undecided:
            n_und += 1
        else:
            n_pass += 1
    reports["intersection_in_equilibria"] = PropertyReport(
        name="intersection_in_equilibria",
        n_tested=len(sub), n_passed=n_pass, n_failed=n_fail, n_undecided=n_und,
    )
    return reports
