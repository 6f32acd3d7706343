"""Ordered-line foliation census of the non-convergent set.

The construction: pick a unit direction v interior to the cone field over a
chart box V, split R^n = span(v) (+) F with F the orthogonal complement,
and foliate V by lines x(u) + s v indexed by a grid of offsets u in F.
Samples along each line are totally conal-ordered by construction
(consecutive differences are positive multiples of v), so per-line
classification exposes the ordered structure of the non-convergent set: on
each line it should shrink to isolated crossings, and its measure estimate
should vanish linearly with the sampling resolution.

Two estimators of the chart measure of the non-convergent set D are
computed and cross-checked: the line-by-line product (Fubini) estimator
``sum_u mu_y(u) * du`` and a direct Monte-Carlo estimator over the same
box with a matched sample count.  Undecided samples are excluded from the
point estimates and carried in a conservative upper bound instead -- budget
artifacts must not masquerade as true non-convergence.

Classification runs on the batched integrator with one shared adaptive
step.  Early retirement of a sample is allowed only at linearly *stable*
equilibria; near a saddle a trajectory can dwell within tolerance for a
long transient before leaving, so saddle-type verdicts are only issued at
the budget horizon.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import cones
from .cones import STRICT_TOL
from .dynamics import EquilibriumSet, SystemSpec, find_equilibria
from .errors import ArgumentError, FoliationError
from .geometry import volume_density
from .integrate import IntegratorOptions, integrate_ensemble
from .limits import CONVERGED, OmegaBudget, omega_estimate
from .order import STRICTLY_LESS, UNDECIDED, SearchBudget, compare

__all__ = [
    "CLASS_CONVERGENT",
    "CLASS_PERIODIC",
    "CLASS_ESCAPED",
    "CLASS_UNDECIDED",
    "CLASS_NAMES",
    "FoliationSpec",
    "CensusBudget",
    "LineCensus",
    "CensusReport",
    "CountabilityReport",
    "build_foliation",
    "classify_points",
    "run_line_census",
    "cluster_count",
    "label_changes",
    "measure_estimate",
    "countability_probe",
]

# classification codes, fixed for CSV output and cluster logic
CLASS_UNDECIDED = 0
CLASS_CONVERGENT = 1
CLASS_PERIODIC = 2
CLASS_ESCAPED = 3
CLASS_NAMES = {
    CLASS_UNDECIDED: "Undecided",
    CLASS_CONVERGENT: "Convergent",
    CLASS_PERIODIC: "Periodic",
    CLASS_ESCAPED: "Escaped",
}


@dataclass(frozen=True)
class FoliationSpec:
    """An ordered-line foliation of a chart box.

    Lines are ``x(u) + s v`` with ``x(u) = base + F.T @ u``; ``offsets``
    holds one u per line (only lines whose chord through the box is
    nonempty are kept), ``chords`` the corresponding [s_min, s_max].
    ``n_lines`` is the grid size per F-axis, so the full offset grid has
    ``n_lines ** (dim-1)`` cells before empty chords are dropped.
    """

    region: tuple                 # (lo, hi) arrays
    base_point: np.ndarray        # (dim,)
    v: np.ndarray                 # (dim,) unit interior direction
    v_margin: float               # cone margin of v at the base point
    complement: np.ndarray        # (dim-1, dim) orthonormal rows spanning F
    n_lines: int
    n_points: int
    offsets: np.ndarray           # (L, dim-1)
    chords: np.ndarray            # (L, 2)
    offset_ranges: np.ndarray     # (dim-1, 2) per-axis offset span
    n_shrinks: int = 0
    split_condition: float = 1.0  # cond of [v; F] (orthonormal: 1)

    @property
    def dim(self) -> int:
        return self.v.size

    @property
    def n_total_lines(self) -> int:
        return len(self.offsets)

    @property
    def line_extent(self) -> float:
        return float(np.max(self.chords[:, 1] - self.chords[:, 0]))

    @property
    def offset_cell_volume(self) -> float:
        """F-volume of one offset grid cell (1.0 for the 1-D degenerate split)."""
        if self.dim == 1:
            return 1.0
        spans = self.offset_ranges[:, 1] - self.offset_ranges[:, 0]
        return float(np.prod(spans / self.n_lines))

    def line_origin(self, i: int) -> np.ndarray:
        return self.base_point + self.complement.T @ self.offsets[i]

    def line_samples(self, i: int, n_points: Optional[int] = None):
        """Cell-centered s values and sample coordinates of line i."""
        n = n_points if n_points is not None else self.n_points
        s_min, s_max = self.chords[i]
        step = (s_max - s_min) / n
        s = s_min + step * (np.arange(n) + 0.5)
        pts = self.line_origin(i)[None, :] + s[:, None] * self.v[None, :]
        return s, pts

    def refined(self, factor: int) -> "FoliationSpec":
        """Same lines, ``factor`` times as many points per line."""
        return replace(self, n_points=self.n_points * factor)


def _chord_through_box(p0, v, lo, hi):
    """[s_min, s_max] of {p0 + s v} inside the box, or None."""
    s_lo, s_hi = -np.inf, np.inf
    for i in range(len(p0)):
        if abs(v[i]) < 1e-15:
            if not (lo[i] - 1e-12 <= p0[i] <= hi[i] + 1e-12):
                return None
            continue
        a = (lo[i] - p0[i]) / v[i]
        b = (hi[i] - p0[i]) / v[i]
        s_lo = max(s_lo, min(a, b))
        s_hi = min(s_hi, max(a, b))
    if s_hi - s_lo <= 1e-12:
        return None
    return (s_lo, s_hi)


def build_foliation(
    system: SystemSpec,
    x=None,
    region: Optional[tuple] = None,
    resolution: tuple = (101, 201),
    n_interior_checks: int = 64,
    max_shrinks: int = 30,
    seed: int = 0,
) -> FoliationSpec:
    """Construct the ordered-line foliation of a chart box.

    v is the analytic interior direction of the cone field at the base
    point (orthant: the normalized all-ones vector); F is the orthonormal
    complement of span(v).  The direction must be interior to the cone at
    *every* sampled point of the box (corners plus random interior
    points); if not, the box is shrunk toward the base point by 0.8 per
    attempt, and a FoliationError is raised after ``max_shrinks`` failures.
    """
    n_lines, n_points = resolution
    if n_lines < 1 or n_points < 1:
        raise ArgumentError("resolution must be positive")
    fld = system.cone_field
    lo, hi = region if region is not None else system.region_box()
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    if np.any(hi <= lo):
        raise ArgumentError("region box is degenerate")
    dim = lo.size
    base = (
        np.asarray(x, dtype=float) if x is not None else 0.5 * (lo + hi)
    )
    if np.any(base <= lo) or np.any(base >= hi):
        raise ArgumentError("base point must be interior to the region")

    v = cones.field_interior_direction(fld, base)
    v = v / np.linalg.norm(v)
    v_margin = cones.field_margin(fld, base, v)
    if v_margin <= STRICT_TOL:
        raise FoliationError(
            f"direction margin {v_margin:.3e} at the base point is not interior"
        )

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(9001,)))
    n_shrinks = 0
    while True:
        corners = np.array(list(itertools.product(*zip(lo, hi))))
        probes = np.vstack([corners, rng.uniform(lo, hi, size=(n_interior_checks, dim))])
        margins = np.array([cones.field_margin(fld, p, v) for p in probes])
        if margins.min() > STRICT_TOL:
            break
        n_shrinks += 1
        if n_shrinks > max_shrinks:
            raise FoliationError(
                "interior-everywhere condition failed after "
                f"{max_shrinks} shrinks (worst margin {margins.min():.3e})"
            )
        lo = base + 0.8 * (lo - base)
        hi = base + 0.8 * (hi - base)

    # orthonormal complement of span(v) from the SVD of v as a row
    _, _, vt = np.linalg.svd(v[None, :])
    comp = vt[1:]
    split = np.vstack([v[None, :], comp])
    cond = float(np.linalg.cond(split))
    if cond >= 1e6:
        raise FoliationError(f"split basis condition {cond:.3e} too large")

    if dim == 1:
        offsets = np.zeros((1, 0))
        ranges = np.zeros((0, 2))
    else:
        proj = corners @ comp.T - (base @ comp.T)[None, :]
        pmin, pmax = proj.min(axis=0), proj.max(axis=0)
        ranges = np.column_stack([pmin, pmax])
        axes = [
            pmin[j] + (pmax[j] - pmin[j]) / n_lines * (np.arange(n_lines) + 0.5)
            for j in range(dim - 1)
        ]
        offsets = np.array(list(itertools.product(*axes)))

    kept_offsets, chords = [], []
    for u in offsets:
        ch = _chord_through_box(base + comp.T @ u, v, lo, hi)
        if ch is not None:
            kept_offsets.append(u)
            chords.append(ch)
    if not kept_offsets:
        raise FoliationError("no foliation line intersects the region")
    return FoliationSpec(
        region=(lo, hi),
        base_point=base,
        v=v,
        v_margin=float(v_margin),
        complement=comp,
        n_lines=n_lines,
        n_points=n_points,
        offsets=np.array(kept_offsets),
        chords=np.array(chords),
        offset_ranges=ranges,
        n_shrinks=n_shrinks,
        split_condition=cond,
    )


@dataclass(frozen=True)
class CensusBudget:
    """Budget for batched census classification."""

    t_max: float = 50.0
    eps_conv: float = 1e-6
    check_interval: float = 0.5
    recheck_undecided: bool = True
    batch_size: int = 4096
    rtol: float = 1e-9
    atol: float = 1e-12
    escape_bound: float = 1e6

    def integrator_options(self) -> IntegratorOptions:
        return IntegratorOptions(
            rtol=self.rtol, atol=self.atol, escape_bound=self.escape_bound
        )

    def omega_budget(self) -> OmegaBudget:
        return OmegaBudget(
            t_max=self.t_max, eps_conv=self.eps_conv,
            escape_bound=self.escape_bound, rtol=self.rtol, atol=self.atol,
        )


@dataclass
class ClassifiedSamples:
    codes: np.ndarray       # (N,) classification codes
    eq_index: np.ndarray    # (N,) equilibrium index or -1
    residual: np.ndarray    # (N,) |f| at retirement
    t_used: np.ndarray      # (N,)


def classify_points(
    system: SystemSpec,
    points: np.ndarray,
    budget: CensusBudget = CensusBudget(),
    equilibria: Optional[EquilibriumSet] = None,
) -> ClassifiedSamples:
    """Classify a batch of initial points by their omega-limit behavior.

    Batched integration with a shared step; a sample retires early only
    when it sits within eps_conv of a linearly stable equilibrium with
    |f| < eps_conv.  At the horizon, remaining samples within tolerance of
    *any* equilibrium (saddles included) are Convergent; the rest are
    Undecided and, when ``recheck_undecided`` is set, re-examined one by
    one with the scalar estimator (which can also detect periodic orbits).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ArgumentError("points must be (N, dim)")
    if equilibria is None:
        equilibria = find_equilibria(system)
    eq_coords = np.array([e.coords for e in equilibria]) if len(equilibria) else (
        np.zeros((0, points.shape[1]))
    )
    stable_idx = np.array(
        [i for i, e in enumerate(equilibria) if e.classification == "stable"],
        dtype=int,
    )
    stable_coords = eq_coords[stable_idx] if stable_idx.size else np.zeros((0, points.shape[1]))
    eps = budget.eps_conv

    def f_batch(t, ya):
        return system.f(ya)

    def classifier(t, ya, idx):
        codes = np.zeros(len(ya), dtype=int)
        if stable_coords.size == 0:
            return codes
        fn = np.linalg.norm(system.f(ya), axis=-1)
        d = np.linalg.norm(ya[:, None, :] - stable_coords[None, :, :], axis=2)
        kk = np.argmin(d, axis=1)
        dmin = d[np.arange(len(ya)), kk]
        hit = (dmin < eps) & (fn < eps)
        codes[hit] = stable_idx[kk[hit]] + 1
        return codes

    n = len(points)
    codes = np.full(n, CLASS_UNDECIDED, dtype=int)
    eq_index = np.full(n, -1, dtype=int)
    residual = np.zeros(n)
    t_used = np.zeros(n)
    opts = budget.integrator_options()

    for start in range(0, n, budget.batch_size):
        sl = slice(start, min(start + budget.batch_size, n))
        final, retire_t, retire_code, _ = integrate_ensemble(
            f_batch, points[sl], budget.t_max, opts,
            check_interval=budget.check_interval, classifier=classifier,
        )
        fn = np.linalg.norm(system.f(final), axis=-1)
        residual[sl] = fn
        t_used[sl] = retire_t
        c = codes[sl]
        ei = eq_index[sl]
        c[retire_code == -1] = CLASS_ESCAPED
        early = retire_code > 0
        c[early] = CLASS_CONVERGENT
        ei[early] = retire_code[early] - 1
        # horizon survivors: accept any equilibrium within tolerance
        open_rows = np.nonzero(retire_code == 0)[0]
        if open_rows.size and len(eq_coords):
            d = np.linalg.norm(
                final[open_rows][:, None, :] - eq_coords[None, :, :], axis=2
            )
            kk = np.argmin(d, axis=1)
            dmin = d[np.arange(len(open_rows)), kk]
            hit = (dmin < eps) & (fn[open_rows] < eps)
            c[open_rows[hit]] = CLASS_CONVERGENT
            ei[open_rows[hit]] = kk[hit]
        codes[sl] = c
        eq_index[sl] = ei

    if budget.recheck_undecided:
        ob = budget.omega_budget()
        for i in np.nonzero(codes == CLASS_UNDECIDED)[0]:
            est = omega_estimate(system, points[i], ob)
            residual[i] = est.residual
            t_used[i] = est.budget_used
            if est.kind == CONVERGED:
                codes[i] = CLASS_CONVERGENT
                k, dk = equilibria.nearest(est.equilibrium.coords)
                eq_index[i] = k if dk < 10 * eps else -1
            elif est.kind == "PeriodicOrbit":
                codes[i] = CLASS_PERIODIC
            elif est.kind == "Escaped":
                codes[i] = CLASS_ESCAPED
    return ClassifiedSamples(codes, eq_index, residual, t_used)


@dataclass
class LineCensus:
    """Classification summary of one foliation line."""

    line_index: int
    offset: np.ndarray
    s_values: np.ndarray
    codes: np.ndarray
    eq_index: np.ndarray
    residuals: np.ndarray
    t_used: np.ndarray
    chord: tuple
    cluster_count: int = 0
    mu_y: float = 0.0            # decided non-convergent fraction x chord length
    mu_y_upper: float = 0.0      # including Undecided samples
    order_pairs_checked: int = 0
    order_pairs_failed: int = 0
    order_pairs_undecided: int = 0

    @property
    def length(self) -> float:
        return float(self.chord[1] - self.chord[0])

    @property
    def n_points(self) -> int:
        return len(self.s_values)

    @property
    def n_undecided(self) -> int:
        return int(np.sum(self.codes == CLASS_UNDECIDED))

    @property
    def n_nonconvergent(self) -> int:
        return int(np.sum(self.codes != CLASS_CONVERGENT))


def cluster_count(codes: np.ndarray) -> int:
    """Count maximal runs of non-Convergent samples.

    Isolated Undecided samples never merge two decided non-convergent
    segments: within each non-Convergent run, decided (Periodic/Escaped)
    sub-runs are counted separately, and a run consisting purely of
    Undecided samples counts once.
    """
    codes = np.asarray(codes)
    total = 0
    i = 0
    n = len(codes)
    while i < n:
        if codes[i] == CLASS_CONVERGENT:
            i += 1
            continue
        j = i
        while j < n and codes[j] != CLASS_CONVERGENT:
            j += 1
        run = codes[i:j]
        decided = (run == CLASS_PERIODIC) | (run == CLASS_ESCAPED)
        if not np.any(decided):
            total += 1
        else:
            # count maximal decided sub-runs
            d = decided.astype(int)
            total += int(np.sum((d[1:] == 1) & (d[:-1] == 0)) + d[0])
        i = j
    return total


def label_changes(census: LineCensus) -> int:
    """Number of basin-label switches along the line (Convergent samples only)."""
    labels = census.eq_index[census.codes == CLASS_CONVERGENT]
    if len(labels) < 2:
        return 0
    return int(np.sum(labels[1:] != labels[:-1]))


def run_line_census(
    system: SystemSpec,
    foliation: FoliationSpec,
    budget: CensusBudget = CensusBudget(),
    seed: int = 0,
    equilibria: Optional[EquilibriumSet] = None,
    line_indices=None,
    order_check_fraction: float = 0.05,
    search_budget: SearchBudget = SearchBudget(),
) -> list:
    """Classify every sample on the selected foliation lines.

    Each line is one shared-step integrator batch: batch composition (and
    with it the step sequence) must be a function of the line alone, never
    of how lines are partitioned over workers, so parallel runs are
    bit-identical to serial ones.  On each line a seeded random subsample
    (default 5%) of consecutive sample pairs is pushed through the order
    oracle, asserting the ordered-line property (consecutive differences
    are positive multiples of v, hence StrictlyLess); failures are
    recorded, not raised.  Per-line RNG streams are derived from
    (seed, line index), again independent of the work partition.
    """
    if equilibria is None:
        equilibria = find_equilibria(system)
    idx_list = (
        list(range(foliation.n_total_lines))
        if line_indices is None else list(line_indices)
    )
    fld = system.cone_field
    censuses = []
    per_line = foliation.n_points
    # one ensemble batch per line: batch composition (and with it the shared
    # step sequence) must not depend on how lines are partitioned over
    # workers, or parallel runs would not be bit-identical to serial ones
    for li in idx_list:
        s, p = foliation.line_samples(li)
        cls = classify_points(system, p, budget, equilibria=equilibria)
        codes = cls.codes
        n_dec_nc = int(np.sum((codes != CLASS_CONVERGENT) & (codes != CLASS_UNDECIDED)))
        n_nc = int(np.sum(codes != CLASS_CONVERGENT))
        length = float(foliation.chords[li][1] - foliation.chords[li][0])
        # ordered-line spot check on consecutive pairs
        rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(int(li),))
        )
        n_check = max(1, int(round(order_check_fraction * (per_line - 1))))
        pair_ids = rng.choice(per_line - 1, size=min(n_check, per_line - 1), replace=False)
        failed = und = 0
        for k in pair_ids:
            v = compare(fld, p[k], p[k + 1], search_budget)
            if v.relation == STRICTLY_LESS:
                continue
            if v.relation == UNDECIDED:
                und += 1
            else:
                failed += 1
        censuses.append(LineCensus(
            line_index=int(li),
            offset=foliation.offsets[li],
            s_values=s,
            codes=codes,
            eq_index=cls.eq_index,
            residuals=cls.residual,
            t_used=cls.t_used,
            chord=tuple(foliation.chords[li]),
            cluster_count=cluster_count(codes),
            mu_y=n_dec_nc / per_line * length,
            mu_y_upper=n_nc / per_line * length,
            order_pairs_checked=len(pair_ids),
            order_pairs_failed=failed,
            order_pairs_undecided=und,
        ))
    return censuses


# ---------------------------------------------------------------------------
# measure estimation
# ---------------------------------------------------------------------------


def _sample_weights(system: SystemSpec, pts: np.ndarray) -> np.ndarray:
    """Riemannian volume density at each point (1 on flat charts)."""
    man = system.manifold
    if man.kind == "euclidean":
        return np.ones(len(pts))
    return np.array([volume_density(man, p) for p in pts])


def _weighted_nonconv(system, pts, codes, include_undecided: bool):
    mask = codes != CLASS_CONVERGENT
    if not include_undecided:
        mask &= codes != CLASS_UNDECIDED
    if not np.any(mask):
        return 0.0
    return float(np.sum(_sample_weights(system, pts[mask])))


@dataclass
class CensusReport:
    """Joined measure estimates and per-line summaries for one census."""

    system_name: str
    foliation: FoliationSpec
    budget: CensusBudget
    censuses: list
    equilibria: EquilibriumSet
    fubini_estimate: float
    fubini_upper: float
    fubini_sigma: float
    mc_estimate: float
    mc_upper: float
    mc_sigma: float
    mc_n: int
    region_volume: float
    nonconvergent_fraction: float
    undecided_fraction: float
    basin_fractions: dict
    refinement: list            # dicts: factor, n_points, fraction, fubini, ...
    estimators_agree: bool
    agreement_gap: float

    @property
    def n_samples(self) -> int:
        return sum(c.n_points for c in self.censuses)

    @property
    def cluster_counts(self) -> list:
        return [c.cluster_count for c in self.censuses]

    @property
    def order_check_failures(self) -> int:
        return sum(c.order_pairs_failed for c in self.censuses)


def _fubini_sum(system, foliation, censuses, include_undecided):
    """Line-by-line product estimator sum_u mu_y(u) du with chart weights."""
    du = foliation.offset_cell_volume
    total = 0.0
    flat = system.manifold.kind == "euclidean"
    for c in censuses:
        if flat:
            mu = c.mu_y_upper if include_undecided else c.mu_y
        else:
            _, pts = foliation.line_samples(c.line_index, len(c.s_values))
            w = _weighted_nonconv(system, pts, c.codes, include_undecided)
            mu = w / len(c.s_values) * c.length
        total += mu * du
    return total


def measure_estimate(
    system: SystemSpec,
    foliation: FoliationSpec,
    budget: CensusBudget = CensusBudget(),
    seed: int = 0,
    censuses: Optional[list] = None,
    refinements: tuple = (1, 2, 4),
    mc_samples: Optional[int] = None,
    equilibria: Optional[EquilibriumSet] = None,
) -> CensusReport:
    """Estimate the chart measure of the non-convergent set two ways.

    Product (Fubini) estimator: sum over lines of mu_y times the offset
    cell volume.  Direct estimator: uniform Monte-Carlo over the box with
    a matched sample count, scaled by the box volume.  Both use the chart
    Lebesgue measure, corrected by the metric volume density off flat
    charts.  The agreement flag compares the estimates against three
    combined standard deviations with a rule-of-three floor (zero-count
    censuses get sigma_floor = volume / N), so two exact zeros agree.

    ``refinements`` re-runs the census with the same lines at multiples of
    the per-line point count; the series of non-convergent fractions is
    the resolution-scaling evidence (a codimension-1 set halves its
    fraction when the 1-D resolution doubles).
    """
    if equilibria is None:
        equilibria = find_equilibria(system)
    if censuses is None:
        censuses = run_line_census(
            system, foliation, budget, seed=seed, equilibria=equilibria
        )

    lo, hi = foliation.region
    vol = float(np.prod(hi - lo))
    refinement = []
    base_fraction = None
    for factor in refinements:
        if factor == 1:
            cs = censuses
        else:
            cs = run_line_census(
                system, foliation.refined(factor), budget,
                seed=seed, equilibria=equilibria,
            )
        n_tot = sum(c.n_points for c in cs)
        n_dec_nc = sum(
            int(np.sum((c.codes != CLASS_CONVERGENT) & (c.codes != CLASS_UNDECIDED)))
            for c in cs
        )
        n_und = sum(c.n_undecided for c in cs)
        frac = n_dec_nc / n_tot
        if factor == 1:
            base_fraction = frac
        refinement.append({
            "factor": factor,
            "n_points": foliation.n_points * factor,
            "n_samples": n_tot,
            "nonconvergent_fraction": frac,
            "undecided_fraction": n_und / n_tot,
            "fubini": _fubini_sum(system, foliation, cs, False),
            "fubini_upper": _fubini_sum(system, foliation, cs, True),
            "max_cluster_count": max(c.cluster_count for c in cs),
        })

    fub = refinement[0]["fubini"]
    fub_up = refinement[0]["fubini_upper"]
    n_census = refinement[0]["n_samples"]
    q = base_fraction
    fub_sigma = vol * float(np.sqrt(max(q * (1 - q), 0.0) / n_census))

    # direct Monte-Carlo over the same box with a matched sample count
    n_mc = mc_samples if mc_samples is not None else n_census
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(9002,)))
    mc_pts = rng.uniform(lo, hi, size=(n_mc, len(lo)))
    mc_cls = classify_points(system, mc_pts, budget, equilibria=equilibria)
    w_nc = _weighted_nonconv(system, mc_pts, mc_cls.codes, False)
    w_up = _weighted_nonconv(system, mc_pts, mc_cls.codes, True)
    mc_est = vol * w_nc / n_mc
    mc_up = vol * w_up / n_mc
    q_mc = float(np.mean(
        (mc_cls.codes != CLASS_CONVERGENT) & (mc_cls.codes != CLASS_UNDECIDED)
    ))
    mc_sigma = vol * float(np.sqrt(max(q_mc * (1 - q_mc), 0.0) / n_mc))

    # rule-of-three floor keeps the zero-count comparison meaningful
    floor = vol / max(n_census, n_mc)
    gap = abs(fub - mc_est)
    agree = gap <= 3 * max(fub_sigma, floor) and gap <= 3 * max(mc_sigma, floor)

    n_all = sum(c.n_points for c in censuses)
    basin: dict = {}
    for c in censuses:
        conv = c.codes == CLASS_CONVERGENT
        for k in np.unique(c.eq_index[conv]):
            basin[int(k)] = basin.get(int(k), 0) + int(np.sum(conv & (c.eq_index == k)))
    basin_fractions = {k: v / n_all for k, v in sorted(basin.items())}

    return CensusReport(
        system_name=system.name,
        foliation=foliation,
        budget=budget,
        censuses=censuses,
        equilibria=equilibria,
        fubini_estimate=fub,
        fubini_upper=fub_up,
        fubini_sigma=fub_sigma,
        mc_estimate=mc_est,
        mc_upper=mc_up,
        mc_sigma=mc_sigma,
        mc_n=n_mc,
        region_volume=vol,
        nonconvergent_fraction=base_fraction,
        undecided_fraction=refinement[0]["undecided_fraction"],
        basin_fractions=basin_fractions,
        refinement=refinement,
        estimators_agree=agree,
        agreement_gap=gap,
    )


# ---------------------------------------------------------------------------
# countability probe
# ---------------------------------------------------------------------------


@dataclass
class CountabilityReport:
    """Finite-resolution consequences of per-line countability."""

    n_lines: int
    base_counts: list
    refined_counts: list
    n_unstable: int              # lines whose refined count exceeds the base count
    n_disjointness_checks: int
    n_shared_omega: int          # violations: distant samples sharing omega points
    details: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.n_unstable == 0 and self.n_shared_omega == 0


def countability_probe(
    system: SystemSpec,
    foliation: FoliationSpec,
    base_censuses: list,
    refined_censuses: Optional[list] = None,
    budget: CensusBudget = CensusBudget(),
    seed: int = 0,
    equilibria: Optional[EquilibriumSet] = None,
) -> CountabilityReport:
    """Probe the countable-per-line structure of the non-convergent set.

    Two finite proxies: (1) per-line cluster counts must not increase
    under 2x point refinement (a genuine isolated crossing splits into at
    most one refined cluster); (2) non-convergent samples on the same line
    farther apart than 10 grid steps must have disjoint omega samples at
    eps_conv resolution -- distinct non-convergent points of an ordered
    line cannot share limit points.
    """
    if refined_censuses is None:
        refined_censuses = run_line_census(
            system, foliation.refined(2), budget, seed=seed,
            equilibria=equilibria,
            line_indices=[c.line_index for c in base_censuses],
        )
    by_line = {c.line_index: c for c in refined_censuses}
    base_counts, refined_counts, details = [], [], []
    n_unstable = 0
    for c in base_censuses:
        rc = by_line[c.line_index]
        base_counts.append(c.cluster_count)
        refined_counts.append(rc.cluster_count)
        if rc.cluster_count > c.cluster_count:
            n_unstable += 1
            details.append({
                "line": c.line_index,
                "base": c.cluster_count,
                "refined": rc.cluster_count,
            })

    ob = budget.omega_budget()
    n_checks = 0
    n_shared = 0
    for c in base_censuses:
        nc_idx = np.nonzero(c.codes != CLASS_CONVERGENT)[0]
        if len(nc_idx) < 2:
            continue
        step = c.s_values[1] - c.s_values[0] if len(c.s_values) > 1 else c.length
        _, pts = foliation.line_samples(c.line_index, c.n_points)
        for a in range(len(nc_idx)):
            for b in range(a + 1, len(nc_idx)):
                i, j = nc_idx[a], nc_idx[b]
                if abs(c.s_values[j] - c.s_values[i]) <= 10 * step:
                    continue
                n_checks += 1
                ea = omega_estimate(system, pts[i], ob)
                eb = omega_estimate(system, pts[j], ob)
                d = np.linalg.norm(
                    ea.omega_samples[:, None, :] - eb.omega_samples[None, :, :],
                    axis=2,
                )
                if d.min() < budget.eps_conv:
                    n_shared += 1
                    details.append({
                        "line": c.line_index, "samples": (int(i), int(j)),
                        "min_omega_distance": float(d.min()),
                    })
    return CountabilityReport(
        n_lines=len(base_censuses),
        base_counts=base_counts,
        refined_counts=refined_counts,
        n_unstable=n_unstable,
        n_disjointness_checks=n_checks,
        n_shared_omega=n_shared,
        details=details,
    )
