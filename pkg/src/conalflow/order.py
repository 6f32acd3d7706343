"""The conal order: x <= y iff a conal curve runs from x to y.

Deciding the order is done through a chain of oracles, most complete first:

1. equality (reflexive queries answered Less with an equality flag);
2. constant cone field on a flat chart: y - x in K decides exactly,
   strictly when interior;
3. the positive-semidefinite cone field on the SPD manifold (constant or
   congruence-transported, which are the same field): the Loewner test on
   Y - X, decided exactly by the extreme eigenvalues;
4. greedy conal-curve search, which can confirm order by exhibiting a
   curve but can never refute it -- failures map to Undecided.

``Incomparable`` is only ever produced by the complete oracles (2, 3): it
asserts that neither x <= y nor y <= x.  The search oracle reports
``Undecided`` when its budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import cones, geometry
from .cones import ConeFieldSpec, STRICT_TOL
from .errors import ArgumentError, DomainError
from .geometry import Point, sym_to_vec

__all__ = [
    "OrderVerdict",
    "ConalCurve",
    "SearchBudget",
    "OrderedPairSequence",
    "QuasiClosednessReport",
    "AntisymmetryReport",
    "compare",
    "conal_curve_search",
    "antisymmetry_diagnostic",
    "quasi_closedness_probe",
]

STRICTLY_LESS = "StrictlyLess"
LESS = "Less"
INCOMPARABLE = "Incomparable"
UNDECIDED = "Undecided"

ORACLE_CONSTANT = "AnalyticConstant"
ORACLE_LOEWNER = "Loewner"
ORACLE_SEARCH = "CurveSearch"
ORACLE_EQUALITY = "Equality"


@dataclass(frozen=True)
class SearchBudget:
    """Resource limits for the greedy conal-curve search.

    ``target_radius`` (epsilon) is the chart distance at which the target
    counts as reached; the default step is half of it.
    """

    target_radius: float = 1e-3
    step: Optional[float] = None
    max_steps: int = 100_000

    @property
    def h(self) -> float:
        return self.step if self.step is not None else self.target_radius / 2


@dataclass
class ConalCurve:
    """Piecewise linear curve whose recorded tangents lie in the cone field.

    ``margins[k]`` is the cone margin of ``tangents[k]`` at ``nodes[k]``;
    min_margin > strict_tol certifies the curve is strictly conal.
    """

    nodes: np.ndarray       # (N, dim)
    tangents: np.ndarray    # (N-1, dim), unit
    margins: np.ndarray     # (N-1,)
    min_margin: float
    reached: bool
    final_gap: float


@dataclass
class OrderVerdict:
    relation: str                     # StrictlyLess | Less | Incomparable | Undecided
    oracle_used: str
    equal: bool = False
    margin: Optional[float] = None
    witness: Optional[ConalCurve] = None
    reason: str = ""

    @property
    def decided_leq(self) -> bool:
        """x <= y holds (Less or StrictlyLess)."""
        return self.relation in (LESS, STRICTLY_LESS)

    def __str__(self):
        extra = " (equal)" if self.equal else ""
        return f"{self.relation}{extra} [{self.oracle_used}]"


def _field_of(subject) -> ConeFieldSpec:
    if isinstance(subject, ConeFieldSpec):
        return subject
    fld = getattr(subject, "cone_field", None)
    if isinstance(fld, ConeFieldSpec):
        return fld
    raise ArgumentError("expected a ConeFieldSpec or an object with .cone_field")


def _as_point(fld: ConeFieldSpec, x) -> Point:
    if isinstance(x, Point):
        if x.manifold != fld.manifold:
            raise ArgumentError("point manifold does not match the cone field")
        p = x
    else:
        x = np.asarray(x, dtype=float)
        if fld.manifold.kind == "spd" and x.ndim == 2:
            x = sym_to_vec(x)
        p = Point(fld.manifold, x)
    if fld.manifold.kind == "spd":
        # order queries require points on the manifold proper
        w = np.linalg.eigvalsh(p.as_matrix())
        if w.min() <= 1e-12:
            raise DomainError(
                f"matrix with min eigenvalue {w.min():.3e} is not SPD"
            )
    return p


def _is_loewner_field(fld: ConeFieldSpec) -> bool:
    """True when the field is the PSD cone on SPD in any of its equal guises.

    The congruence transport maps the PSD cone onto itself (congruence by an
    invertible matrix preserves semidefiniteness), so the transported PSD
    field equals the constant PSD field; both reduce to the Loewner order.
    """
    if fld.manifold.kind != "spd" or fld.cone is None:
        return False
    if fld.cone.variant != "psd":
        return False
    if fld.variant == "constant":
        return True
    return fld.variant == "transported" and fld.transport.kind == "spd_congruence"


def compare(
    subject,
    x,
    y,
    budget: SearchBudget = SearchBudget(),
    strict_tol: float = STRICT_TOL,
) -> OrderVerdict:
    """Decide the conal order between x and y.

    ``subject`` may be a ConeFieldSpec or a SystemSpec (whose cone field is
    used).  Returns an :class:`OrderVerdict`; see the module docstring for
    the oracle chain.  Complete oracles may also return Incomparable; the
    curve search never does.
    """
    fld = _field_of(subject)
    px = _as_point(fld, x)
    py = _as_point(fld, y)
    if np.array_equal(px.coords, py.coords):
        return OrderVerdict(
            relation=LESS, oracle_used=ORACLE_EQUALITY, equal=True, margin=0.0,
            reason="reflexive query",
        )
    if _is_loewner_field(fld):
        return _loewner_compare(fld, px, py, strict_tol)
    if fld.variant == "constant" and fld.manifold.kind in ("euclidean", "chart"):
        return _constant_compare(fld, px, py, strict_tol)
    # incomplete fallback: exhibit a curve or give up
    fwd = conal_curve_search(fld, px, py, budget)
    if fwd is not None and fwd.reached:
        rel = STRICTLY_LESS if fwd.min_margin > strict_tol else LESS
        return OrderVerdict(
            relation=rel, oracle_used=ORACLE_SEARCH,
            margin=fwd.min_margin, witness=fwd,
        )
    return OrderVerdict(
        relation=UNDECIDED, oracle_used=ORACLE_SEARCH,
        reason="curve search exhausted its budget without reaching the target",
    )


def _constant_compare(fld, px, py, strict_tol) -> OrderVerdict:
    k = fld.cone
    d = py.coords - px.coords
    m_fwd = cones.margin(k, d)
    if m_fwd > strict_tol:
        return OrderVerdict(STRICTLY_LESS, ORACLE_CONSTANT, margin=m_fwd)
    if m_fwd >= -strict_tol:
        return OrderVerdict(LESS, ORACLE_CONSTANT, margin=m_fwd)
    m_bwd = cones.margin(k, -d)
    reason = (
        "y - x outside the cone; reverse order holds" if m_bwd >= -strict_tol
        else "neither y - x nor x - y lies in the cone"
    )
    return OrderVerdict(INCOMPARABLE, ORACLE_CONSTANT, margin=m_fwd, reason=reason)


def _loewner_compare(fld, px, py, strict_tol) -> OrderVerdict:
    diff = py.as_matrix() - px.as_matrix()
    scale = np.linalg.norm(diff, ord="fro")
    if scale == 0.0:
        return OrderVerdict(LESS, ORACLE_LOEWNER, equal=True, margin=0.0)
    w = np.linalg.eigvalsh(diff)
    m_fwd = float(w.min() / scale)
    if m_fwd > strict_tol:
        return OrderVerdict(STRICTLY_LESS, ORACLE_LOEWNER, margin=m_fwd)
    if m_fwd >= -strict_tol:
        return OrderVerdict(LESS, ORACLE_LOEWNER, margin=m_fwd)
    m_bwd = float((-w).min() / scale)
    reason = (
        "Y - X indefinite: neither direction ordered" if m_bwd < -strict_tol
        else "X - Y is positive semidefinite; reverse order holds"
    )
    return OrderVerdict(INCOMPARABLE, ORACLE_LOEWNER, margin=m_fwd, reason=reason)


# ---------------------------------------------------------------------------
# curve search
# ---------------------------------------------------------------------------

# progress per step below this fraction of the step length counts as a stall
_STALL_TOL = 1e-6


def conal_curve_search(
    subject,
    x,
    y,
    budget: SearchBudget = SearchBudget(),
) -> Optional[ConalCurve]:
    """Greedy steering search for a conal curve from x to y.

    At the current point p with displacement d = y - p, the tangent chosen
    is the unit direction maximizing <d, u> over the cone at p, i.e. the
    normalized cone projection of d (closed form for the orthant and
    second-order cones, small optimization problems for the others).  The
    search succeeds when the chart distance to y drops below the budget's
    target radius; it returns None when it stalls (no cone direction makes
    progress toward y) or the step budget runs out.

    The returned curve satisfies: every recorded margin >= -strict_tol, and
    consecutive nodes differ by exactly step * tangent.
    """
    fld = _field_of(subject)
    px = _as_point(fld, x)
    py = _as_point(fld, y)
    h = budget.h
    eps = budget.target_radius
    p = px.coords.copy()
    target = py.coords
    nodes = [p.copy()]
    tangents = []
    margins = []
    reached = False
    gap = float(np.linalg.norm(target - p))
    for _ in range(budget.max_steps):
        d = target - p
        gap = float(np.linalg.norm(d))
        if gap <= eps:
            reached = True
            break
        u = cones.field_project(fld, p, d)
        nu = float(np.linalg.norm(u))
        if nu <= _STALL_TOL * gap:
            break  # the cone at p contains no direction toward y
        u = u / nu
        if float(u @ d) <= _STALL_TOL * gap:
            break  # best cone direction is orthogonal to the displacement
        m = cones.field_margin(fld, p, u)
        step = min(h, gap)
        p = p + step * u
        nodes.append(p.copy())
        tangents.append(u)
        margins.append(m)
    if not reached:
        return None
    if not tangents:
        # x already within eps of y: degenerate single-node curve
        return ConalCurve(
            nodes=np.array(nodes), tangents=np.zeros((0, p.size)),
            margins=np.zeros(0), min_margin=0.0, reached=True, final_gap=gap,
        )
    return ConalCurve(
        nodes=np.array(nodes),
        tangents=np.array(tangents),
        margins=np.array(margins),
        min_margin=float(np.min(margins)),
        reached=True,
        final_gap=gap,
    )


# ---------------------------------------------------------------------------
# hypothesis probes
# ---------------------------------------------------------------------------


@dataclass
class AntisymmetryReport:
    """Pairs ordered in both directions (x <= y and y <= x at distance > 10 eps)."""

    n_pairs: int
    violations: list
    n_undecided: int

    @property
    def holds(self) -> bool:
        return not self.violations


def antisymmetry_diagnostic(
    subject,
    region,
    n_samples: int = 100,
    seed: int = 0,
    budget: SearchBudget = SearchBudget(),
) -> AntisymmetryReport:
    """Sample point pairs in a box and look for two-way order violations.

    A violation pair satisfies compare(x, y) and compare(y, x) both in
    {Less, StrictlyLess} while d(x, y) > 10 * target_radius -- evidence that
    the conal order of the field is not antisymmetric (e.g. cone fields
    admitting closed conal loops).  An empty list means no violation was
    found at this sampling resolution; it is not a proof.
    """
    fld = _field_of(subject)
    lo, hi = region
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    rng = np.random.default_rng(seed)
    violations = []
    undecided = 0
    thresh = 10 * budget.target_radius
    for _ in range(n_samples):
        a = rng.uniform(lo, hi)
        b = rng.uniform(lo, hi)
        if np.linalg.norm(b - a) <= thresh:
            continue
        fwd = compare(fld, a, b, budget)
        if fwd.relation == UNDECIDED:
            undecided += 1
            continue
        if not fwd.decided_leq:
            continue
        bwd = compare(fld, b, a, budget)
        if bwd.relation == UNDECIDED:
            undecided += 1
        elif bwd.decided_leq:
            violations.append((a, b, fwd, bwd))
    return AntisymmetryReport(
        n_pairs=n_samples, violations=violations, n_undecided=undecided
    )


@dataclass(frozen=True)
class OrderedPairSequence:
    """A sequence of strictly ordered pairs with declared limits.

    Models the hypothesis of quasi-closedness: x_n -> x_lim, y_n -> y_lim
    with x_n strictly below y_n for every n.
    """

    xs: tuple
    ys: tuple
    x_limit: object
    y_limit: object


@dataclass
class QuasiClosednessReport:
    n_sequences: int
    n_held: int
    violations: list
    undecided: list
    domain_exits: list
    precondition_failures: list

    @property
    def holds(self) -> bool:
        return not self.violations


def quasi_closedness_probe(
    subject,
    sequences,
    budget: SearchBudget = SearchBudget(),
    strict_tol: float = STRICT_TOL,
) -> QuasiClosednessReport:
    """Check that limits of strictly ordered sequences remain ordered.

    For each sequence: every pair (x_n, y_n) must compare StrictlyLess
    (failures are recorded as precondition failures and the sequence is
    skipped); then the limit pair must compare Less or StrictlyLess.
    Limits that leave the manifold domain (e.g. singular matrices for SPD)
    are recorded as domain exits; Undecided limit comparisons are reported
    separately, not as violations.
    """
    fld = _field_of(subject)
    sequences = list(sequences)
    held, violations, undecided, exits, prefail = 0, [], [], [], []
    for i, seq in enumerate(sequences):
        ok = True
        for xn, yn in zip(seq.xs, seq.ys):
            try:
                v = compare(fld, xn, yn, budget, strict_tol)
            except DomainError as e:
                prefail.append((i, str(e)))
                ok = False
                break
            if v.relation != STRICTLY_LESS:
                prefail.append((i, v))
                ok = False
                break
        if not ok:
            continue
        try:
            lim = compare(fld, seq.x_limit, seq.y_limit, budget, strict_tol)
        except DomainError as e:
            exits.append((i, str(e)))
            continue
        if lim.decided_leq:
            held += 1
        elif lim.relation == UNDECIDED:
            undecided.append((i, lim))
        else:
            violations.append((i, lim))
    return QuasiClosednessReport(
        n_sequences=len(sequences),
        n_held=held,
        violations=violations,
        undecided=undecided,
        domain_exits=exits,
        precondition_failures=prefail,
    )
