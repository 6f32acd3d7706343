"""Convex cones, cone fields, and membership oracles.

Five cone representations share one interface:

* ``orthant``        -- the nonnegative orthant in R^n.
* ``halfspaces``     -- { v : <a_i, v> >= 0 } for unit normals a_i.
* ``generators``     -- closed conic hull of finitely many rays.
* ``second_order``   -- { v : angle(v, axis) <= aperture }.
* ``psd``            -- positive semidefinite matrices, in the flattened
                        symmetric chart of :mod:`conalflow.geometry`.

``margin(cone, v)`` returns a scale-invariant signed distance to the cone
boundary: positive inside the interior, ~0 on the boundary, negative outside.
Margins of different representations are comparable in sign and order of
magnitude but are not a common metric; classification thresholds below treat
``|margin| <= strict_tol`` as boundary.

A ``ConeFieldSpec`` attaches a cone to every point of a manifold, either as a
constant cone in chart coordinates, by parallel transport of a cone at a base
point, or through an arbitrary callback.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.optimize

from . import geometry
from .errors import ArgumentError
from .geometry import Point, TangentVector, TransportMap, vec_to_sym, sym_to_vec

__all__ = [
    "ConeSpec",
    "ConeFieldSpec",
    "MembershipVerdict",
    "ConeAxiomReport",
    "SemicontinuityReport",
    "STRICT_TOL",
    "orthant",
    "halfspace_cone",
    "generator_cone",
    "second_order_cone",
    "psd_cone",
    "margin",
    "classify",
    "project",
    "interior_direction",
    "sample_boundary_rays",
    "surrounds",
    "cone_axiom_report",
    "constant_field",
    "transported_field",
    "custom_field",
    "field_margin",
    "field_margin_fn",
    "field_classify",
    "field_interior_direction",
    "field_boundary_rays",
    "field_project",
    "contains",
    "interior_margin",
    "semicontinuity_probe",
]

# |margin| below this is classified as boundary
STRICT_TOL = 1e-9

INSIDE = "Inside"
BOUNDARY = "Boundary"
OUTSIDE = "Outside"


@dataclass(frozen=True)
class MembershipVerdict:
    kind: str  # Inside | Boundary | Outside
    margin: float

    def __bool__(self):
        return self.kind != OUTSIDE


# ---------------------------------------------------------------------------
# cone construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """A closed convex cone in R^dim.

    Use the constructor helpers (:func:`orthant`, :func:`halfspace_cone`,
    :func:`generator_cone`, :func:`second_order_cone`, :func:`psd_cone`)
    rather than instantiating directly.
    """

    variant: str
    dim: int
    normals: Optional[np.ndarray] = None        # (m, dim), unit rows
    generators: Optional[np.ndarray] = None     # (k, dim), unit rows
    axis: Optional[np.ndarray] = None           # (dim,), unit
    aperture: Optional[float] = None            # radians, in (0, pi/2)
    matrix_size: Optional[int] = None           # psd
    # precomputed facet normals for solid generator cones in dim <= 3
    facet_normals: Optional[np.ndarray] = field(default=None, compare=False)
    span_rank: Optional[int] = field(default=None, compare=False)
    span_basis: Optional[np.ndarray] = field(default=None, compare=False)


def orthant(n: int) -> ConeSpec:
    """Nonnegative orthant in R^n."""
    if n < 1:
        raise ArgumentError("orthant dimension must be >= 1")
    return ConeSpec(variant="orthant", dim=n)


def halfspace_cone(normals) -> ConeSpec:
    """Intersection of halfspaces { v : <a_i, v> >= 0 }.

    Normals are normalized to unit length; zero rows are rejected.
    """
    a = np.atleast_2d(np.asarray(normals, dtype=float))
    if a.ndim != 2 or a.shape[0] < 1:
        raise ArgumentError("normals must be a nonempty (m, dim) array")
    lens = np.linalg.norm(a, axis=1)
    if np.any(lens < 1e-300):
        raise ArgumentError("zero normal row")
    a = a / lens[:, None]
    a = a.copy()
    a.setflags(write=False)
    return ConeSpec(variant="halfspaces", dim=a.shape[1], normals=a)


def generator_cone(generators) -> ConeSpec:
    """Conic hull of the given rays (rows).

    Rays are normalized.  For solid cones in dimension <= 3 the facet normals
    are enumerated at construction time, which makes margins exact; in higher
    dimension membership is decided by nonnegative least squares and interior
    margins are sampled estimates.
    """
    g = np.atleast_2d(np.asarray(generators, dtype=float))
    if g.ndim != 2 or g.shape[0] < 1:
        raise ArgumentError("generators must be a nonempty (k, dim) array")
    lens = np.linalg.norm(g, axis=1)
    if np.any(lens < 1e-300):
        raise ArgumentError("zero generator row")
    g = g / lens[:, None]
    dim = g.shape[1]
    # span of the cone
    u, s, vt = np.linalg.svd(g, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * max(s[0], 1.0))) if g.size else 0
    span = vt[:rank]
    facets = None
    if rank == dim and dim <= 3:
        facets = _generator_facets(g)
    g = g.copy()
    g.setflags(write=False)
    if facets is not None:
        facets.setflags(write=False)
    span = span.copy()
    span.setflags(write=False)
    return ConeSpec(
        variant="generators",
        dim=dim,
        generators=g,
        facet_normals=facets,
        span_rank=rank,
        span_basis=span,
    )


def _generator_facets(g: np.ndarray) -> Optional[np.ndarray]:
    """Inward facet normals of a solid generator cone, dim in {1, 2, 3}.

    Returns unit rows a_i with cone = { v : a_i . v >= 0 }, or None if the
    cone is not pointed/salient enough for the enumeration to make sense
    (e.g. it is all of R^dim, for which there are no facets).
    """
    dim = g.shape[1]
    if dim == 1:
        signs = set(np.sign(g[:, 0]))
        if signs == {1.0}:
            return np.array([[1.0]])
        if signs == {-1.0}:
            return np.array([[-1.0]])
        return np.zeros((0, 1))  # whole line: no facets
    candidates = []
    if dim == 2:
        # rotate each generator by +-90 degrees
        for v in g:
            for rot in (np.array([-v[1], v[0]]), np.array([v[1], -v[0]])):
                candidates.append(rot)
    else:
        for i, j in itertools.combinations(range(len(g)), 2):
            c = np.cross(g[i], g[j])
            nl = np.linalg.norm(c)
            if nl > 1e-12:
                candidates.append(c / nl)
                candidates.append(-c / nl)
    facets = []
    for a in candidates:
        d = g @ a
        if np.all(d >= -1e-10) and np.any(np.abs(d) <= 1e-10):
            if not any(np.allclose(a, f, atol=1e-9) for f in facets):
                facets.append(a)
    if not facets:
        return np.zeros((0, dim))
    return np.array(facets)


def second_order_cone(axis, aperture: float) -> ConeSpec:
    """Circular cone { v : angle(v, axis) <= aperture }, aperture in (0, pi/2)."""
    ax = np.asarray(axis, dtype=float)
    nl = np.linalg.norm(ax)
    if nl < 1e-300:
        raise ArgumentError("axis must be nonzero")
    if not (0.0 < aperture < np.pi / 2):
        raise ArgumentError("aperture must lie in (0, pi/2)")
    ax = ax / nl
    ax.setflags(write=False)
    return ConeSpec(
        variant="second_order", dim=ax.shape[0], axis=ax, aperture=float(aperture)
    )


def psd_cone(n: int) -> ConeSpec:
    """PSD matrices of size n, flattened as in :mod:`conalflow.geometry`."""
    if n < 1:
        raise ArgumentError("matrix size must be >= 1")
    return ConeSpec(variant="psd", dim=n * (n + 1) // 2, matrix_size=n)


# ---------------------------------------------------------------------------
# margins and classification
# ---------------------------------------------------------------------------


def margin(cone: ConeSpec, v) -> float:
    """Scale-invariant signed boundary distance of v relative to the cone.

    The zero vector always has margin 0 (it lies on the boundary of every
    pointed cone and is never interior).
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (cone.dim,):
        raise ArgumentError(f"vector dim {v.shape} does not match cone dim {cone.dim}")
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    if cone.variant == "orthant":
        return float(v.min() / nv)
    if cone.variant == "halfspaces":
        return float((cone.normals @ v).min() / nv)
    if cone.variant == "second_order":
        c = float(cone.axis @ v) / nv
        return c - float(np.cos(cone.aperture))
    if cone.variant == "psd":
        m = vec_to_sym(v, cone.matrix_size)
        w = np.linalg.eigvalsh(m)
        return float(w.min() / np.linalg.norm(m, ord="fro"))
    return _generator_margin(cone, v / nv)


def _nnls_residual(gens: np.ndarray, v: np.ndarray):
    coef, res = scipy.optimize.nnls(gens.T, v)
    return coef, res


def _generator_margin(cone: ConeSpec, vhat: np.ndarray) -> float:
    g = cone.generators
    if cone.span_rank < cone.dim:
        # cone has empty interior: members are at best boundary (margin 0);
        # the NNLS residual measures the distance to the cone (it subsumes
        # any off-span component of vhat)
        _, res = _nnls_residual(g, vhat)
        return -float(res) if res > 1e-10 else 0.0
    if cone.facet_normals is not None:
        if cone.facet_normals.shape[0] == 0:
            return 1.0  # cone is all of R^dim
        return float((cone.facet_normals @ vhat).min())
    # dim > 3: classification from the NNLS residual; interior margin is a
    # sampled lower-bound estimate (distance to infeasibility along probes)
    _, res = _nnls_residual(g, vhat)
    if res > 1e-10:
        return -float(res)
    return _generator_inside_estimate(cone, vhat)


def _generator_inside_estimate(cone: ConeSpec, vhat: np.ndarray, n_probe: int = 16) -> float:
    """Estimated interior margin of a unit vector in a high-dim generator cone.

    Bisects along probe directions for the largest step that stays in the
    cone; the minimum over probes lower-bounds the true boundary distance up
    to probe coverage.  Deterministic (fixed probe seed).
    """
    g = cone.generators
    rng = np.random.default_rng(12345)
    dirs = [np.eye(cone.dim)[k] for k in range(cone.dim)]
    dirs += [-d for d in dirs]
    extra = rng.standard_normal((n_probe, cone.dim))
    dirs += [d / np.linalg.norm(d) for d in extra]

    def feasible(u):
        _, res = _nnls_residual(g, u)
        return res <= 1e-9

    if not feasible(vhat):
        return 0.0
    best = np.inf
    for d in dirs:
        lo, hi = 0.0, 1.0
        if feasible(vhat + hi * d):
            best = min(best, hi)
            continue
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            if feasible(vhat + mid * d):
                lo = mid
            else:
                hi = mid
        best = min(best, lo)
        if best == 0.0:
            break
    return float(best)


def classify(cone: ConeSpec, v, strict_tol: float = STRICT_TOL) -> MembershipVerdict:
    """Three-valued membership: Inside / Boundary / Outside."""
    m = margin(cone, v)
    if m > strict_tol:
        return MembershipVerdict(INSIDE, m)
    if m < -strict_tol:
        return MembershipVerdict(OUTSIDE, m)
    return MembershipVerdict(BOUNDARY, m)


# ---------------------------------------------------------------------------
# projection (Moreau decomposition) -- used by the conal-curve steering
# ---------------------------------------------------------------------------


def project(cone: ConeSpec, v) -> np.ndarray:
    """Euclidean projection of v onto the cone.

    Orthant: componentwise clip.  Generators: NNLS fit.  Halfspaces: Moreau
    decomposition against the polar cone(-a_i), again via NNLS.  Second
    order: the standard closed form.  PSD: eigenvalue clipping.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (cone.dim,):
        raise ArgumentError("vector dim does not match cone dim")
    if cone.variant == "orthant":
        return np.maximum(v, 0.0)
    if cone.variant == "generators":
        coef, _ = _nnls_residual(cone.generators, v)
        return cone.generators.T @ coef
    if cone.variant == "halfspaces":
        # proj_K(v) = v + A^T lam, lam = argmin_{lam>=0} |v + A^T lam|
        lam, _ = scipy.optimize.nnls(cone.normals.T, -v)
        return v + cone.normals.T @ lam
    if cone.variant == "psd":
        m = vec_to_sym(v, cone.matrix_size)
        w, q = np.linalg.eigh(m)
        return sym_to_vec((q * np.maximum(w, 0.0)) @ q.T)
    # second order cone {alpha >= |w| / tan(theta)} with v = alpha*axis + w
    t = np.tan(cone.aperture)
    alpha = float(cone.axis @ v)
    w = v - alpha * cone.axis
    rho = float(np.linalg.norm(w))
    if rho <= t * alpha:
        return v.copy()
    if alpha <= -rho * t:
        return np.zeros_like(v)
    alpha_new = (alpha + t * rho) / (1.0 + t * t)
    if rho == 0.0:
        return alpha_new * cone.axis
    return alpha_new * cone.axis + (t * alpha_new) * (w / rho)


# ---------------------------------------------------------------------------
# interior directions and boundary sampling
# ---------------------------------------------------------------------------


def interior_direction(cone: ConeSpec) -> np.ndarray:
    """A unit vector with strictly positive margin; raises if the cone is not solid."""
    if cone.variant == "orthant":
        v = np.ones(cone.dim)
    elif cone.variant == "second_order":
        v = cone.axis.copy()
    elif cone.variant == "psd":
        v = sym_to_vec(np.eye(cone.matrix_size))
    elif cone.variant == "generators":
        if cone.span_rank < cone.dim:
            raise ArgumentError("generator cone is not solid; no interior direction")
        v = cone.generators.sum(axis=0)
        if margin(cone, v) <= STRICT_TOL:
            # fall back to a Chebyshev-style search over convex weights
            v = _chebyshev_direction(cone.facet_normals if cone.facet_normals is not None else cone.generators)
    else:
        v = _chebyshev_direction(cone.normals)
    v = v / np.linalg.norm(v)
    if margin(cone, v) <= STRICT_TOL:
        raise ArgumentError("cone has empty interior (not solid)")
    return v


def _chebyshev_direction(normals: np.ndarray) -> np.ndarray:
    """maximize m s.t. A u >= m, |u|_inf <= 1 -- LP for a deep interior direction."""
    m_rows, dim = normals.shape
    # variables: (u, m); objective: -m
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-normals, np.ones((m_rows, 1))])
    b_ub = np.zeros(m_rows)
    bounds = [(-1.0, 1.0)] * dim + [(None, None)]
    res = scipy.optimize.linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success or res.x[-1] <= 0:
        raise ArgumentError("cone has empty interior (not solid)")
    return res.x[:dim]


def _extreme_rays(cone: ConeSpec) -> list:
    """Extreme rays for polyhedral cones (exact in dim <= 3 for halfspaces)."""
    rays = []
    if cone.variant == "orthant":
        return [np.eye(cone.dim)[k] for k in range(cone.dim)]
    if cone.variant == "generators":
        g = cone.generators
        for j in range(len(g)):
            rest = np.delete(g, j, axis=0)
            if rest.shape[0] == 0:
                rays.append(g[j])
                continue
            _, res = _nnls_residual(rest, g[j])
            if res > 1e-9:
                rays.append(g[j])
        return rays
    if cone.variant == "halfspaces":
        a = cone.normals
        if cone.dim == 1:
            return [np.array([1.0]) if np.all(a > 0) else np.array([-1.0])]
        cands = []
        if cone.dim == 2:
            for row in a:
                cands.append(np.array([-row[1], row[0]]))
                cands.append(np.array([row[1], -row[0]]))
        elif cone.dim == 3:
            for i, j in itertools.combinations(range(len(a)), 2):
                c = np.cross(a[i], a[j])
                nl = np.linalg.norm(c)
                if nl > 1e-12:
                    cands.append(c / nl)
                    cands.append(-c / nl)
        for v in cands:
            if (a @ v).min() >= -1e-10:
                if not any(np.allclose(v, r, atol=1e-9) for r in rays):
                    rays.append(v)
        return rays
    return rays


def sample_boundary_rays(cone: ConeSpec, k: int, seed: int = 0) -> np.ndarray:
    """k unit vectors with |margin| <= 1e-9, extreme rays first for polyhedral cones.

    Deterministic for a fixed seed.
    """
    if k < 1:
        raise ArgumentError("k must be >= 1")
    rng = np.random.default_rng(seed)
    rays = []
    if cone.variant in ("orthant", "generators", "halfspaces"):
        rays = [r / np.linalg.norm(r) for r in _extreme_rays(cone)][:k]
    while len(rays) < k:
        rays.append(_random_boundary_ray(cone, rng))
    out = np.array(rays[:k])
    out.setflags(write=False)
    return out


def _random_boundary_ray(cone: ConeSpec, rng: np.random.Generator) -> np.ndarray:
    if cone.variant == "orthant":
        v = rng.uniform(0.2, 1.0, size=cone.dim)
        v[rng.integers(cone.dim)] = 0.0
        return v / np.linalg.norm(v)
    if cone.variant == "second_order":
        w = rng.standard_normal(cone.dim)
        w -= (w @ cone.axis) * cone.axis
        nl = np.linalg.norm(w)
        if nl < 1e-12:
            w = np.zeros(cone.dim)
            w[np.argmin(np.abs(cone.axis))] = 1.0
            w -= (w @ cone.axis) * cone.axis
            nl = np.linalg.norm(w)
        w /= nl
        return np.cos(cone.aperture) * cone.axis + np.sin(cone.aperture) * w
    if cone.variant == "psd":
        n = cone.matrix_size
        a = rng.standard_normal((n, n))
        q, r = np.linalg.qr(a)
        q = q * np.sign(np.diag(r))
        w = rng.uniform(0.2, 1.0, size=n)
        rank_def = rng.integers(1, n) if n > 1 else 1
        w[:rank_def] = 0.0
        m = (q * w) @ q.T
        nl = np.linalg.norm(m, ord="fro")
        if nl < 1e-12:
            m = np.outer(q[:, -1], q[:, -1])
            nl = 1.0
        return sym_to_vec(m / nl)
    # generic polyhedral: walk from an interior point toward a random outside
    # direction and bisect the boundary crossing
    center = interior_direction(cone)
    for _ in range(100):
        d = rng.standard_normal(cone.dim)
        d /= np.linalg.norm(d)
        if margin(cone, d) < -1e-6:
            lo, hi = 0.0, 1.0
            f = lambda t: margin(cone, (1 - t) * center + t * d)
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if f(mid) >= 0:
                    lo = mid
                else:
                    hi = mid
            v = (1 - lo) * center + lo * d
            return v / np.linalg.norm(v)
    raise ArgumentError("could not sample a boundary ray")


def surrounds(outer: ConeSpec, inner: ConeSpec, n_rays: int = 64, seed: int = 0,
              strict_tol: float = STRICT_TOL) -> bool:
    """True iff every sampled boundary ray of `inner` is strictly inside `outer`.

    This is a sampled sufficient statistic for "inner \\ {0} is contained in
    the interior of outer"; it is exact for polyhedral inner cones whose
    extreme rays are enumerated.
    """
    if outer.dim != inner.dim:
        raise ArgumentError("cones live in different dimensions")
    rays = sample_boundary_rays(inner, n_rays, seed=seed)
    return all(margin(outer, r) > strict_tol for r in rays)


# ---------------------------------------------------------------------------
# axiom checking
# ---------------------------------------------------------------------------


@dataclass
class ConeAxiomReport:
    convex: bool
    pointed: bool
    solid: bool
    n_samples: int
    violations: list


def cone_axiom_report(cone: ConeSpec, n_samples: int = 200, seed: int = 0) -> ConeAxiomReport:
    """Sampled convexity/pointedness check plus a constructive solidness check.

    Convexity: midpoints of random member pairs stay in the cone.  Pointed:
    no sampled member v has -v in the cone (other than ~0).  Solid: an
    interior direction exists.
    """
    rng = np.random.default_rng(seed)
    members = []
    while len(members) < n_samples:
        v = rng.standard_normal(cone.dim)
        p = project(cone, v)
        if np.linalg.norm(p) > 1e-9:
            members.append(p / np.linalg.norm(p))
    violations = []
    convex = True
    pointed = True
    for i in range(0, len(members) - 1, 2):
        mid = 0.5 * (members[i] + members[i + 1])
        if margin(cone, mid) < -1e-8:
            convex = False
            violations.append(("convexity", members[i], members[i + 1]))
    for v in members:
        if margin(cone, -v) > 1e-8:
            pointed = False
            violations.append(("pointedness", v))
            break
    try:
        interior_direction(cone)
        solid = True
    except ArgumentError:
        solid = False
    return ConeAxiomReport(
        convex=convex, pointed=pointed, solid=solid,
        n_samples=len(members), violations=violations,
    )


# ---------------------------------------------------------------------------
# cone fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConeFieldSpec:
    """A cone attached to every tangent space of a manifold.

    variant:
      * ``constant``    -- the same ConeSpec in chart coordinates everywhere.
      * ``transported`` -- cone at x is Gamma(base -> x) applied to base_cone.
      * ``custom``      -- cone_fn(point) -> ConeSpec.
    """

    manifold: geometry.ManifoldSpec
    variant: str
    cone: Optional[ConeSpec] = None
    base_point: Optional[Point] = None
    transport: Optional[TransportMap] = None
    cone_fn: Optional[Callable[[Point], ConeSpec]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.variant not in ("constant", "transported", "custom"):
            raise ArgumentError(f"unknown cone field variant {self.variant!r}")
        if self.variant == "constant" and self.cone is None:
            raise ArgumentError("constant field needs a cone")
        if self.variant == "transported" and (
            self.cone is None or self.base_point is None or self.transport is None
        ):
            raise ArgumentError("transported field needs cone, base_point, transport")
        if self.variant == "custom" and self.cone_fn is None:
            raise ArgumentError("custom field needs cone_fn")
        if self.cone is not None and self.cone.dim != self.manifold.dim:
            raise ArgumentError("cone dim does not match manifold dim")


def constant_field(manifold: geometry.ManifoldSpec, cone: ConeSpec) -> ConeFieldSpec:
    return ConeFieldSpec(manifold=manifold, variant="constant", cone=cone)


def transported_field(
    manifold: geometry.ManifoldSpec,
    cone: ConeSpec,
    base_point: Point,
    tmap: Optional[TransportMap] = None,
) -> ConeFieldSpec:
    if tmap is None:
        tmap = geometry.default_transport(manifold)
    return ConeFieldSpec(
        manifold=manifold, variant="transported", cone=cone,
        base_point=base_point, transport=tmap,
    )


def custom_field(manifold: geometry.ManifoldSpec, cone_fn) -> ConeFieldSpec:
    return ConeFieldSpec(manifold=manifold, variant="custom", cone_fn=cone_fn)


def _as_point(field_spec: ConeFieldSpec, x) -> Point:
    if isinstance(x, Point):
        return x
    return Point(field_spec.manifold, np.asarray(x, dtype=float))


def field_margin(field_spec: ConeFieldSpec, x, v) -> float:
    """Margin of tangent components v in the cone at x."""
    p = _as_point(field_spec, x)
    v = np.asarray(v.components if isinstance(v, TangentVector) else v, dtype=float)
    if field_spec.variant == "constant":
        return margin(field_spec.cone, v)
    if field_spec.variant == "custom":
        return margin(field_spec.cone_fn(p), v)
    # transported: pull v back to the base point and test there
    back = geometry.transport(
        field_spec.transport, p, field_spec.base_point,
        TangentVector(p, v),
    )
    return margin(field_spec.cone, back.components)


def field_margin_fn(field_spec: ConeFieldSpec) -> Callable[[Point, np.ndarray], float]:
    """Adapter for :func:`conalflow.geometry.verify_transport_invariance`."""
    return lambda p, comps: field_margin(field_spec, p, comps)


def field_classify(field_spec: ConeFieldSpec, x, v, strict_tol: float = STRICT_TOL) -> MembershipVerdict:
    m = field_margin(field_spec, x, v)
    if m > strict_tol:
        return MembershipVerdict(INSIDE, m)
    if m < -strict_tol:
        return MembershipVerdict(OUTSIDE, m)
    return MembershipVerdict(BOUNDARY, m)


def contains(field_spec: ConeFieldSpec, x, v, tol: float = STRICT_TOL) -> bool:
    """Closed-cone membership (margin >= -tol)."""
    return field_margin(field_spec, x, v) >= -tol


def interior_margin(field_spec: ConeFieldSpec, x, v) -> float:
    """Alias for field_margin; positive values certify interior membership."""
    return field_margin(field_spec, x, v)


def field_interior_direction(field_spec: ConeFieldSpec, x) -> np.ndarray:
    """A unit vector interior to the cone at x."""
    p = _as_point(field_spec, x)
    if field_spec.variant == "constant":
        return interior_direction(field_spec.cone)
    if field_spec.variant == "custom":
        return interior_direction(field_spec.cone_fn(p))
    v0 = interior_direction(field_spec.cone)
    moved = geometry.transport(
        field_spec.transport, field_spec.base_point, p,
        TangentVector(field_spec.base_point, v0),
    )
    v = moved.components
    return v / np.linalg.norm(v)


def field_boundary_rays(field_spec: ConeFieldSpec, x, k: int, seed: int = 0) -> np.ndarray:
    """k boundary directions of the cone at x (unit chart components)."""
    p = _as_point(field_spec, x)
    if field_spec.variant == "constant":
        return sample_boundary_rays(field_spec.cone, k, seed=seed)
    if field_spec.variant == "custom":
        return sample_boundary_rays(field_spec.cone_fn(p), k, seed=seed)
    base_rays = sample_boundary_rays(field_spec.cone, k, seed=seed)
    out = []
    for r in base_rays:
        moved = geometry.transport(
            field_spec.transport, field_spec.base_point, p,
            TangentVector(field_spec.base_point, r),
        )
        v = moved.components
        out.append(v / np.linalg.norm(v))
    return np.array(out)


def field_project(field_spec: ConeFieldSpec, x, v) -> np.ndarray:
    """Projection of v onto the cone at x (exact for constant/custom fields).

    For transported fields the projection is computed in the base cone after
    pulling back with the transport adjoint, then pushed forward; this yields
    the maximizer of <v, u> over unit u in the cone when the transport is an
    isometry of the chart inner product, and a valid cone member in general.
    """
    p = _as_point(field_spec, x)
    v = np.asarray(v, dtype=float)
    if field_spec.variant == "constant":
        return project(field_spec.cone, v)
    if field_spec.variant == "custom":
        return project(field_spec.cone_fn(p), v)
    gmat = geometry.transport_matrix(field_spec.transport, field_spec.base_point, p)
    w = project(field_spec.cone, gmat.T @ v)
    return gmat @ w


# ---------------------------------------------------------------------------
# semicontinuity probe
# ---------------------------------------------------------------------------


@dataclass
class SemicontinuityReport:
    n_samples: int
    upper_violations: list
    lower_violations: list
    worst_upper_margin: float
    worst_lower_margin: float

    @property
    def consistent(self) -> bool:
        return not self.upper_violations and not self.lower_violations


def semicontinuity_probe(
    field_spec: ConeFieldSpec,
    x,
    radius: float = 1e-3,
    n_samples: int = 100,
    slack: float = 0.05,
    seed: int = 0,
) -> SemicontinuityReport:
    """Probe continuity of the cone field near x.

    Upper direction: rays well inside the cone at x (margin >= slack) should
    not be strictly outside (margin <= -slack) at nearby points y.  Lower
    direction: rays well outside at x should not be strictly inside nearby.
    Violations at the given slack indicate the field jumps discontinuously
    at scale `radius`.
    """
    p = _as_point(field_spec, x)
    rng = np.random.default_rng(seed)
    dim = field_spec.manifold.dim
    upper, lower = [], []
    worst_up, worst_lo = np.inf, -np.inf
    for _ in range(n_samples):
        y = Point(field_spec.manifold, p.coords + radius * rng.standard_normal(dim))
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        m_here = field_margin(field_spec, p, v)
        m_near = field_margin(field_spec, y, v)
        if m_here >= slack:
            worst_up = min(worst_up, m_near)
            if m_near <= -slack:
                upper.append((y, v, m_here, m_near))
        elif m_here <= -slack:
            worst_lo = max(worst_lo, m_near)
            if m_near >= slack:
                lower.append((y, v, m_here, m_near))
    return SemicontinuityReport(
        n_samples=n_samples,
        upper_violations=upper,
        lower_violations=lower,
        worst_upper_margin=float(worst_up) if np.isfinite(worst_up) else np.nan,
        worst_lower_margin=float(worst_lo) if np.isfinite(worst_lo) else np.nan,
    )
