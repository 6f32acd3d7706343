"""Riemannian geometry primitives: manifolds, tangent vectors, transport.

Three chart models are supported:

* ``euclidean`` -- R^n with the flat metric; tangent spaces identified with R^n.
* ``spd``       -- the manifold of symmetric positive definite n x n matrices
                   with the affine-invariant metric
                   ``<U, V>_X = tr(X^-1 U X^-1 V)``.
                   Points and tangent vectors are stored in chart coordinates
                   obtained by flattening the upper triangle row-major
                   (dimension n(n+1)/2).
* ``chart``     -- a single user-supplied chart on R^dim with an optional
                   position-dependent Gram matrix.

All functions are pure: they never mutate their inputs, so they are safe to
call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import ArgumentError, DomainError

__all__ = [
    "ManifoldSpec",
    "Point",
    "TangentVector",
    "TransportMap",
    "InvarianceReport",
    "euclidean",
    "spd_manifold",
    "chart_manifold",
    "sym_to_vec",
    "vec_to_sym",
    "spd_function",
    "point",
    "tangent",
    "inner",
    "norm",
    "metric_gram",
    "volume_density",
    "geodesic",
    "distance",
    "default_transport",
    "transport",
    "transport_matrix",
    "random_point",
    "random_tangent",
    "verify_transport_invariance",
]

# Eigenvalues of SPD matrices are floored at this value before inversion or
# matrix logarithms; anything below is treated as leaving the manifold.
_SPD_EIG_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# specs and basic containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifoldSpec:
    """Description of a manifold presented in a single global chart.

    Attributes
    ----------
    kind : str
        One of ``"euclidean"``, ``"spd"``, ``"chart"``.
    dim : int
        Chart (coordinate) dimension.  For SPD(n) this is n(n+1)/2.
    matrix_size : int, optional
        Matrix size n for the SPD manifold.
    metric_fn : callable, optional
        For ``chart`` manifolds: coords -> (dim, dim) Gram matrix.  When
        omitted the chart metric is Euclidean.
    """

    kind: str
    dim: int
    matrix_size: Optional[int] = None
    metric_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.kind not in ("euclidean", "spd", "chart"):
            raise ArgumentError(f"unknown manifold kind {self.kind!r}")
        if self.dim < 1:
            raise ArgumentError("manifold dimension must be positive")
        if self.kind == "spd":
            n = self.matrix_size
            if n is None or n * (n + 1) // 2 != self.dim:
                raise ArgumentError(
                    "spd manifold needs matrix_size n with dim == n(n+1)/2"
                )


def euclidean(n: int) -> ManifoldSpec:
    """Flat R^n."""
    return ManifoldSpec(kind="euclidean", dim=n)


def spd_manifold(n: int) -> ManifoldSpec:
    """SPD(n) with the affine-invariant metric, chart dim n(n+1)/2."""
    return ManifoldSpec(kind="spd", dim=n * (n + 1) // 2, matrix_size=n)


def chart_manifold(dim: int, metric_fn=None) -> ManifoldSpec:
    """A single chart on R^dim with an optional Gram-matrix callback."""
    return ManifoldSpec(kind="chart", dim=dim, metric_fn=metric_fn)


@dataclass(frozen=True, eq=False)
class Point:
    """A point on a manifold, stored in chart coordinates."""

    manifold: ManifoldSpec
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (self.manifold.dim,):
            raise ArgumentError(
                f"coords shape {c.shape} does not match manifold dim "
                f"{self.manifold.dim}"
            )
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __eq__(self, other):
        return (
            isinstance(other, Point)
            and self.manifold == other.manifold
            and np.array_equal(self.coords, other.coords)
        )

    def as_matrix(self) -> np.ndarray:
        """Reconstruct the symmetric matrix for a point on SPD(n)."""
        if self.manifold.kind != "spd":
            raise ArgumentError("as_matrix is only defined on SPD manifolds")
        return vec_to_sym(self.coords, self.manifold.matrix_size)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent vector attached to a base point, in chart components."""

    base: Point
    components: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.components, dtype=float)
        if v.shape != (self.base.manifold.dim,):
            raise ArgumentError("tangent components do not match manifold dim")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "components", v)

    def __eq__(self, other):
        return (
            isinstance(other, TangentVector)
            and self.base == other.base
            and np.array_equal(self.components, other.components)
        )

    def as_matrix(self) -> np.ndarray:
        if self.base.manifold.kind != "spd":
            raise ArgumentError("as_matrix is only defined on SPD manifolds")
        return vec_to_sym(self.components, self.base.manifold.matrix_size)


def point(manifold: ManifoldSpec, coords) -> Point:
    """Build a Point, validating the manifold domain.

    For SPD manifolds the reconstructed matrix must be positive definite;
    otherwise a DomainError is raised.
    """
    p = Point(manifold, np.asarray(coords, dtype=float))
    if manifold.kind == "spd":
        w = np.linalg.eigvalsh(p.as_matrix())
        if w.min() <= _SPD_EIG_FLOOR:
            raise DomainError(
                f"matrix with min eigenvalue {w.min():.3e} is not SPD"
            )
    return p


def tangent(base: Point, components) -> TangentVector:
    return TangentVector(base, np.asarray(components, dtype=float))


# ---------------------------------------------------------------------------
# symmetric-matrix flattening and SPD matrix functions
# ---------------------------------------------------------------------------


def sym_to_vec(m: np.ndarray) -> np.ndarray:
    """Flatten a symmetric matrix to its upper triangle, row-major."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    iu = np.triu_indices(n)
    return m[iu].copy()


def vec_to_sym(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`sym_to_vec`."""
    v = np.asarray(v, dtype=float)
    if v.shape != (n * (n + 1) // 2,):
        raise ArgumentError(f"expected length {n*(n+1)//2}, got {v.shape}")
    m = np.zeros((n, n))
    iu = np.triu_indices(n)
    m[iu] = v
    m = m + m.T - np.diag(np.diag(m))
    return m


def spd_function(x: np.ndarray, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to an SPD matrix through its eigenvalues.

    Raises DomainError if the matrix is not numerically positive definite.
    """
    x = np.asarray(x, dtype=float)
    x = 0.5 * (x + x.T)
    w, q = np.linalg.eigh(x)
    if w.min() <= _SPD_EIG_FLOOR:
        raise DomainError(
            f"matrix with min eigenvalue {w.min():.3e} left the SPD cone"
        )
    return (q * fn(w)) @ q.T


def _spd_sqrt(x):
    return spd_function(x, np.sqrt)


def _spd_inv_sqrt(x):
    return spd_function(x, lambda w: 1.0 / np.sqrt(w))


def _spd_log(x):
    return spd_function(x, np.log)


def _spd_pow(x, t):
    return spd_function(x, lambda w: w**t)


# ---------------------------------------------------------------------------
# metric, geodesics, distance
# ---------------------------------------------------------------------------


def inner(x: Point, u: TangentVector, v: TangentVector) -> float:
    """Riemannian inner product <u, v> at x."""
    man = x.manifold
    if u.base != x or v.base != x:
        raise ArgumentError("tangent vectors must be based at x")
    if man.kind == "euclidean":
        return float(u.components @ v.components)
    if man.kind == "spd":
        xm = x.as_matrix()
        xinv = spd_function(xm, lambda w: 1.0 / w)
        um, vm = u.as_matrix(), v.as_matrix()
        return float(np.trace(xinv @ um @ xinv @ vm))
    g = metric_gram(x)
    return float(u.components @ g @ v.components)


def norm(x: Point, v: TangentVector) -> float:
    return float(np.sqrt(max(inner(x, v, v), 0.0)))


def metric_gram(x: Point) -> np.ndarray:
    """Gram matrix of the metric in chart coordinates at x.

    For SPD manifolds this is assembled column by column from the flattened
    symmetric basis, so chart-coordinate inner products u^T G v agree with
    tr(X^-1 U X^-1 V).
    """
    man = x.manifold
    if man.kind == "euclidean":
        return np.eye(man.dim)
    if man.kind == "chart":
        if man.metric_fn is None:
            return np.eye(man.dim)
        g = np.asarray(man.metric_fn(np.asarray(x.coords)), dtype=float)
        if g.shape != (man.dim, man.dim):
            raise ArgumentError("metric_fn returned wrong shape")
        return g
    # spd: G_kl = tr(X^-1 E_k X^-1 E_l) over the flattened symmetric basis
    n = man.matrix_size
    xinv = spd_function(x.as_matrix(), lambda w: 1.0 / w)
    basis = []
    for k in range(man.dim):
        e = np.zeros(man.dim)
        e[k] = 1.0
        basis.append(vec_to_sym(e, n))
    g = np.empty((man.dim, man.dim))
    pre = [xinv @ b @ xinv for b in basis]
    for k in range(man.dim):
        for l in range(k, man.dim):
            g[k, l] = g[l, k] = np.trace(pre[k] @ basis[l])
    return g


def volume_density(x: Point) -> float:
    """sqrt(det G(x)): Riemannian volume density in chart coordinates."""
    g = metric_gram(x)
    det = np.linalg.det(g)
    if det <= 0:
        raise DomainError("metric Gram matrix is not positive definite")
    return float(np.sqrt(det))


def geodesic(x: Point, y: Point, t: float) -> Point:
    """Point at parameter t on the geodesic from x (t=0) to y (t=1).

    Euclidean and generic charts use the straight chart segment; SPD uses
    the affine-invariant geodesic X^(1/2) (X^(-1/2) Y X^(-1/2))^t X^(1/2).
    """
    man = x.manifold
    if y.manifold != man:
        raise ArgumentError("points live on different manifolds")
    if man.kind == "spd":
        xm, ym = x.as_matrix(), y.as_matrix()
        s = _spd_sqrt(xm)
        si = _spd_inv_sqrt(xm)
        mid = _spd_pow(si @ ym @ si, t)
        return Point(man, sym_to_vec(s @ mid @ s))
    c = (1.0 - t) * x.coords + t * y.coords
    return Point(man, c)


def distance(x: Point, y: Point) -> float:
    """Riemannian distance.

    Chart manifolds without a closed-form distance use the chart-coordinate
    norm of the difference as a proxy (exact when the Gram matrix is the
    identity).
    """
    man = x.manifold
    if y.manifold != man:
        raise ArgumentError("points live on different manifolds")
    if man.kind == "spd":
        si = _spd_inv_sqrt(x.as_matrix())
        return float(
            np.linalg.norm(_spd_log(si @ y.as_matrix() @ si), ord="fro")
        )
    return float(np.linalg.norm(y.coords - x.coords))


# ---------------------------------------------------------------------------
# parallel transport
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransportMap:
    """A (pointwise linear) transport rule between tangent spaces.

    kind is one of:

    * ``"identity"``       -- components are reused unchanged (flat chart).
    * ``"spd_congruence"`` -- Gamma(X,Y) V = (Y X^-1)^(1/2)-style congruence
                              E V E^T with E = Y^(1/2) X^(-1/2); this is the
                              transport that makes the affine-invariant metric
                              and the positive-semidefinite cone field
                              invariant.
    * ``"linear"``         -- user-supplied map_fn(x, y) -> (dim, dim) matrix
                              acting on chart components.
    """

    kind: str
    map_fn: Optional[Callable[[Point, Point], np.ndarray]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.kind not in ("identity", "spd_congruence", "linear"):
            raise ArgumentError(f"unknown transport kind {self.kind!r}")
        if self.kind == "linear" and self.map_fn is None:
            raise ArgumentError("linear transport needs map_fn")


def default_transport(manifold: ManifoldSpec) -> TransportMap:
    if manifold.kind == "spd":
        return TransportMap(kind="spd_congruence")
    return TransportMap(kind="identity")


def transport(tmap: TransportMap, x: Point, y: Point, v: TangentVector) -> TangentVector:
    """Transport v from T_x M to T_y M."""
    if v.base != x:
        raise ArgumentError("vector is not based at x")
    if x.manifold != y.manifold:
        raise ArgumentError("points live on different manifolds")
    if tmap.kind == "identity":
        return TangentVector(y, v.components)
    if tmap.kind == "linear":
        m = np.asarray(tmap.map_fn(x, y), dtype=float)
        return TangentVector(y, m @ v.components)
    # spd congruence
    e = _spd_sqrt(y.as_matrix()) @ _spd_inv_sqrt(x.as_matrix())
    return TangentVector(y, sym_to_vec(e @ v.as_matrix() @ e.T))


def transport_matrix(tmap: TransportMap, x: Point, y: Point) -> np.ndarray:
    """Matrix of the transport in chart coordinates (built on the basis)."""
    dim = x.manifold.dim
    if tmap.kind == "identity":
        return np.eye(dim)
    if tmap.kind == "linear":
        return np.asarray(tmap.map_fn(x, y), dtype=float)
    cols = []
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = 1.0
        cols.append(transport(tmap, x, y, TangentVector(x, e)).components)
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def random_point(manifold: ManifoldSpec, rng: np.random.Generator, scale: float = 1.0) -> Point:
    """Draw a random point.

    Euclidean/chart: uniform in the box [-scale, scale]^dim.  SPD: random
    rotation with eigenvalues exp(uniform(-scale, scale)), so conditioning
    stays within exp(2*scale).
    """
    if manifold.kind == "spd":
        n = manifold.matrix_size
        a = rng.standard_normal((n, n))
        q, r = np.linalg.qr(a)
        q = q * np.sign(np.diag(r))
        w = np.exp(rng.uniform(-scale, scale, size=n))
        return Point(manifold, sym_to_vec((q * w) @ q.T))
    return Point(manifold, rng.uniform(-scale, scale, size=manifold.dim))


def random_tangent(x: Point, rng: np.random.Generator, scale: float = 1.0) -> TangentVector:
    """Standard-normal chart components scaled by `scale`."""
    return TangentVector(x, scale * rng.standard_normal(x.manifold.dim))


# ---------------------------------------------------------------------------
# transport invariance verification
# ---------------------------------------------------------------------------


@dataclass
class InvarianceReport:
    """Result of sampling-based transport-invariance verification."""

    n_trials: int
    max_metric_residual: float
    mean_metric_residual: float
    max_identity_residual: float
    n_cone_mismatches: int
    mismatch_examples: list
    worst_pair: Optional[tuple] = None

    @property
    def metric_invariant(self) -> bool:
        return self.max_metric_residual <= 1e-9


def verify_transport_invariance(
    manifold: ManifoldSpec,
    tmap: TransportMap,
    cone_margin: Optional[Callable[[Point, np.ndarray], float]] = None,
    sampler: Optional[Callable[[np.random.Generator], tuple]] = None,
    n_trials: int = 1000,
    seed: int = 0,
    scale: float = 1.0,
    margin_band: float = 1e-9,
) -> InvarianceReport:
    """Check that a transport preserves the metric (and, optionally, a cone field).

    For each trial draws (x1, x2, u, v), transports u and v from x1 to x2 and
    records the metric residual ``|<u,v>_x1 - <Gamma u, Gamma v>_x2|`` relative
    to the magnitude of the inner product.  Also checks Gamma(x,x) = Id on the
    sampled basis.

    When ``cone_margin(point, components) -> float`` is given, counts strict
    membership flips: margin > band at x1 but < -band after transport, or
    vice versa.  (Values inside the band are treated as boundary and are not
    counted.)

    A custom ``sampler(rng) -> (x1, x2, u, v)`` may replace the default
    random-point/random-tangent sampler.

    The check is deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    max_res = 0.0
    sum_res = 0.0
    max_id_res = 0.0
    mismatches = 0
    examples = []
    worst = None
    for k in range(n_trials):
        if sampler is not None:
            x1, x2, u, v = sampler(rng)
        else:
            x1 = random_point(manifold, rng, scale)
            x2 = random_point(manifold, rng, scale)
            u = random_tangent(x1, rng)
            v = random_tangent(x1, rng)
        ip1 = inner(x1, u, v)
        gu = transport(tmap, x1, x2, u)
        gv = transport(tmap, x1, x2, v)
        ip2 = inner(x2, gu, gv)
        den = max(abs(ip1), abs(ip2), 1.0)
        res = abs(ip1 - ip2) / den
        sum_res += res
        if res > max_res:
            max_res = res
            worst = (x1, x2, u, v, ip1, ip2)
        # Gamma(x, x) must be the identity
        u_back = transport(tmap, x1, x1, u)
        id_res = np.max(np.abs(u_back.components - u.components)) / max(
            1.0, np.max(np.abs(u.components))
        )
        max_id_res = max(max_id_res, id_res)
        if cone_margin is not None:
            m1 = cone_margin(x1, u.components)
            m2 = cone_margin(x2, gu.components)
            if (m1 > margin_band and m2 < -margin_band) or (
                m1 < -margin_band and m2 > margin_band
            ):
                mismatches += 1
                if len(examples) < 10:
                    examples.append((x1, x2, u, m1, m2))
    return InvarianceReport(
        n_trials=n_trials,
        max_metric_residual=max_res,
        mean_metric_residual=sum_res / max(n_trials, 1),
        max_identity_residual=max_id_res,
        n_cone_mismatches=mismatches,
        mismatch_examples=examples,
        worst_pair=worst,
    )
