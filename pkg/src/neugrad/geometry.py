"""Convex smooth bounded domains and their boundary geometry.

Every shape exposes the same operations: exterior distance, metric
projection onto the boundary, inward unit normal, the penalization
gradient ``beta0`` (half the gradient of the squared distance), normal
and tangential projectors, and the shape operator of the boundary.

All point-valued operations are vectorized: they accept a single point of
shape ``(d,)`` or a batch ``(m, d)`` and return matching shapes.  Shapes
are immutable after construction and safe to share across workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import InvalidInputError, NumericalError, PreconditionError

# Boundary membership tolerance is this factor times the domain diameter,
# everywhere in the library.
BOUNDARY_TOL_FACTOR = 1e-8


@dataclass(frozen=True)
class BoundaryFrame:
    """A boundary point together with the unit inward normal there."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))
        if not (np.all(np.isfinite(self.point)) and np.all(np.isfinite(self.normal))):
            raise InvalidInputError("boundary frame entries must be finite")
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-12:
            raise InvalidInputError("boundary normal must be a unit vector")

    def project_normal(self, v) -> np.ndarray:
        """Orthogonal projection of ``v`` onto the span of the normal."""
        v = np.asarray(v, dtype=float)
        return (v @ self.normal) * self.normal

    def project_tangential(self, v) -> np.ndarray:
        """Orthogonal projection of ``v`` onto the boundary tangent space."""
        v = np.asarray(v, dtype=float)
        return v - (v @ self.normal) * self.normal


def project_normal(frame: BoundaryFrame, v) -> np.ndarray:
    return frame.project_normal(v)


def project_tangential(frame: BoundaryFrame, v) -> np.ndarray:
    return frame.project_tangential(v)


class DomainGeometry:
    """Base class; concrete shapes implement the per-point kernels.

    Subclasses must be convex; the reflected and penalized schemes rely on
    the metric projection being single-valued outside the domain.
    """

    dimension: int
    diameter: float
    test_only: bool = False

    # -- plumbing ---------------------------------------------------------

    @property
    def boundary_tolerance(self) -> float:
        return BOUNDARY_TOL_FACTOR * self.diameter

    def _prep(self, x) -> tuple[np.ndarray, bool]:
        a = np.asarray(x, dtype=float)
        single = a.ndim == 1
        if single:
            a = a[None, :]
        if a.ndim != 2 or a.shape[1] != self.dimension:
            raise InvalidInputError(
                f"expected points of dimension {self.dimension}, got shape {np.shape(x)}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("non-finite point coordinates")
        return a, single

    @staticmethod
    def _out(arr, single):
        return arr[0] if single else arr

    # -- core operations (shape kernels fill these in) --------------------

    def _distance(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _nearest_boundary(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _normal_at(self, alpha: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _shape_operator(self, alpha: np.ndarray, eta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    # -- public API --------------------------------------------------------

    def signed_distance(self, x):
        """Distance to the closed domain: 0 inside, d(x, D) outside."""
        a, single = self._prep(x)
        return self._out(self._distance(a), single)

    def contains(self, x):
        a, single = self._prep(x)
        return self._out(self._distance(a) <= 0.0, single)

    def boundary_distance(self, x):
        """Distance to the boundary, valid inside and outside."""
        a, single = self._prep(x)
        return self._out(np.linalg.norm(a - self._nearest_boundary(a), axis=1), single)

    def on_boundary(self, x):
        a, single = self._prep(x)
        tol = self.boundary_tolerance
        out = self._distance(a)
        res = np.zeros(len(a), dtype=bool)
        ext = out > 0.0
        res[ext] = out[ext] <= tol
        ins = ~ext
        if np.any(ins):
            res[ins] = self._interior_gap_tol(a[ins]) <= tol
        return self._out(res, single)

    def _interior_gap(self, a: np.ndarray) -> np.ndarray:
        # distance to the boundary for interior points
        return np.linalg.norm(a - self._nearest_boundary(a), axis=1)

    def _interior_gap_tol(self, a: np.ndarray) -> np.ndarray:
        """Interior boundary distance for tolerance tests.

        May return a lower bound for points far from the boundary; exact
        within a few tolerances of it.  Never raises on medial-axis points.
        """
        return self._interior_gap(a)

    def project_to_boundary(self, x):
        """Metric projection onto the boundary for exterior or boundary points."""
        a, single = self._prep(x)
        strict = (self._distance(a) <= 0.0) & (self._interior_gap_tol(a) > self.boundary_tolerance)
        if np.any(strict):
            bad = a[np.argmax(strict)]
            raise PreconditionError(
                f"point {bad.tolist()} is strictly interior; the metric projection "
                "is only defined on the boundary and outside the domain")
        return self._out(self._nearest_boundary(a), single)

    def inward_normal(self, alpha):
        """Unit inward normal at a boundary point (within boundary tolerance)."""
        a, single = self._prep(alpha)
        gap = np.abs(self._distance(a))
        near = self._out_of_tol_mask(a, gap)
        if np.any(near):
            bad = a[np.argmax(near)]
            raise InvalidInputError(
                f"point {bad.tolist()} is not on the boundary within tolerance "
                f"{self.boundary_tolerance:g}")
        return self._out(self._normal_at(a), single)

    def _out_of_tol_mask(self, a, exterior_dist):
        tol = self.boundary_tolerance
        mask = np.zeros(len(a), dtype=bool)
        ext = exterior_dist > 0.0
        mask[ext] = exterior_dist[ext] > tol
        ins = ~ext
        if np.any(ins):
            mask[ins] = self._interior_gap_tol(a[ins]) > tol
        return mask

    def frame(self, alpha) -> BoundaryFrame:
        a, single = self._prep(alpha)
        if not single:
            raise InvalidInputError("frame() takes one boundary point")
        normal = self.inward_normal(alpha)
        return BoundaryFrame(point=np.asarray(alpha, dtype=float), normal=normal)

    def beta0(self, x):
        """Half the gradient of the squared domain distance: x - pi(x) outside, 0 inside."""
        a, single = self._prep(x)
        out = np.zeros_like(a)
        ext = self._distance(a) > 0.0
        if np.any(ext):
            out[ext] = a[ext] - self._nearest_boundary(a[ext])
        return self._out(out, single)

    def weingarten(self, frame: BoundaryFrame, eta):
        """Shape operator at ``frame.point`` applied to the tangent vector ``eta``."""
        eta = np.asarray(eta, dtype=float)
        if not np.all(np.isfinite(eta)):
            raise InvalidInputError("non-finite tangent vector")
        if abs(float(eta @ frame.normal)) > 1e-10 * max(1.0, float(np.linalg.norm(eta))):
            raise PreconditionError("weingarten input must be tangent to the boundary")
        return self._shape_operator(frame.point[None, :], eta[None, :])[0]

    def shape_operator(self, alpha, eta):
        """Batched shape operator; callers must supply tangent vectors."""
        a, single = self._prep(alpha)
        e = np.asarray(eta, dtype=float)
        if single:
            e = e[None, :]
        return self._out(self._shape_operator(a, e), single)

    def normals_at(self, alpha):
        """Batched inward normals for points already known to lie on the boundary."""
        a, single = self._prep(alpha)
        return self._out(self._normal_at(a), single)

    # -- sampling utilities ------------------------------------------------

    def sample_interior(self, count: int, seed: int = 0) -> np.ndarray:
        """Low-discrepancy interior points: Halton in the bounding box, rejected to D."""
        lo, hi = self.bounding_box()
        sampler = qmc.Halton(d=self.dimension, scramble=True, seed=seed)
        pts = np.empty((0, self.dimension))
        attempts = 0
        while len(pts) < count:
            raw = lo + sampler.random(max(count, 64)) * (hi - lo)
            keep = raw[self._distance(raw) <= 0.0]
            pts = np.vstack([pts, keep])
            attempts += 1
            if attempts > 200:
                raise NumericalError("interior rejection sampling failed to fill the request")
        return pts[:count]

    def sample_boundary(self, count: int, seed: int = 0) -> np.ndarray:
        raise NotImplementedError

    def sample_boundary_shell(self, count: int, width: float, seed: int = 0):
        """Interior points within ``width`` of the boundary, paired with the
        boundary point they were pushed in from and its inward normal."""
        alpha = self.sample_boundary(count, seed=seed)
        gamma = self.normals_at(alpha)
        rng = np.random.default_rng(seed + 1)
        depth = rng.uniform(0.0, width, size=count)
        x = alpha + depth[:, None] * gamma
        return x, alpha, gamma

    def check_convexity(self, samples: int = 64, seed: int = 0) -> bool:
        """Probe convexity: midpoints of random interior pairs stay interior."""
        pts = self.sample_interior(2 * samples, seed=seed)
        mid = 0.5 * (pts[:samples] + pts[samples:])
        return bool(np.all(self._distance(mid) <= self.boundary_tolerance))


class Interval(DomainGeometry):
    """Closed interval [lo, hi] in one dimension."""

    def __init__(self, lo: float, hi: float):
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise InvalidInputError("interval endpoints must be finite")
        if not lo < hi:
            raise InvalidInputError("interval requires lo < hi")
        self.lo = float(lo)
        self.hi = float(hi)
        self.dimension = 1
        self.diameter = self.hi - self.lo

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"

    def _distance(self, x):
        t = x[:, 0]
        return np.maximum(np.maximum(self.lo - t, t - self.hi), 0.0)

    def _interior_gap(self, a):
        t = a[:, 0]
        return np.minimum(t - self.lo, self.hi - t)

    def _nearest_boundary(self, x):
        t = x[:, 0]
        mid = 0.5 * (self.lo + self.hi)
        return np.where(t < mid, self.lo, self.hi)[:, None]

    def _normal_at(self, alpha):
        t = alpha[:, 0]
        mid = 0.5 * (self.lo + self.hi)
        return np.where(t < mid, 1.0, -1.0)[:, None]

    def _shape_operator(self, alpha, eta):
        # tangent space is {0} in one dimension
        return np.zeros_like(eta)

    def bounding_box(self):
        return np.array([self.lo]), np.array([self.hi])

    def sample_boundary(self, count, seed=0):
        vals = np.where(np.arange(count) % 2 == 0, self.lo, self.hi)
        return vals[:, None].astype(float)


class Ball(DomainGeometry):
    """Closed Euclidean ball with given center and radius."""

    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=float)
        if self.center.ndim != 1 or not np.all(np.isfinite(self.center)):
            raise InvalidInputError("ball center must be a finite vector")
        if not (np.isfinite(radius) and radius > 0):
            raise InvalidInputError("ball radius must be positive")
        self.radius = float(radius)
        self.dimension = len(self.center)
        self.diameter = 2.0 * self.radius

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"

    def _distance(self, x):
        return np.maximum(np.linalg.norm(x - self.center, axis=1) - self.radius, 0.0)

    def _interior_gap(self, a):
        return self.radius - np.linalg.norm(a - self.center, axis=1)

    def _nearest_boundary(self, x):
        y = x - self.center
        r = np.linalg.norm(y, axis=1)
        if np.any(r == 0.0):
            raise NumericalError("nearest boundary point is not unique at the ball center")
        return self.center + self.radius * y / r[:, None]

    def _normal_at(self, alpha):
        y = self.center - alpha
        r = np.linalg.norm(y, axis=1)
        return y / r[:, None]

    def _shape_operator(self, alpha, eta):
        # constant curvature 1/R with the inward-normal sign convention
        return eta / self.radius

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def sample_boundary(self, count, seed=0):
        rng = np.random.default_rng(seed)
        u = rng.standard_normal((count, self.dimension))
        u /= np.linalg.norm(u, axis=1)[:, None]
        return self.center + self.radius * u


class Ellipsoid(DomainGeometry):
    """Axis-aligned ellipsoid sum_i ((x_i - c_i)/s_i)^2 <= 1."""

    _RESIDUAL = 1e-12
    _MAX_ITER = 200

    def __init__(self, center, semi_axes):
        self.center = np.asarray(center, dtype=float)
        self.semi_axes = np.asarray(semi_axes, dtype=float)
        if self.center.shape != self.semi_axes.shape or self.center.ndim != 1:
            raise InvalidInputError("center and semi-axes must be vectors of equal length")
        if not (np.all(np.isfinite(self.center)) and np.all(np.isfinite(self.semi_axes))):
            raise InvalidInputError("non-finite ellipsoid parameters")
        if not np.all(self.semi_axes > 0):
            raise InvalidInputError("semi-axes must be strictly positive")
        self.dimension = len(self.center)
        self.diameter = 2.0 * float(np.max(self.semi_axes))
        self._axes2 = self.semi_axes ** 2

    def __repr__(self):
        return f"Ellipsoid(center={self.center.tolist()}, semi_axes={self.semi_axes.tolist()})"

    def _level(self, x):
        return np.sum(((x - self.center) / self.semi_axes) ** 2, axis=1)

    def _interior_gap_tol(self, a):
        # sqrt(level) is (1/s_min)-Lipschitz, so (1 - sqrt(level)) * s_min is a
        # lower bound on the boundary distance; solve exactly only near it.
        smin = float(np.min(self.semi_axes))
        bound = (1.0 - np.sqrt(self._level(a))) * smin
        out = bound.copy()
        near = bound <= 16.0 * self.boundary_tolerance
        if np.any(near):
            out[near] = np.linalg.norm(a[near] - self._project(a[near], exterior=False), axis=1)
        return out

    def _distance(self, x):
        out = np.zeros(len(x))
        ext = self._level(x) > 1.0
        if np.any(ext):
            p = self._project(x[ext], exterior=True)
            out[ext] = np.linalg.norm(x[ext] - p, axis=1)
        return out

    def _nearest_boundary(self, x):
        res = np.empty_like(x)
        lvl = self._level(x)
        ext = lvl > 1.0
        if np.any(ext):
            res[ext] = self._project(x[ext], exterior=True)
        ins = ~ext
        if np.any(ins):
            res[ins] = self._project(x[ins], exterior=False)
        return res

    def _project(self, x, exterior: bool):
        """Lagrange-multiplier projection.  The multiplier solves
        ``sum_i (s_i^2 y_i / (s_i^2 + lam))^2 / s_i^2 = 1`` with the
        projected point ``c + y * s^2 / (s^2 + lam)``."""
        y = x - self.center
        num = (self._axes2 * y) ** 2 / self._axes2  # (s_i y_i)^2

        def phi(lam):
            den = self._axes2[None, :] + lam[:, None]
            val = np.sum(num / den ** 2, axis=1) - 1.0
            grad = -2.0 * np.sum(num / den ** 3, axis=1)
            return val, grad

        if exterior:
            # phi is convex and decreasing on [0, inf); Newton from 0 increases
            # monotonically to the root.
            lam = np.zeros(len(y))
            hi = np.maximum(np.max(self.semi_axes) * np.linalg.norm(y, axis=1), 1.0)
            for _ in range(self._MAX_ITER):
                val, grad = phi(lam)
                if np.all(np.abs(val) < self._RESIDUAL):
                    break
                step = np.where(np.abs(grad) > 0, -val / np.where(grad == 0, 1.0, grad), 0.0)
                nxt = lam + step
                bad = ~np.isfinite(nxt) | (nxt < 0.0) | (nxt > hi)
                nxt[bad] = 0.5 * (lam[bad] + hi[bad])  # bisection fallback
                lam = nxt
            else:
                raise NumericalError("ellipsoid projection did not converge")
        else:
            # interior branch: root in (-min(s)^2, 0], bracketed bisection
            smin2 = float(np.min(self._axes2))
            r = np.linalg.norm(y / self.semi_axes, axis=1)
            if np.any(r < 1e-14):
                raise NumericalError(
                    "nearest boundary point is not unique near the ellipsoid center")
            lo = np.full(len(y), -smin2 * (1.0 - 1e-12))
            val_lo, _ = phi(lo)
            if np.any(val_lo < 0.0):
                raise NumericalError(
                    "interior point too close to the medial axis for a unique projection")
            hi_b = np.zeros(len(y))
            lam = 0.5 * (lo + hi_b)
            for _ in range(120):
                val, _ = phi(lam)
                high = val > 0.0
                lo = np.where(high, lam, lo)
                hi_b = np.where(high, hi_b, lam)
                lam = 0.5 * (lo + hi_b)
                if np.all(np.abs(val) < self._RESIDUAL):
                    break
        den = self._axes2[None, :] + lam[:, None]
        return self.center + y * self._axes2[None, :] / den

    def _normal_at(self, alpha):
        w = (alpha - self.center) / self._axes2
        return -w / np.linalg.norm(w, axis=1)[:, None]

    def _shape_operator(self, alpha, eta):
        w = (alpha - self.center) / self._axes2
        wn = np.linalg.norm(w, axis=1)
        n_out = w / wn[:, None]
        v = eta / self._axes2
        v_t = v - np.sum(n_out * v, axis=1)[:, None] * n_out
        return v_t / wn[:, None]

    def bounding_box(self):
        return self.center - self.semi_axes, self.center + self.semi_axes

    def sample_boundary(self, count, seed=0):
        rng = np.random.default_rng(seed)
        u = rng.standard_normal((count, self.dimension))
        u /= np.linalg.norm(u, axis=1)[:, None]
        return self.center + self.semi_axes * u


class HalfSpace(DomainGeometry):
    """Half-space {x : n . x >= offset} with inward normal n.

    Unbounded, hence admitted only for test configurations that opt in
    explicitly; the schemes assume a bounded domain.  The nominal diameter
    used for tolerances is 1.
    """

    def __init__(self, normal, offset: float = 0.0, test_only: bool = False):
        if not test_only:
            raise InvalidInputError(
                "HalfSpace is unbounded; construct with test_only=True to accept it")
        self.normal = np.asarray(normal, dtype=float)
        if self.normal.ndim != 1 or not np.all(np.isfinite(self.normal)):
            raise InvalidInputError("half-space normal must be a finite vector")
        nrm = np.linalg.norm(self.normal)
        if abs(nrm - 1.0) > 1e-12:
            raise InvalidInputError("half-space normal must be a unit vector")
        if not np.isfinite(offset):
            raise InvalidInputError("half-space offset must be finite")
        self.offset = float(offset)
        self.dimension = len(self.normal)
        self.diameter = 1.0
        self.test_only = True

    def __repr__(self):
        return f"HalfSpace(normal={self.normal.tolist()}, offset={self.offset})"

    def _gap(self, x):
        return x @ self.normal - self.offset

    def _distance(self, x):
        return np.maximum(-self._gap(x), 0.0)

    def _nearest_boundary(self, x):
        return x - self._gap(x)[:, None] * self.normal[None, :]

    def _normal_at(self, alpha):
        return np.broadcast_to(self.normal, alpha.shape).copy()

    def _shape_operator(self, alpha, eta):
        return np.zeros_like(eta)

    def _tangent_basis(self):
        basis = np.linalg.qr(
            np.column_stack([self.normal, np.eye(self.dimension)]))[0]
        return basis[:, 1:self.dimension]

    def _interior_gap(self, a):
        return self._gap(a)

    def bounding_box(self):
        # tangential unit box around the boundary anchor, one unit deep inward
        anchor = self.offset * self.normal
        lo = anchor - 0.5 + np.minimum(self.normal, 0.0)
        hi = anchor + 0.5 + np.maximum(self.normal, 0.0)
        return lo, hi

    def sample_boundary(self, count, seed=0):
        rng = np.random.default_rng(seed)
        tang = self._tangent_basis()
        coeff = rng.uniform(-0.5, 0.5, size=(count, self.dimension - 1))
        return self.offset * self.normal[None, :] + coeff @ tang.T
