"""Independent ground-truth generators for validating the Monte Carlo schemes.

Nothing here touches the path simulators (the finite-difference Monte
Carlo gradient drives the value estimator, but through its public
surface): closed-form eigenmode solutions, Crank-Nicolson grid solvers
for the scalar equation and its gradient system, a radial reduction for
balls, and the closed-form free Jacobian.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve_banded

from .errors import InvalidInputError, NumericalError, PreconditionError
from .geometry import Ball, Interval
from .model import CoefficientField, InitialCondition


@dataclass(frozen=True)
class Grid1D:
    """Uniform one-dimensional grid with nodal values at a fixed time."""

    lo: float
    hi: float
    values: np.ndarray
    time: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or len(self.values) < 3:
            raise InvalidInputError("grid needs at least 3 nodes")
        if not self.hi > self.lo:
            raise InvalidInputError("grid requires lo < hi")
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("grid values are not finite")

    @property
    def points(self) -> int:
        return len(self.values)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)

    def value_at(self, x: float) -> float:
        return float(np.interp(x, self.nodes, self.values))


def _sinpi(z: float) -> float:
    """sin(pi z) with exact zeros at integer arguments."""
    n = np.round(z)
    r = z - n
    s = np.sin(np.pi * r)
    return float(np.where(n % 2 == 0, s, -s))


def series_gradient_1d(mode: int, sigma_const: float, t: float, x: float,
                       lo: float = 0.0, hi: float = 1.0) -> tuple[float, float]:
    """Closed-form Neumann eigenmode solution and its space derivative.

    For b = 0 and constant sigma on [lo, hi], the initial profile
    cos(k pi (x - lo) / L) evolves by pure exponential decay with rate
    sigma^2 (k pi / L)^2 / 2.
    """
    if mode < 1:
        raise InvalidInputError("mode must be a positive integer")
    length = hi - lo
    freq = mode * np.pi / length
    z = mode * (x - lo) / length
    decay = np.exp(-0.5 * sigma_const ** 2 * freq ** 2 * t)
    u = decay * np.cos(np.pi * z)
    du = -freq * decay * _sinpi(z)
    return float(u), float(du)


def _tridiag_apply(lower, diag, upper, u):
    out = diag * u
    out[1:] += lower[1:] * u[:-1]
    out[:-1] += upper[:-1] * u[1:]
    return out


def _cn_march(lower, diag, upper, u0, horizon, steps, pin_ends=False):
    """Crank-Nicolson time stepping for du/dt = L u with tridiagonal L.

    ``pin_ends`` re-imposes homogeneous Dirichlet values after every solve;
    partial pivoting in the banded solver would otherwise leak rounding into
    the constrained nodes.
    """
    k = horizon / steps
    ab = np.zeros((3, len(u0)))
    ab[0, 1:] = -0.5 * k * upper[:-1]
    ab[1, :] = 1.0 - 0.5 * k * diag
    ab[2, :-1] = -0.5 * k * lower[1:]
    u = u0.copy()
    try:
        for _ in range(steps):
            rhs = u + 0.5 * k * _tridiag_apply(lower, diag, upper, u)
            u = solve_banded((1, 1), ab, rhs)
            if pin_ends:
                u[0] = u[-1] = 0.0
    except np.linalg.LinAlgError as exc:  # pragma: no cover - absurd coefficients
        raise NumericalError(f"tridiagonal solve failed: {exc}") from exc
    if not np.all(np.isfinite(u)):
        raise NumericalError("grid solution became non-finite")
    return u


def _field_1d_profiles(field: CoefficientField, nodes: np.ndarray):
    pts = nodes[:, None]
    a = field.diffusion(pts)[:, 0, 0]
    b = field.b(pts)[:, 0]
    return a, b


def crank_nicolson_neumann_1d(field: CoefficientField, initial: InitialCondition,
                              horizon: float, interval: Interval,
                              points: int = 801, steps: int = 2000,
                              ) -> tuple[Grid1D, Grid1D]:
    """Solve du/dt = a/2 u'' + b u' on [lo, hi] with zero normal derivative.

    The boundary closure uses symmetric ghost nodes, which keeps second
    order: with u'(boundary) = 0 the drift term drops and the second
    derivative becomes 2 (u_inner - u_boundary) / h^2.

    Returns the solution grid and its centered-difference derivative grid
    (zero at the endpoints, as imposed by the boundary condition).
    """
    if field.dimension != 1:
        raise InvalidInputError("grid oracle requires one-dimensional coefficients")
    if steps < 1:
        raise InvalidInputError("steps must be >= 1")
    nodes = np.linspace(interval.lo, interval.hi, points)
    h = nodes[1] - nodes[0]
    a, b = _field_1d_profiles(field, nodes)

    lower = a / (2 * h * h) - b / (2 * h)
    diag = -a / (h * h)
    upper = a / (2 * h * h) + b / (2 * h)
    lower[-1] = a[-1] / (h * h)
    upper[0] = a[0] / (h * h)

    u0 = initial.f(nodes[:, None])
    u = _cn_march(lower, diag, upper, u0, horizon, steps) if horizon > 0 else u0.copy()

    du = np.zeros_like(u)
    du[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    ugrid = Grid1D(interval.lo, interval.hi, u, horizon)
    dgrid = Grid1D(interval.lo, interval.hi, du, horizon)
    return ugrid, dgrid


def gradient_system_1d(field: CoefficientField, initial: InitialCondition,
                       horizon: float, interval: Interval,
                       points: int = 801, steps: int = 2000) -> Grid1D:
    """Solve the gradient equation dw/dt = a/2 w'' + (b + a'/2) w' + b' w.

    The boundary closure is Dirichlet w = 0: in one dimension the tangent
    space at an endpoint is trivial, so the normal part of the gradient
    one-form is the gradient itself and the absolute boundary condition
    collapses to absorption.  Initial data is f'.
    """
    if field.dimension != 1:
        raise InvalidInputError("grid oracle requires one-dimensional coefficients")
    if steps < 1:
        raise InvalidInputError("steps must be >= 1")
    nodes = np.linspace(interval.lo, interval.hi, points)
    h = nodes[1] - nodes[0]
    pts = nodes[:, None]
    a, b = _field_1d_profiles(field, nodes)
    sig = field.sigma(pts)[:, 0, 0]
    dsig = field.grad_sigma(pts)[:, 0, 0, 0]
    da = 2.0 * sig * dsig
    db = field.grad_b(pts)[:, 0, 0]

    drift = b + 0.5 * da
    lower = a / (2 * h * h) - drift / (2 * h)
    diag = -a / (h * h) + db
    upper = a / (2 * h * h) + drift / (2 * h)
    # absorbing rows: the boundary values stay pinned at zero
    lower[-1] = diag[0] = diag[-1] = upper[0] = 0.0

    w0 = initial.grad_f(pts)[:, 0].copy()
    w0[0] = w0[-1] = 0.0
    w = (_cn_march(lower, diag, upper, w0, horizon, steps, pin_ends=True)
         if horizon > 0 else w0)
    return Grid1D(interval.lo, interval.hi, w, horizon)


def radial_ball_neumann(geom: Ball, initial: InitialCondition, horizon: float,
                        points: int = 801, steps: int = 2000,
                        diffusion_const: float = 1.0) -> tuple[Grid1D, Grid1D]:
    """Radial reduction of the heat equation on a ball (b = 0, sigma = s Id).

    Solves du/dt = (s^2/2) (u'' + (d-1)/r u') on r in [0, R] for a
    radially symmetric initial condition, with the smoothness closure
    u'(0) = 0 (the Laplacian of a smooth radial function tends to
    d u''(0) at the origin) and Neumann u'(R) = 0.
    """
    if steps < 1:
        raise InvalidInputError("steps must be >= 1")
    d = geom.dimension
    nodes = np.linspace(0.0, geom.radius, points)
    h = nodes[1] - nodes[0]
    half_a = 0.5 * diffusion_const ** 2

    lower = np.zeros(points)
    diag = np.zeros(points)
    upper = np.zeros(points)
    r_int = nodes[1:-1]
    lower[1:-1] = half_a * (1.0 / (h * h) - (d - 1) / (2 * h * r_int))
    diag[1:-1] = -2.0 * half_a / (h * h)
    upper[1:-1] = half_a * (1.0 / (h * h) + (d - 1) / (2 * h * r_int))
    diag[0] = -2.0 * d * half_a / (h * h)
    upper[0] = 2.0 * d * half_a / (h * h)
    diag[-1] = -2.0 * half_a / (h * h)
    lower[-1] = 2.0 * half_a / (h * h)

    profile_pts = geom.center[None, :] + nodes[:, None] * np.eye(d)[0][None, :]
    u0 = initial.f(profile_pts)
    u = _cn_march(lower, diag, upper, u0, horizon, steps) if horizon > 0 else u0.copy()

    du = np.zeros_like(u)
    du[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    return Grid1D(0.0, geom.radius, u, horizon), Grid1D(0.0, geom.radius, du, horizon)


def radial_gradient(geom: Ball, du_grid: Grid1D, x) -> np.ndarray:
    """Gradient vector of a radial solution at a point: u'(r) times the unit ray."""
    x = np.asarray(x, dtype=float)
    y = x - geom.center
    r = float(np.linalg.norm(y))
    if r == 0.0:
        return np.zeros_like(y)
    return du_grid.value_at(r) * y / r


@dataclass(frozen=True)
class FiniteDifferenceGradient:
    """Central-difference Monte Carlo gradient along one direction."""

    value: float
    standard_error: float
    epsilon: float
    paths: int
    coupled: bool


def mc_finite_difference_gradient(x, direction, eps: float, horizon: float,
                                  scheme, field: CoefficientField, geom,
                                  initial: InitialCondition, paths: int, seed: int,
                                  workers: int = 1,
                                  common_random_numbers: bool = True,
                                  ) -> FiniteDifferenceGradient:
    """(u(x + eps v) - u(x - eps v)) / (2 eps) by paired Monte Carlo runs.

    With common random numbers the two runs reuse the identical per-path
    noise streams, so the difference is computed path by path and its
    variance collapses; with independent noise the second run is re-seeded.
    """
    from . import estimator  # local import: the oracle drives the public estimator

    x = np.asarray(x, dtype=float)
    nu = np.asarray(direction, dtype=float)
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    x_plus = x + eps * nu
    x_minus = x - eps * nu
    for pt, tag in ((x_plus, "+"), (x_minus, "-")):
        if geom.signed_distance(pt) > 0:
            raise PreconditionError(
                f"displaced point x {tag} eps*v = {pt.tolist()} leaves the domain")
    seed_minus = seed if common_random_numbers else seed + 0x9E3779B9
    up = estimator.per_path_values(x_plus, horizon, scheme, field, geom, initial,
                                   paths, seed, workers=workers)
    dn = estimator.per_path_values(x_minus, horizon, scheme, field, geom, initial,
                                   paths, seed_minus, workers=workers)
    diffs = (up - dn) / (2.0 * eps)
    mean, se = estimator.mean_and_se(diffs)
    return FiniteDifferenceGradient(value=mean, standard_error=se, epsilon=eps,
                                    paths=paths, coupled=common_random_numbers)


def free_jacobian_closed_form(matrix, t: float) -> np.ndarray:
    """exp(B t) for the constant-coefficient free Jacobian flow."""
    B = np.asarray(matrix, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise InvalidInputError("matrix must be square")
    return expm(B * t)
