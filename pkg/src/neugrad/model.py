"""PDE/SDE coefficients, initial conditions, and standing-assumption checks.

Coefficients are supplied as evaluation callbacks together with explicit
derivative callbacks; there is no automatic differentiation.  All
callbacks must be pure and vectorized over a leading batch axis:

* ``b(x)``          maps ``(..., d)`` to ``(..., d)``
* ``sigma(x)``      maps ``(..., d)`` to ``(..., d, d)`` with entry
  ``[i, j]`` the i-th component of the j-th diffusion column
* ``grad_b(x)``     maps to ``(..., d, d)`` with entry ``[i, k]`` the
  derivative of component i along coordinate k
* ``grad_sigma(x)`` maps to ``(..., d, d, d)`` with entry ``[j, i, k]``
  the derivative of the (i, j) diffusion entry along coordinate k

``check_derivatives`` guards these hand-supplied derivatives against
central finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import InvalidInputError
from .geometry import Ball, DomainGeometry, Interval


@dataclass(frozen=True)
class FieldBounds:
    """Declared sup-norm (max absolute entry) bounds of a coefficient field."""

    b: float
    sigma: float
    grad_b: float
    grad_sigma: float


@dataclass(frozen=True)
class CoefficientField:
    dimension: int
    b: Callable[[np.ndarray], np.ndarray]
    sigma: Callable[[np.ndarray], np.ndarray]
    grad_b: Callable[[np.ndarray], np.ndarray]
    grad_sigma: Callable[[np.ndarray], np.ndarray]
    bounds: FieldBounds
    # structural flags let the schemes skip identically-zero update terms
    zero_drift: bool = False
    constant_sigma: bool = False
    unit_sigma: bool = False
    label: str = "custom"

    def diffusion(self, x) -> np.ndarray:
        """a(x) = sigma(x) sigma(x)^T."""
        s = self.sigma(np.asarray(x, dtype=float))
        return np.einsum("...ik,...jk->...ij", s, s)


@dataclass(frozen=True)
class InitialCondition:
    """Initial datum f and its gradient; both vectorized over points."""

    f: Callable[[np.ndarray], np.ndarray]
    grad_f: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"


# ---------------------------------------------------------------------------
# built-in coefficient fields


def brownian_field(dimension: int) -> CoefficientField:
    """b = 0, sigma = identity."""
    eye = np.eye(dimension)

    def b(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def sigma(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(eye, x.shape + (dimension,))

    def grad_b(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (dimension,))

    def grad_sigma(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (dimension, dimension))

    return CoefficientField(
        dimension=dimension, b=b, sigma=sigma, grad_b=grad_b, grad_sigma=grad_sigma,
        bounds=FieldBounds(b=0.0, sigma=1.0, grad_b=0.0, grad_sigma=0.0),
        zero_drift=True, constant_sigma=True, unit_sigma=True, label="bm")


def _smooth_clamp(x: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Componentwise identity on [lo, hi] with C^2 tanh saturation outside.

    Returns the clamped values and the componentwise derivative.  The
    saturation margin is half the box width, so values stay bounded by the
    box inflated by 50% while the field is untouched inside the box.
    """
    span = 0.5 * (hi - lo)
    out = x.copy()
    deriv = np.ones_like(x)
    up = x > hi
    if np.any(up):
        u = (x - hi) / span
        out[up] = (hi + span * np.tanh(u))[up]
        deriv[up] = (1.0 / np.cosh(u) ** 2)[up]
    dn = x < lo
    if np.any(dn):
        u = (x - lo) / span
        out[dn] = (lo + span * np.tanh(u))[dn]
        deriv[dn] = (1.0 / np.cosh(u) ** 2)[dn]
    return out, deriv


def linear_drift_field(matrix, clamp_box=None) -> CoefficientField:
    """b(x) = B x, sigma = identity.

    ``clamp_box = (lo, hi)`` saturates the drift argument smoothly outside
    the box so the field stays bounded globally; inside the box the drift
    is exactly linear.  Pass a box that contains everything the simulation
    can reach (the domain plus its penalization overshoot).
    """
    B = np.asarray(matrix, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise InvalidInputError("drift matrix must be square")
    d = B.shape[0]
    eye = np.eye(d)
    if clamp_box is not None:
        lo = np.asarray(clamp_box[0], dtype=float)
        hi = np.asarray(clamp_box[1], dtype=float)
        if np.any(hi <= lo):
            raise InvalidInputError("clamp box must have positive widths")
        reach = np.maximum(np.abs(lo), np.abs(hi)) + 0.5 * (hi - lo)
    else:
        lo = hi = None
        reach = None

    def _arg(x):
        x = np.asarray(x, dtype=float)
        if lo is None:
            return x, np.ones_like(x)
        return _smooth_clamp(x, lo, hi)

    def b(x):
        s, _ = _arg(x)
        return s @ B.T

    def grad_b(x):
        _, dv = _arg(x)
        return B * dv[..., None, :]

    def sigma(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(eye, x.shape + (d,))

    def grad_sigma(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (d, d))

    row_sum = float(np.max(np.sum(np.abs(B), axis=1)))
    if reach is None:
        b_bound = np.inf  # unbounded drift; caller keeps the state in range
    else:
        b_bound = float(np.max(np.abs(B) @ reach))
    return CoefficientField(
        dimension=d, b=b, sigma=sigma, grad_b=grad_b, grad_sigma=grad_sigma,
        bounds=FieldBounds(b=b_bound, sigma=1.0, grad_b=row_sum, grad_sigma=0.0),
        constant_sigma=True, unit_sigma=True, label="linear_drift")


def varsigma_field(dimension: int, kappa: float) -> CoefficientField:
    """b = 0, sigma(x) = (1 + kappa sin x_1) * identity, kappa in [0, 0.5]."""
    if not 0.0 <= kappa <= 0.5:
        raise InvalidInputError("kappa must lie in [0, 0.5]")
    eye = np.eye(dimension)
    idx = np.arange(dimension)

    def b(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def grad_b(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (dimension,))

    def sigma(x):
        x = np.asarray(x, dtype=float)
        scale = 1.0 + kappa * np.sin(x[..., 0])
        return scale[..., None, None] * eye

    def grad_sigma(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (dimension, dimension))
        out[..., idx, idx, 0] = (kappa * np.cos(x[..., 0]))[..., None]
        return out

    return CoefficientField(
        dimension=dimension, b=b, sigma=sigma, grad_b=grad_b, grad_sigma=grad_sigma,
        bounds=FieldBounds(b=0.0, sigma=1.0 + kappa, grad_b=0.0, grad_sigma=kappa),
        zero_drift=True, label="varsigma")


# ---------------------------------------------------------------------------
# built-in initial conditions


def cosine_mode(geom: DomainGeometry, mode: int = 1) -> InitialCondition:
    """Neumann-compatible cosine profile.

    On an interval this is the classical eigenmode cos(k pi (x - lo) / L);
    on a ball it is the smooth radial profile cos(k pi |x - c|^2 / R^2),
    whose normal derivative vanishes on the boundary.
    """
    k = int(mode)
    if k < 1:
        raise InvalidInputError("mode must be a positive integer")
    if isinstance(geom, Interval):
        lo, length = geom.lo, geom.hi - geom.lo
        freq = k * np.pi / length

        def f(x):
            x = np.asarray(x, dtype=float)
            return np.cos(freq * (x[..., 0] - lo))

        def grad_f(x):
            x = np.asarray(x, dtype=float)
            return (-freq * np.sin(freq * (x[..., 0] - lo)))[..., None]

        return InitialCondition(f=f, grad_f=grad_f, label=f"cosine_mode(k={k})")
    if isinstance(geom, Ball):
        center, r2 = geom.center, geom.radius ** 2
        freq = k * np.pi / r2

        def f(x):
            x = np.asarray(x, dtype=float)
            rho = np.sum((x - center) ** 2, axis=-1)
            return np.cos(freq * rho)

        def grad_f(x):
            x = np.asarray(x, dtype=float)
            rho = np.sum((x - center) ** 2, axis=-1)
            return -np.sin(freq * rho)[..., None] * 2.0 * freq * (x - center)

        return InitialCondition(f=f, grad_f=grad_f, label=f"cosine_mode(k={k})")
    raise InvalidInputError(f"cosine_mode is defined for Interval and Ball, not {type(geom).__name__}")


def gaussian_bump(center, width: float) -> InitialCondition:
    """f(x) = exp(-|x - c|^2 / (2 w^2))."""
    c = np.asarray(center, dtype=float)
    if not width > 0:
        raise InvalidInputError("width must be positive")
    w2 = float(width) ** 2

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * np.sum((x - c) ** 2, axis=-1) / w2)

    def grad_f(x):
        x = np.asarray(x, dtype=float)
        return -f(x)[..., None] * (x - c) / w2

    return InitialCondition(f=f, grad_f=grad_f, label="gaussian_bump")


def linear_profile(weights) -> InitialCondition:
    """f(x) = w . x, used by closed-form Jacobian benchmarks."""
    w = np.asarray(weights, dtype=float)

    def f(x):
        return np.asarray(x, dtype=float) @ w

    def grad_f(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(w, x.shape)

    return InitialCondition(f=f, grad_f=grad_f, label="linear")


# ---------------------------------------------------------------------------
# assumption checks


@dataclass
class AssumptionReport:
    """Numeric evidence for the standing assumptions, with pass flags."""

    min_ellipticity: float | None = None
    min_noncharacteristic: float | None = None
    max_derivative_mismatch: float | None = None
    thresholds: dict = dc_field(default_factory=dict)
    passes: dict = dc_field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return all(self.passes.values())

    def merged(self, other: "AssumptionReport") -> "AssumptionReport":
        def pick(a, b):
            return b if b is not None else a

        return AssumptionReport(
            min_ellipticity=pick(self.min_ellipticity, other.min_ellipticity),
            min_noncharacteristic=pick(self.min_noncharacteristic, other.min_noncharacteristic),
            max_derivative_mismatch=pick(self.max_derivative_mismatch,
                                         other.max_derivative_mismatch),
            thresholds={**self.thresholds, **other.thresholds},
            passes={**self.passes, **other.passes})


def check_ellipticity(field: CoefficientField, geom: DomainGeometry,
                      samples: int = 256, seed: int = 0,
                      threshold: float = 1e-3) -> AssumptionReport:
    """Smallest eigenvalue of a(x) over low-discrepancy interior samples."""
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    pts = geom.sample_interior(samples, seed=seed)
    eigs = np.linalg.eigvalsh(field.diffusion(pts))
    lo = float(np.min(eigs))
    return AssumptionReport(
        min_ellipticity=lo,
        thresholds={"ellipticity": threshold},
        passes={"ellipticity": lo >= threshold})


def check_noncharacteristic(field: CoefficientField, geom: DomainGeometry,
                            shell_width: float | None = None,
                            samples: int = 256, seed: int = 0,
                            threshold: float = 1e-3) -> AssumptionReport:
    """Minimum of sum_j (gamma . sigma_j)^2 over a boundary shell.

    Shell points are boundary samples pushed inward by up to
    ``shell_width`` (default one tenth of the diameter); each is paired
    with the inward normal of the boundary point it came from.
    """
    if shell_width is None:
        shell_width = 0.1 * geom.diameter
    if not shell_width > 0:
        raise InvalidInputError("shell width must be positive")
    x, _, gamma = geom.sample_boundary_shell(samples, shell_width, seed=seed)
    sig = field.sigma(x)
    dots = np.einsum("mi,mij->mj", gamma, sig)
    lo = float(np.min(np.sum(dots ** 2, axis=1)))
    return AssumptionReport(
        min_noncharacteristic=lo,
        thresholds={"noncharacteristic": threshold},
        passes={"noncharacteristic": lo >= threshold})


def check_derivatives(field: CoefficientField, initial: InitialCondition | None,
                      geom: DomainGeometry, samples: int = 64,
                      step: float = 1e-5, tol: float = 1e-6) -> AssumptionReport:
    """Central-difference guard for the hand-supplied derivative callbacks."""
    if not step > 0:
        raise InvalidInputError("step must be positive")
    pts = geom.sample_interior(samples, seed=17)
    d = field.dimension
    worst = 0.0
    gb = field.grad_b(pts)
    gs = field.grad_sigma(pts)
    for k in range(d):
        e = np.zeros(d)
        e[k] = step
        db = (field.b(pts + e) - field.b(pts - e)) / (2 * step)
        worst = max(worst, float(np.max(np.abs(db - gb[..., :, k]))))
        ds = (field.sigma(pts + e) - field.sigma(pts - e)) / (2 * step)
        # sigma entry [i, j] differentiated along k sits at grad_sigma [j, i, k]
        worst = max(worst, float(np.max(np.abs(ds - np.swapaxes(gs[..., k], -1, -2)))))
        if initial is not None:
            df = (initial.f(pts + e) - initial.f(pts - e)) / (2 * step)
            ref = initial.grad_f(pts)[..., k]
            worst = max(worst, float(np.max(np.abs(df - ref) / (1.0 + np.abs(ref)))))
    return AssumptionReport(
        max_derivative_mismatch=worst,
        thresholds={"derivatives": tol},
        passes={"derivatives": worst <= tol})
