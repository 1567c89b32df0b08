import numpy as np
import pytest

from neugrad.geometry import Ball, Interval
from neugrad.model import (
    AssumptionReport,
    CoefficientField,
    FieldBounds,
    brownian_field,
    check_derivatives,
    check_ellipticity,
    check_noncharacteristic,
    cosine_mode,
    gaussian_bump,
    linear_drift_field,
    varsigma_field,
)

BALL = Ball([0.0, 0.0], 1.0)
INTERVAL = Interval(0.0, 1.0)


def diag_sigma_field(diag):
    """Constant diagonal diffusion, zero drift."""
    diag = np.asarray(diag, dtype=float)
    d = len(diag)
    mat = np.diag(diag)

    def b(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def sigma(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(mat, x.shape + (d,))

    def zeros_mat(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (d,))

    def zeros_tensor(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (d, d))

    return CoefficientField(
        dimension=d, b=b, sigma=sigma, grad_b=zeros_mat, grad_sigma=zeros_tensor,
        bounds=FieldBounds(b=0.0, sigma=float(np.max(np.abs(diag))), grad_b=0.0, grad_sigma=0.0),
        zero_drift=True, constant_sigma=True, label="diag")


def test_ellipticity_identity_passes():
    rep = check_ellipticity(brownian_field(2), BALL, samples=64, threshold=0.5)
    assert rep.min_ellipticity == pytest.approx(1.0, abs=1e-12)
    assert rep.overall_pass


def test_ellipticity_degenerate_fails():
    rep = check_ellipticity(diag_sigma_field([1.0, 0.0]), BALL, samples=64, threshold=0.5)
    assert rep.min_ellipticity == pytest.approx(0.0, abs=1e-12)
    assert not rep.overall_pass


def test_ellipticity_varsigma_against_brute_force():
    field = varsigma_field(2, kappa=0.1)
    # brute-force oracle: the smallest eigenvalue of a(x) is (1 + 0.1 sin x1)^2,
    # minimized over a dense grid covering the ball
    x1 = np.linspace(-1.0, 1.0, 20001)
    brute = np.min((1.0 + 0.1 * np.sin(x1)) ** 2)
    rep = check_ellipticity(field, BALL, samples=512, threshold=0.5)
    assert brute >= 0.81
    assert rep.min_ellipticity >= brute - 1e-12
    assert rep.min_ellipticity <= brute + 0.05
    assert rep.overall_pass


def test_noncharacteristic_identity():
    rep = check_noncharacteristic(brownian_field(2), BALL, samples=64, threshold=0.5)
    assert rep.min_noncharacteristic == pytest.approx(1.0, abs=1e-12)
    assert rep.overall_pass


def test_noncharacteristic_tangent_column_contributes_zero():
    # first diffusion column tangent to the circles around the origin, second radial
    def sigma(x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)[..., None]
        tang = np.stack([-x[..., 1], x[..., 0]], axis=-1) / r
        rad = x / r
        return np.stack([tang, rad], axis=-1)

    def b(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def zeros_mat(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (2,))

    def zeros_tensor(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (2, 2))

    field = CoefficientField(2, b, sigma, zeros_mat, zeros_tensor,
                             FieldBounds(0.0, 1.0, np.inf, np.inf), label="tangent")
    rep = check_noncharacteristic(field, BALL, shell_width=1e-6, samples=128, threshold=0.5)
    # the tangent column contributes nothing; the radial column contributes ~1
    assert rep.min_noncharacteristic == pytest.approx(1.0, abs=1e-4)


def test_noncharacteristic_anisotropic_minimum():
    # oracle: minimize 4 cos^2(t) + sin^2(t) = 1 + 3 cos^2(t) over a dense grid
    theta = np.linspace(0.0, 2 * np.pi, 100001)
    brute = np.min(4 * np.cos(theta) ** 2 + np.sin(theta) ** 2)
    assert brute == pytest.approx(1.0, abs=1e-8)
    rep = check_noncharacteristic(diag_sigma_field([2.0, 1.0]), BALL,
                                  samples=512, threshold=0.5)
    assert 1.0 - 1e-9 <= rep.min_noncharacteristic <= 1.05


def test_derivative_check_affine_exact():
    field = linear_drift_field(-np.eye(2), clamp_box=(-3 * np.ones(2), 3 * np.ones(2)))
    rep = check_derivatives(field, None, BALL, samples=32, step=1e-5, tol=1e-6)
    assert rep.overall_pass
    assert rep.max_derivative_mismatch < 1e-9


def test_derivative_check_flags_wrong_gradient():
    def b(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        out[..., 0] = np.sin(x[..., 0])
        return out

    def wrong_grad_b(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (2,))

    base = brownian_field(2)
    field = CoefficientField(2, b, base.sigma, wrong_grad_b, base.grad_sigma,
                             FieldBounds(1.0, 1.0, 1.0, 0.0), label="broken")
    rep = check_derivatives(field, None, BALL, samples=64, step=1e-5, tol=1e-6)
    assert not rep.overall_pass
    # mismatch is |cos x1| for some sampled x1 inside the unit ball
    assert np.cos(1.0) - 1e-6 <= rep.max_derivative_mismatch <= 1.0 + 1e-6


@pytest.mark.parametrize("field", [
    brownian_field(2),
    linear_drift_field(np.array([[0.0, 1.0], [-0.5, -1.0]]),
                       clamp_box=(-4 * np.ones(2), 4 * np.ones(2))),
    varsigma_field(2, kappa=0.3),
])
def test_builtins_pass_derivative_check(field):
    rep = check_derivatives(field, None, BALL, samples=48, step=1e-5, tol=1e-6)
    assert rep.overall_pass, rep.max_derivative_mismatch


def test_diffusion_matrix_symmetry():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(40, 2))
    for field in [varsigma_field(2, 0.4), diag_sigma_field([2.0, 1.0])]:
        a = field.diffusion(pts)
        assert np.max(np.abs(a - np.swapaxes(a, -1, -2))) <= 1e-12


def test_constant_sigma_builtins_have_zero_sigma_gradient():
    pts = np.random.default_rng(1).uniform(-1, 1, size=(10, 2))
    for field in [brownian_field(2),
                  linear_drift_field(np.eye(2), clamp_box=(-2 * np.ones(2), 2 * np.ones(2)))]:
        assert field.constant_sigma
        assert np.all(field.grad_sigma(pts) == 0.0)


def test_linear_drift_exact_inside_clamp_box():
    B = np.array([[0.0, 1.0], [0.0, 0.0]])
    field = linear_drift_field(B, clamp_box=(-2 * np.ones(2), 2 * np.ones(2)))
    pts = np.random.default_rng(2).uniform(-1.5, 1.5, size=(30, 2))
    np.testing.assert_array_equal(field.b(pts), pts @ B.T)
    np.testing.assert_array_equal(field.grad_b(pts), np.broadcast_to(B, (30, 2, 2)))
    # outside the box the drift saturates but stays finite and bounded
    far = np.array([[50.0, -50.0]])
    assert np.all(np.isfinite(field.b(far)))
    assert np.max(np.abs(field.b(far))) <= field.bounds.b


@pytest.mark.parametrize("initial,geom", [
    (cosine_mode(INTERVAL, 1), INTERVAL),
    (cosine_mode(INTERVAL, 3), INTERVAL),
    (cosine_mode(BALL, 1), BALL),
    (gaussian_bump([0.2, -0.1], 0.5), BALL),
])
def test_initial_condition_gradient_matches_fd(initial, geom):
    pts = geom.sample_interior(32, seed=4)
    h = 1e-5
    for k in range(geom.dimension):
        e = np.zeros(geom.dimension)
        e[k] = h
        fd = (initial.f(pts + e) - initial.f(pts - e)) / (2 * h)
        ref = initial.grad_f(pts)[:, k]
        assert np.max(np.abs(fd - ref) / (1.0 + np.abs(ref))) < 1e-4


def test_cosine_mode_neumann_compatible_on_ball():
    initial = cosine_mode(BALL, 2)
    alpha = BALL.sample_boundary(16, seed=6)
    gamma = BALL.normals_at(alpha)
    normal_deriv = np.sum(initial.grad_f(alpha) * gamma, axis=1)
    np.testing.assert_allclose(normal_deriv, 0.0, atol=1e-12)


def test_report_merge():
    a = AssumptionReport(min_ellipticity=1.0, thresholds={"ellipticity": 0.5},
                         passes={"ellipticity": True})
    b = AssumptionReport(max_derivative_mismatch=1e-9, thresholds={"derivatives": 1e-6},
                         passes={"derivatives": True})
    merged = a.merged(b)
    assert merged.overall_pass
    assert merged.min_ellipticity == 1.0
    assert merged.max_derivative_mismatch == 1e-9
