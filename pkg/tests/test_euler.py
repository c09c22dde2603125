"""Homogeneity identities, level-set gradient constancy, paired levels,
saddle shells, and positive-gradient neighborhood certificates."""

import math

import numpy as np
import pytest

from siphkit.decomposition import build_decomposition
from siphkit.euler import (
    euler_residual,
    general_euler_residual,
    levelset_gradient_constancy,
    paired_level_solver,
    positive_gradient_region,
    saddle_levels,
)
from siphkit.field import GradientSpec
from siphkit.gallery import make_builtin, random_si
from siphkit.rays import SamplingPlan


# ---------------------------------------------------------------------------
# degree identity alpha p = grad p . x


def test_sphere_identity_with_numerical_gradients():
    p = make_builtin("sphere", 3)
    report = euler_residual(p, 2.0, grad_spec=GradientSpec(h=1e-5, force_numerical=True))
    assert report.max_residual <= 1e-6
    assert report.grad_mode == "central-difference"
    assert report.h == 1e-5
    assert report.excluded == 0


def test_linear_identity_is_exact_with_analytic_gradients():
    p = make_builtin("linear_x1", 2)
    report = euler_residual(p, 1.0)
    assert report.max_residual <= 1e-10
    assert report.grad_mode == "analytic"


def test_cusped_field_identity_away_from_axes():
    p = make_builtin("half_norm", 2)
    report = euler_residual(p, 1.0)
    assert report.max_residual <= 1e-6
    # hand value at (1, 1): row sum 2, gradient (2, 2), product 4 equals p
    np.testing.assert_allclose(p.gradient([1.0, 1.0]), [2.0, 2.0], atol=1e-12)
    assert p.value([1.0, 1.0]) == pytest.approx(4.0, abs=1e-12)


def test_difference_residual_shrinks_quadratically():
    p = make_builtin("half_norm", 2)
    res = []
    for h in (1e-4, 5e-5):
        report = euler_residual(p, 1.0, grad_spec=GradientSpec(h=h, force_numerical=True))
        res.append(report.max_residual)
    ratio = res[0] / res[1]
    assert 2.5 <= ratio <= 6.0, ratio


def test_report_dictionary_fields():
    report = euler_residual(make_builtin("sphere", 2), 2.0)
    doc = report.to_dict()
    assert doc["alpha"] == 2.0
    assert doc["max_residual"] >= doc["mean_residual"] >= 0.0
    assert doc["n_samples"] == 1000


# ---------------------------------------------------------------------------
# generalized identity through a decomposition


def test_quadratic_profile_identity():
    f = make_builtin("sq_norm", 2)
    d = build_decomposition(f, alpha=1.0, x0=[1.0, 0.0])
    report = general_euler_residual(f, d)
    assert report.max_residual <= 1e-6


def test_gaussian_bump_identity_and_hand_value():
    f = make_builtin("gauss_si", 2)
    d = build_decomposition(f, alpha=2.0)
    report = general_euler_residual(f, d)
    assert report.max_residual <= 1e-6
    # at any unit point the product is -2 e^{-1}
    u = np.array([math.cos(0.3), math.sin(0.3)])
    dot = float(f.gradient(u) @ u)
    assert dot == pytest.approx(-2.0 * math.exp(-1.0), abs=1e-12)
    assert dot == pytest.approx(-0.7357588823428847, abs=1e-12)


def test_random_field_identity_with_numerical_everything():
    f = random_si(11, 3, eps=0.2)
    d = build_decomposition(f)
    report = general_euler_residual(f, d, grad_spec=GradientSpec(h=1e-5))
    assert report.max_residual <= 1e-4
    assert report.grad_mode == "central-difference"
    assert report.n_samples + report.excluded == 1000


# ---------------------------------------------------------------------------
# constancy of grad f . z on level sets


def test_sphere_level_dots_are_constant():
    f = make_builtin("sphere", 3)
    report = levelset_gradient_constancy(f, 4.0, n_points=8)
    assert report.passed
    assert report.skipped == 0
    assert report.values.shape == (8,)
    assert report.mean == pytest.approx(8.0, abs=1e-8)  # 2 ||z||^2 at ||z||^2 = 4
    assert report.spread <= 1e-6


def test_random_field_level_dots_are_constant():
    f = random_si(5, 4, eps=0.25)
    c = f.value([1.0, 0.0, 0.0, 0.0])
    report = levelset_gradient_constancy(f, c, n_points=24, tol=1e-4)
    assert report.passed, report.spread
    assert report.skipped == 0


def test_level_missing_every_ray_gives_failed_report():
    f = make_builtin("sphere", 2)
    report = levelset_gradient_constancy(f, -1.0, n_points=8)
    assert not report.passed
    assert report.skipped == 8
    assert math.isnan(report.spread)


# ---------------------------------------------------------------------------
# paired levels of the bump


def _second_preimage_oracle(r):
    """Independent bisection for u > 1 with u e^{-u} = r^2 e^{-r^2}."""
    target = r * r * math.exp(-r * r)
    lo, hi = 1.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(-mid) > target:
            lo = mid
        else:
            hi = mid
    return math.sqrt(0.5 * (lo + hi))


def test_paired_levels_at_the_half_radius():
    r = 1.0 / math.sqrt(2.0)
    out = paired_level_solver(r)
    assert out.s == pytest.approx(_second_preimage_oracle(r), abs=1e-9)
    assert out.s == pytest.approx(1.3253041947515936, abs=1e-12)
    assert out.residual <= 1e-10
    assert out.shared_value == pytest.approx(0.5 * math.exp(-0.5), rel=1e-12)


def test_paired_levels_saturate_toward_the_peak():
    out = paired_level_solver(0.999)
    assert 1.0 < out.s <= 1.05


def test_paired_levels_are_monotone_in_r():
    assert paired_level_solver(0.3).s > paired_level_solver(0.7).s


def test_paired_levels_domain_validation():
    for bad in (0.0, 1.0, -0.5, 1.3253041947515936):
        with pytest.raises(ValueError):
            paired_level_solver(bad)


def test_paired_levels_share_the_gradient_dot_but_not_the_level():
    f = make_builtin("gauss_si", 2)
    r = 1.0 / math.sqrt(2.0)
    s = paired_level_solver(r).s
    c_r = math.exp(-r * r)
    c_s = math.exp(-s * s)
    assert abs(c_r - c_s) > 1e-3  # genuinely different level sets
    rep_r = levelset_gradient_constancy(f, c_r, n_points=24)
    rep_s = levelset_gradient_constancy(f, c_s, n_points=24)
    assert rep_r.passed and rep_s.passed
    assert rep_r.mean == pytest.approx(rep_s.mean, abs=1e-6)
    assert rep_r.mean == pytest.approx(-math.exp(-0.5), abs=1e-6)


# ---------------------------------------------------------------------------
# saddle shells


def test_saddle_shell_gradients_vanish_on_known_radii():
    f = make_builtin("saddle_si", 3)
    report = saddle_levels(f, k_max=3)
    assert report.passed
    assert report.monotone_ok
    np.testing.assert_allclose(report.radii,
                               [math.sqrt(k * math.pi) for k in (1, 2, 3)],
                               rtol=1e-12)
    assert all(v <= 1e-6 for v in report.max_grad_norms)


def test_saddle_rays_still_increase_across_shells():
    f = make_builtin("saddle_si", 2)
    r = math.sqrt(math.pi)
    lo = f.value([r - 0.1, 0.0])
    mid = f.value([r, 0.0])
    hi = f.value([r + 0.1, 0.0])
    assert lo < mid < hi


def test_saddle_verification_rejects_other_fields():
    with pytest.raises(ValueError):
        saddle_levels(make_builtin("sphere", 2))


# ---------------------------------------------------------------------------
# positive-gradient neighborhood certificates


def test_certificate_on_the_sphere_is_sharp():
    f = make_builtin("sphere", 2)
    cert = positive_gradient_region(f)
    assert cert.ok
    assert np.linalg.norm(cert.z0) == pytest.approx(1.0, abs=1e-9)
    assert cert.level == pytest.approx(1.0, abs=1e-9)
    assert cert.epsilon == pytest.approx(2.0, abs=1e-6)
    # the half-threshold forbids radii below 1/sqrt(2); doubling from 1e-4
    # stops exactly at 0.2048
    assert cert.delta == pytest.approx(0.2048, abs=1e-12)
    assert cert.stop_reason == "violation"
    assert cert.violation is not None
    assert cert.violation["dot"] < cert.epsilon / 2.0


def test_certificate_avoids_saddle_shells():
    f = make_builtin("saddle_si", 2)
    cert = positive_gradient_region(f)
    assert cert.ok
    assert np.linalg.norm(cert.z0) == pytest.approx(1.0, abs=1e-9)
    assert cert.epsilon == pytest.approx(2.0 * math.sin(1.0) ** 2, abs=1e-5)
    assert cert.delta == pytest.approx(0.1024, abs=1e-12)
    assert cert.stop_reason == "violation"
    # the certified tube stays clear of the first flat shell
    assert np.linalg.norm(cert.z0) + cert.delta < math.sqrt(math.pi)


def test_certificate_on_a_random_field():
    f = random_si(2, 3, eps=0.2)
    cert = positive_gradient_region(f)
    assert cert.ok
    assert cert.epsilon > 0
    assert cert.delta > 0
    assert cert.stop_reason in ("violation", "cap")
