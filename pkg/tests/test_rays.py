"""Order-preservation certification and ray-monotonicity classification."""

import json

import numpy as np
import pytest

from siphkit.exprlang import bind
from siphkit.gallery import REGISTRY, make_builtin
from siphkit.rays import (
    SamplingPlan,
    check_decomposability,
    check_scaling_invariance,
    classify_ray,
    default_directions,
    order_trichotomy,
)


# ---------------------------------------------------------------------------
# trichotomy


def test_order_trichotomy_basic():
    assert order_trichotomy(1.0, 2.0) == -1
    assert order_trichotomy(2.0, 1.0) == 1
    assert order_trichotomy(1.0, 1.0) == 0


def test_order_trichotomy_tie_band_is_relative():
    assert order_trichotomy(1.0, 1.0 + 1e-15) == 0
    assert order_trichotomy(1e6, 1e6 * (1 + 1e-14)) == 0
    assert order_trichotomy(1.0, 1.0 + 1e-9) == -1


def test_order_trichotomy_infinities():
    assert order_trichotomy(np.inf, np.inf) == 0
    assert order_trichotomy(-np.inf, np.inf) == -1
    assert order_trichotomy(np.inf, 1.0) == 1


def test_order_trichotomy_vectorized():
    out = order_trichotomy([1.0, 2.0, 3.0], [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(out, [-1, 0, 1])


# ---------------------------------------------------------------------------
# sampling plan


def test_sampling_plan_validation():
    with pytest.raises(ValueError):
        SamplingPlan(n_samples=0)
    with pytest.raises(ValueError):
        SamplingPlan(rho_min=2.0, rho_max=1.0)
    with pytest.raises(ValueError):
        SamplingPlan(rho_min=0.0)
    with pytest.raises(ValueError):
        SamplingPlan(box_radius=0.0)
    with pytest.raises(ValueError):
        SamplingPlan(t_max=-1.0)
    with pytest.raises(ValueError):
        SamplingPlan(grid_points=2)


def test_sampling_plan_grid_and_draws():
    plan = SamplingPlan(seed=3, n_samples=50, t_max=5.0, grid_points=10)
    grid = plan.t_grid()
    assert grid.shape == (10,)
    assert (np.diff(grid) > 0).all()
    assert grid[0] > 0 and grid[-1] == pytest.approx(5.0)
    rhos = plan.rhos()
    assert rhos.shape == (50,)
    assert (rhos >= plan.rho_min).all() and (rhos <= plan.rho_max).all()
    X = plan.box_points(3)
    assert X.shape == (50, 3)
    assert (np.abs(X) <= plan.box_radius).all()
    U = plan.sphere_points(4, 20)
    np.testing.assert_allclose(np.linalg.norm(U, axis=1), 1.0, rtol=1e-12)


# ---------------------------------------------------------------------------
# order-preservation certification


def test_sphere_passes_large_battery():
    f = make_builtin("sphere", 3)
    report = check_scaling_invariance(f, SamplingPlan(n_samples=10_000))
    assert report.passed
    assert report.violations == 0
    assert report.witnesses == []
    assert report.trials == 10_000 + 8  # structured battery: 2 per axis + 2 cross


def test_branchy_bounded_field_still_passes():
    f = make_builtin("tanh_exp", 2)
    report = check_scaling_invariance(f, SamplingPlan(n_samples=2000))
    assert report.passed, report.witnesses[:1]


def test_one_dimensional_counterexample_fails_with_exact_witness():
    f = make_builtin("footnote_1d", 1)
    report = check_scaling_invariance(f, SamplingPlan(n_samples=500))
    assert not report.passed
    assert report.violations >= 1
    w = report.witnesses[0]
    assert w["kind"] == "order_violation"
    assert w["x"] == [0.5]
    assert w["y"] == [-0.5]
    assert w["rho"] == 4.0
    assert w["f_x"] == pytest.approx(0.5)
    assert w["f_y"] == pytest.approx(0.25)
    assert w["f_rho_x"] == pytest.approx(2.0)
    assert w["f_rho_y"] == pytest.approx(4.0)


def test_certification_is_deterministic_per_seed():
    f = make_builtin("footnote_1d", 1)
    plan = SamplingPlan(seed=9, n_samples=300)
    a = check_scaling_invariance(f, plan).to_dict()
    b = check_scaling_invariance(f, plan).to_dict()
    assert json.dumps(a) == json.dumps(b)


# ---------------------------------------------------------------------------
# ray classification


def test_classify_ray_kinds_on_gallery():
    assert classify_ray(make_builtin("sphere", 2), [1.0, 0.0]).kind == "strictly-increasing"
    assert classify_ray(make_builtin("linear_x1", 2), [-1.0, 0.0]).kind == "strictly-decreasing"
    assert classify_ray(make_builtin("gauss_si", 2), [0.3, 0.4]).kind == "strictly-decreasing"
    # the cone field is identically zero along the coordinate axis
    assert classify_ray(make_builtin("piecewise_ph", 2), [0.0, 1.0]).kind == "constant"


def test_classify_ray_detects_inversion_with_witness():
    f = bind("(x_1 - 1)^2", 1)
    verdict = classify_ray(f, [1.0])
    assert verdict.kind == "non-monotone"
    assert not verdict.monotone
    t_lo, t_hi = verdict.witness
    assert 0.0 < t_lo < t_hi


def test_classify_ray_flags_nonfinite_values():
    f = bind("sqrt(x_1)", 1)
    with np.errstate(all="ignore"):
        verdict = classify_ray(f, [-1.0])
    assert verdict.kind == "non-finite"


def test_classification_is_scale_invariant_for_invariant_fields():
    for name in ("sphere", "gauss_si", "linear_x1"):
        f = make_builtin(name, 2)
        for x in ([0.7, -0.2], [-1.0, 0.5]):
            base = classify_ray(f, x).kind
            for rho in (0.1, 10.0):
                assert classify_ray(f, np.multiply(rho, x)).kind == base, (name, rho)


def test_classify_ray_grid_validation():
    f = make_builtin("sphere", 2)
    with pytest.raises(ValueError):
        classify_ray(f, [1.0, 0.0], grid=[2.0, 1.0])
    with pytest.raises(ValueError):
        classify_ray(f, [1.0, 0.0], grid=[0.0, 1.0])
    with pytest.raises(ValueError):
        classify_ray(f, [1.0, 0.0], grid=[[1.0, 2.0]])


def test_default_directions_shape():
    D = default_directions(3, seed=1)
    assert D.shape == (3 + 3 + 6, 3)
    np.testing.assert_allclose(np.linalg.norm(D[6:], axis=1), 1.0, rtol=1e-12)
    np.testing.assert_array_equal(D[:3], np.eye(3))


# ---------------------------------------------------------------------------
# decomposability probe


def test_monotone_composition_is_decomposable():
    report = check_decomposability(make_builtin("sphere", 3))
    assert report.verdict == "decomposable"
    assert set(report.ray_kinds) == {"strictly-increasing"}
    assert report.witnesses == []


def test_sign_changing_field_is_decomposable():
    report = check_decomposability(make_builtin("linear_x1", 2))
    assert report.verdict == "decomposable"
    assert "strictly-increasing" in report.ray_kinds
    assert "strictly-decreasing" in report.ray_kinds


def test_decreasing_profile_is_decomposable():
    report = check_decomposability(make_builtin("gauss_si", 2))
    assert report.verdict == "decomposable"
    assert set(report.ray_kinds) == {"strictly-decreasing"}


def test_branch_jump_yields_disjoint_images():
    f = make_builtin("tanh_exp", 2)
    report = check_decomposability(f, plan=SamplingPlan(t_max=20.0))
    assert report.verdict == "not-decomposable"
    disjoint = [w for w in report.witnesses if w["kind"] == "disjoint_image"]
    assert disjoint, report.witnesses
    w = disjoint[0]
    # one branch saturates below 1, the other starts above 2: no shared level
    assert w["range_a"][1] < 1.0
    assert w["range_b"][0] > 2.0


def test_order_violation_disqualifies_directly():
    report = check_decomposability(make_builtin("footnote_1d", 1))
    assert report.verdict == "not-decomposable"
    assert any(w["kind"] == "si_violation" for w in report.witnesses)


def test_single_direction_skips_image_comparison():
    report = check_decomposability(make_builtin("sphere", 2), directions=[[1.0, 0.0]])
    assert report.verdict == "decomposable"
    assert report.ray_kinds == ["strictly-increasing"]


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_probe_agrees_with_ground_truth_tags(name):
    entry = REGISTRY[name]
    n = max(2, entry.min_n)
    f = make_builtin(name, n)
    report = check_decomposability(f)
    if f.meta.decomposable:
        assert report.verdict == "decomposable", (name, report.witnesses[:1])
    else:
        assert report.verdict == "not-decomposable", name
