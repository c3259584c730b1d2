import math

import pytest
import numpy as np
from scipy.stats import norm

from fracmart.data_models import ConstraintViolation, SamplePath, make_grid
from fracmart.deterministic import (
    TOEPLITZ_TEST_FUNCTIONS,
    WeightedQuadrature,
    cumulative_integral,
    expected_gauss_occupation,
    expected_local_time,
    expected_local_time_bm,
    fubini_identity_gap,
    gaussian_phi_integral,
    local_time_correction,
    remark_holder_check,
    sample_on_grid,
    singular_integral,
    toeplitz_ladder,
    toeplitz_ratio,
    toeplitz_trend,
    window_local_time_mean,
)
from fracmart.paths import RandomStream


@pytest.mark.parametrize("p", [-0.7, -0.5, 0.0, 0.5, 0.9])
def test_weights_telescope(p):
    grid = make_grid(2.0, 100)
    rule = WeightedQuadrature.build(p, grid)
    assert math.fsum(rule.weights) == pytest.approx(2.0 ** (p + 1) / (p + 1), rel=1e-12)
    assert singular_integral(p, lambda s: 1.0, grid) == pytest.approx(2.0 ** (p + 1) / (p + 1), rel=1e-12)


def test_left_riemann_sum():
    grid = make_grid(1.0, 1000)
    assert singular_integral(0.0, lambda s: s, grid) == pytest.approx(0.5 - 0.5 * grid.step, rel=1e-12)


def test_beta_function_value():
    grid = make_grid(1.0, 4096)
    assert singular_integral(-0.5, lambda s: s, grid) == pytest.approx(4.0 / 3.0, abs=2e-3)


def test_singular_integral_rejects_p():
    with pytest.raises(ConstraintViolation, match="p > -1"):
        singular_integral(-1.0, lambda s: s, make_grid(1.0, 4))


def test_sample_on_grid_shapes():
    grid = make_grid(1.0, 4)
    assert sample_on_grid(np.arange(5.0), grid).shape == (5,)
    left = sample_on_grid(np.arange(4.0), grid)
    assert left.shape == (5,) and np.isnan(left[-1])
    with pytest.raises(ConstraintViolation):
        sample_on_grid(np.arange(3.0), grid)


def test_cumulative_integral():
    grid = make_grid(2.0, 4)
    assert np.allclose(cumulative_integral(lambda s: 1.0, grid), grid.points)


def test_toeplitz_constant_x():
    grid = make_grid(10.0, 1000)
    assert toeplitz_ratio(0.3, lambda s: 3.0, lambda s: 1.0 + s, grid) == pytest.approx(3.0, rel=1e-12)


def test_toeplitz_zero_gamma():
    grid = make_grid(10.0, 100)
    with pytest.raises(ConstraintViolation) as info:
        toeplitz_ratio(0.3, lambda s: s, lambda s: 0.0, grid)
    assert info.value.constraint == "denominator > 0"


def test_toeplitz_negative_gamma():
    with pytest.raises(ConstraintViolation, match="gamma >= 0"):
        toeplitz_ratio(0.3, lambda s: s, lambda s: -1.0, make_grid(1.0, 10))


def test_toeplitz_ladders_converge():
    t_values = [10.0, 100.0, 1000.0]
    ones = lambda s: np.ones_like(s)
    rising = toeplitz_ladder(0.3, TOEPLITZ_TEST_FUNCTIONS["ratio"], ones, t_values)
    falling = toeplitz_ladder(0.3, TOEPLITZ_TEST_FUNCTIONS["decay"], ones, t_values)
    assert rising[0] < rising[1] < rising[2] < 1.0
    assert falling[0] > falling[1] > falling[2] > 1.0
    report = toeplitz_trend(0.3, t_values)
    assert report.verdict
    assert set(report.statistics) == {"ratio", "decay"}


def test_gaussian_phi_integral():
    assert gaussian_phi_integral("gauss", 1.0).value == pytest.approx(math.sqrt(math.pi))
    assert gaussian_phi_integral("gauss", 4.0).value == pytest.approx(0.88623, abs=1e-5)
    assert gaussian_phi_integral("gauss", math.pi).value == pytest.approx(1.0)
    numeric = gaussian_phi_integral(lambda z: np.exp(-z * z), 2.0)
    assert numeric.method == "quadrature"
    assert numeric.value == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-8)


def test_gaussian_phi_integral_divergent():
    with pytest.raises(ConstraintViolation, match="does not decay"):
        gaussian_phi_integral("shifted-gauss", 2.0)


def test_expected_local_time():
    assert expected_local_time_bm(0.5) == pytest.approx(0.79788, abs=1e-5)
    assert expected_local_time_bm(0.75) == pytest.approx(1.59577, abs=1e-5)


def test_expected_local_time_off_level_brownian():
    # E L(1, y) = 2 phi(y) - 2 |y| P(Z > |y|) for Brownian motion
    y = 0.5
    closed = 2.0 * norm.pdf(y) - 2.0 * y * norm.sf(y)
    assert expected_local_time(0.5, level=y) == pytest.approx(closed, rel=1e-6)
    assert expected_local_time(0.5, level=-y) == pytest.approx(closed, rel=1e-6)


def test_expected_local_time_horizon_scaling():
    assert expected_local_time(0.75, horizon=4.0) == pytest.approx(4.0**0.25 * 1.59577, rel=1e-5)


def test_window_mean_fine_grid_brownian():
    mean = window_local_time_mean(0.5, make_grid(1.0, 2**16), 0.01)
    assert mean == pytest.approx(expected_local_time_bm(0.5), rel=0.02)


def test_window_mean_short_for_smooth_paths():
    grid = make_grid(1.0, 4096)
    assert window_local_time_mean(0.75, grid, 0.05) < 0.8 * expected_local_time_bm(0.75)
    correction = local_time_correction(0.75, grid, 0.05)
    assert correction > 1.25
    assert correction * window_local_time_mean(0.75, grid, 0.05) == pytest.approx(expected_local_time_bm(0.75))


def test_expected_gauss_occupation_brownian_closed_form():
    for t in (1.0, 100.0, 1e4):
        closed = (math.sqrt(1.0 + 4.0 * t) - 1.0) / (2.0 * math.sqrt(t))
        assert expected_gauss_occupation(0.5, 2.0, t) == pytest.approx(closed, rel=1e-6)
    assert expected_gauss_occupation(0.5, 2.0, 1e4) == pytest.approx(1.0, abs=0.01)


def test_remark_holder_check_holds():
    grid = make_grid(3.0, 300)
    values = 1.0 + np.abs(RandomStream(seed=2, index=0).normals(301))
    check = remark_holder_check(-0.25, 6.0, SamplePath(grid=grid, values=values))
    assert check.holds
    assert check.lhs > 0


def test_remark_holder_check_needs_negative_alpha():
    grid = make_grid(1.0, 10)
    with pytest.raises(ConstraintViolation, match="alpha < 0"):
        remark_holder_check(0.25, 6.0, SamplePath(grid=grid, values=np.ones(11)))


def test_fubini_identity():
    grid = make_grid(1.0, 10_000)
    assert fubini_identity_gap(0.3, lambda s: np.ones_like(s), grid) < 1e-3
    assert fubini_identity_gap(0.3, lambda s: 1.0 + s, grid) < 1e-3
