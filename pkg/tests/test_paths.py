import pytest
import numpy as np
from scipy.stats import ks_2samp

from fracmart import paths
from fracmart.data_models import CirculantEmbeddingError, ConstraintViolation, IntegrandSpec, make_grid
from fracmart.paths import (
    RandomStream,
    bm_increment_matrix,
    bm_increments,
    brownian_path,
    fbm_covariance,
    fbm_matrix,
    fbm_path,
    integrand_matrix,
    integrand_path,
    resolve_fbm_method,
    streams_for,
)


def test_stream_is_pure_function_of_seed_and_index():
    a = RandomStream(seed=11, index=5).normals(64)
    b = RandomStream(seed=11, index=5).normals(64)
    assert np.array_equal(a, b)


def test_distinct_indices_and_substreams_differ():
    base = RandomStream(seed=11, index=5)
    assert not np.array_equal(base.normals(16), RandomStream(seed=11, index=6).normals(16))
    assert not np.array_equal(base.normals(16), base.substream(1).normals(16))
    assert not np.array_equal(base.normals(16), RandomStream(seed=12, index=5).normals(16))


def test_uniforms_open_interval():
    u = RandomStream(seed=0, index=0).uniforms(10_000)
    assert u.min() > 0.0
    assert u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.02


def test_rows_independent_of_batch_order():
    grid = make_grid(1.0, 32)
    forward = bm_increment_matrix(grid, streams_for(3, [1, 2, 3]))
    backward = bm_increment_matrix(grid, streams_for(3, [3, 2, 1]))
    assert np.array_equal(forward, backward[::-1])


def test_bm_increment_variance():
    grid = make_grid(2.0, 100_000)
    dW = bm_increments(grid, RandomStream(seed=1, index=0))
    assert dW.shape == (grid.cells,)
    assert np.var(dW) / grid.step == pytest.approx(1.0, rel=0.02)


def test_brownian_path_starts_at_zero():
    grid = make_grid(1.0, 16)
    path = brownian_path(grid, RandomStream(seed=1, index=0))
    assert path.values[0] == 0.0
    assert path.values.shape == (17,)
    assert np.allclose(np.diff(path.values), bm_increments(grid, RandomStream(seed=1, index=0)))


def test_fbm_covariance_properties():
    grid = make_grid(2.0, 8)
    cov = fbm_covariance(grid, 0.75)
    assert np.allclose(cov, cov.T)
    assert np.allclose(np.diag(cov), grid.points[1:] ** 1.5)
    with pytest.raises(ConstraintViolation):
        fbm_covariance(grid, 1.0)


def test_fbm_covariance_value_off_diagonal():
    # R(1/2, 1) = (0.5^1.5 + 1 - 0.5^1.5) / 2 for H = 3/4
    cov = fbm_covariance(make_grid(1.0, 2), 0.75)
    assert cov[0, 1] == pytest.approx(0.5, abs=1e-15)
    assert cov[0, 0] == pytest.approx(0.5**1.5)


def test_fbm_half_is_brownian_covariance():
    grid = make_grid(1.0, 4)
    cov = fbm_covariance(grid, 0.5)
    s, u = np.meshgrid(grid.points[1:], grid.points[1:], indexing="ij")
    assert np.allclose(cov, np.minimum(s, u))


@pytest.mark.parametrize("method", ["exact", "circulant"])
def test_fbm_terminal_variance(method):
    grid = make_grid(1.0, 64)
    hurst = 0.75
    values = fbm_matrix(grid, hurst, streams_for(5, range(4000)), method=method)
    assert values.shape == (4000, 65)
    assert np.all(values[:, 0] == 0.0)
    assert np.var(values[:, -1]) == pytest.approx(1.0, rel=0.1)


def test_exact_and_circulant_agree_in_law():
    grid = make_grid(1.0, 64)
    exact = fbm_matrix(grid, 0.75, streams_for(21, range(2000)), method="exact")[:, -1]
    circulant = fbm_matrix(grid, 0.75, streams_for(22, range(2000)), method="circulant")[:, -1]
    assert ks_2samp(exact, circulant, method="asymp").pvalue > 0.001


def test_fbm_scales_with_horizon():
    grid = make_grid(4.0, 64)
    values = fbm_matrix(grid, 0.75, streams_for(6, range(4000)), method="circulant")
    assert np.var(values[:, -1]) == pytest.approx(4.0**1.5, rel=0.1)


def test_fbm_path_label():
    path = fbm_path(make_grid(1.0, 8), 0.3, RandomStream(seed=0, index=1))
    assert path.label == "B^H"
    assert path.values[0] == 0.0


def test_resolve_fbm_method():
    assert resolve_fbm_method(make_grid(1.0, 2**12), "auto") == "circulant"
    assert resolve_fbm_method(make_grid(1.0, 2**12 - 1), "auto") == "exact"
    assert resolve_fbm_method(make_grid(1.0, 8), "circulant") == "circulant"
    with pytest.raises(ConstraintViolation):
        resolve_fbm_method(make_grid(1.0, 8), "hosking")


def test_circulant_embedding_failure(monkeypatch):
    def broken_autocovariance(cells, hurst):
        return np.concatenate(([1.0, 2.0], np.zeros(cells - 1)))

    monkeypatch.setattr(paths, "fgn_autocovariance", broken_autocovariance)
    paths._circulant_scales.cache_clear()
    try:
        with pytest.raises(CirculantEmbeddingError, match="method='exact'"):
            fbm_matrix(make_grid(1.0, 16), 0.61, streams_for(0, [0]), method="circulant")
    finally:
        paths._circulant_scales.cache_clear()


def test_integrand_constant_and_table():
    grid = make_grid(1.0, 4)
    streams = streams_for(0, [0, 1])
    assert np.all(integrand_matrix(IntegrandSpec(constant=2.5), grid, streams) == 2.5)
    table = IntegrandSpec(kind="table", table=(0.0, 1.0, 2.0, 3.0, 4.0))
    assert np.array_equal(integrand_matrix(table, grid, streams)[1], np.arange(5.0))
    with pytest.raises(ConstraintViolation, match="table length"):
        integrand_matrix(table, make_grid(1.0, 8), streams)


def test_integrand_phi_of_fbm():
    grid = make_grid(1.0, 32)
    streams = streams_for(2, range(10))
    gauss = integrand_matrix(IntegrandSpec(kind="phi-of-fbm", hurst=0.75), grid, streams)
    shifted = integrand_matrix(IntegrandSpec(kind="phi-of-fbm", hurst=0.75, phi="shifted-gauss"), grid, streams)
    assert np.all(gauss[:, 0] == 1.0)
    assert np.all((gauss > 0) & (gauss <= 1.0))
    assert np.allclose(shifted, 1.0 + gauss)


def test_integrand_driver_independent_of_w():
    grid = make_grid(1.0, 32)
    stream = RandomStream(seed=4, index=0)
    xi = integrand_path(IntegrandSpec(kind="phi-of-fbm", hurst=0.5), grid, stream)
    driver = fbm_path(grid, 0.5, stream.substream(paths.SUBSTREAM_XI))
    assert np.allclose(xi.values, np.exp(-driver.values**2))
