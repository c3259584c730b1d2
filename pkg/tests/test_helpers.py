import pytest
import os
import json
import math
import tempfile
from unittest.mock import patch

import numpy as np

from fracmart.fm_sysenv import env_int, load_env_from_execution_dir
from fracmart.helpers import (
    compensated_mean_var,
    ensure_output_dir,
    load_config_file,
    merge_config,
    resolve_workers,
    standard_error,
)
from fracmart.data_models import (
    Alpha,
    ConstraintViolation,
    GridMismatchError,
    IntegrandSpec,
    TailEstimate,
    TimeGrid,
    TrendReport,
    make_alpha,
    make_grid,
)


@pytest.fixture
def temp_config_dir():
    with tempfile.TemporaryDirectory() as tmpdirname:
        yield tmpdirname


def write_json(directory, name, payload):
    path = os.path.join(directory, name)
    with open(path, "w") as f:
        json.dump(payload, f)
    return path


def test_compensated_mean_var():
    mean, var = compensated_mean_var([1.0, 2.0, 3.0, 4.0])
    assert mean == 2.5
    assert var == pytest.approx(5.0 / 3.0)


def test_compensated_mean_var_order_independent():
    values = [1e16, 1.0, -1e16, 3.0]
    assert compensated_mean_var(values)[0] == compensated_mean_var(values[::-1])[0] == 1.0


def test_compensated_mean_var_single_and_empty():
    assert compensated_mean_var([7.0]) == (7.0, 0.0)
    with pytest.raises(ValueError, match="empty"):
        compensated_mean_var([])


def test_standard_error():
    assert standard_error([1.0, 3.0]) == pytest.approx(math.sqrt(2.0 / 2.0))


def test_resolve_workers_flag_wins():
    with patch.dict(os.environ, {"FRACMART_WORKERS": "3"}):
        assert resolve_workers(2) == 2
        assert resolve_workers(None) == 3


def test_resolve_workers_default():
    with patch.dict(os.environ, {"FRACMART_WORKERS": ""}):
        assert resolve_workers(None) >= 1


def test_resolve_workers_rejects_zero():
    with pytest.raises(ValueError, match="at least 1"):
        resolve_workers(0)


def test_env_int(monkeypatch):
    monkeypatch.setenv("FRACMART_TEST_INT", "12")
    assert env_int("FRACMART_TEST_INT", 5) == 12
    monkeypatch.setenv("FRACMART_TEST_INT", "")
    assert env_int("FRACMART_TEST_INT", 5) == 5
    monkeypatch.setenv("FRACMART_TEST_INT", "twelve")
    with pytest.raises(ValueError, match="FRACMART_TEST_INT"):
        env_int("FRACMART_TEST_INT", 5)


def test_load_env_from_execution_dir(temp_config_dir, monkeypatch):
    with open(os.path.join(temp_config_dir, ".env"), "w") as f:
        f.write("FRACMART_DOTENV_PROBE=loaded\n")
    monkeypatch.chdir(temp_config_dir)
    monkeypatch.delenv("FRACMART_DOTENV_PROBE", raising=False)
    load_env_from_execution_dir()
    assert os.environ["FRACMART_DOTENV_PROBE"] == "loaded"
    monkeypatch.delenv("FRACMART_DOTENV_PROBE")


def test_load_config_file(temp_config_dir):
    path = write_json(temp_config_dir, "run.json", {"seed": 7, "t-values": [1, 2], "beta-prime": 6})
    config = load_config_file(path)
    assert config == {"seed": 7, "t_values": [1, 2], "beta_prime": 6}


def test_load_config_file_rejects_nested(temp_config_dir):
    path = write_json(temp_config_dir, "run.json", {"seed": {"value": 7}})
    with pytest.raises(ValueError, match="scalar"):
        load_config_file(path)


def test_load_config_file_missing(temp_config_dir):
    with pytest.raises(FileNotFoundError):
        load_config_file(os.path.join(temp_config_dir, "absent.json"))


def test_merge_config_precedence():
    merged = merge_config({"a": 1, "b": 2, "c": 3}, {"b": 20, "c": 30}, {"c": 300, "a": None})
    assert merged == {"a": 1, "b": 20, "c": 300}


def test_ensure_output_dir(temp_config_dir):
    target = ensure_output_dir(os.path.join(temp_config_dir, "runs", "deep"))
    assert os.path.isdir(target)


def test_time_grid_points():
    grid = make_grid(1.0, 10)
    assert grid.step == 0.1
    assert grid.points[0] == 0.0
    assert grid.points[-1] == pytest.approx(1.0, abs=1e-15)
    assert len(grid.points) == 11


def test_make_grid_rejects_bad_input():
    with pytest.raises(ConstraintViolation, match="n >= 1"):
        make_grid(1.0, 0)
    with pytest.raises(ConstraintViolation, match="t > 0"):
        make_grid(0.0, 4)


def test_alpha_beta():
    assert make_alpha(0.0).beta == 2.0
    assert make_alpha(-0.25).beta == 4.0
    assert make_alpha(0.25).beta == pytest.approx(4.0 / 3.0)
    with pytest.raises(ConstraintViolation):
        make_alpha(0.5)
    with pytest.raises(ValueError):
        Alpha(value=-0.5)


def test_constraint_violation_names_constraint():
    exc = ConstraintViolation("eps < alpha", "eps=0.3, alpha=0.2")
    assert exc.constraint == "eps < alpha"
    assert "eps < alpha" in str(exc)
    assert isinstance(GridMismatchError("x"), ValueError)


def test_integrand_natural_bounds():
    assert IntegrandSpec().c_inf == 1.0
    assert IntegrandSpec(kind="phi-of-fbm", hurst=0.75, phi="shifted-gauss").c_inf == 2.0
    assert IntegrandSpec(kind="table", table=(0.5, -3.0)).c_inf == 3.0
    with pytest.raises(ValueError):
        IntegrandSpec(kind="constant", constant=2.0, bound=1.0)
    with pytest.raises(ValueError):
        IntegrandSpec(kind="phi-of-fbm")


def test_tail_estimate_ordering():
    with pytest.raises(ValueError):
        TailEstimate(
            exceedances=1, replicates=10, p_hat=0.1, lo=0.2, hi=0.3,
            event_frequency=1.0, unconditioned_frequency=0.1, threshold=1.0, bound=0.5,
        )


def test_trend_report_halving_rule():
    report = TrendReport(
        kind="wlln",
        t_values=[10, 40, 160],
        statistics={"p": [0.2, 0.21, 0.05]},
        standard_errors={"p": [0.01, 0.01, 0.01]},
    )
    assert report.verdict
    worse = report.model_copy(update={"statistics": {"p": [0.2, 0.3, 0.05]}})
    assert not worse.series_ok("p")


def test_trend_report_strict_and_final():
    report = TrendReport(kind="ks", t_values=[1, 2], statistics={"d": [0.3, 0.2]}, rule="strict", final_pass=False)
    assert report.series_ok("d")
    assert not report.verdict
    with pytest.raises(ValueError):
        TrendReport(kind="ks", t_values=[2, 1], statistics={"d": [0.3, 0.2]})


def test_time_grid_frozen():
    grid = TimeGrid(horizon=1.0, cells=4)
    with pytest.raises(Exception):
        grid.cells = 8
    assert np.allclose(np.diff(grid.points), 0.25)
