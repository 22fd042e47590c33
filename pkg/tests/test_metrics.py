import json
import math
from pathlib import Path

import numpy as np
import pytest

from coopnav.scenarios.metrics import (
    build_report,
    correlation_curve,
    fit_inverse_sqrt,
    relative_rmse_curve,
    rmse_curve,
    trend_slope,
)
from coopnav.validation import InvalidInputError


def test_rmse_curve() -> None:
    errors = np.zeros((2, 1, 2, 3))
    errors[0, 0, 0] = [3.0, 4.0, 0.0]
    errors[1, 0, 1] = [0.0, 0.0, 2.0]
    assert np.allclose(rmse_curve(errors), [math.sqrt(12.5), math.sqrt(2.0)])


def test_missing_entries_are_skipped() -> None:
    errors = np.ones((2, 1, 3, 3))
    errors[0, 0, 1] = np.nan
    errors[:, :, 2] = np.nan
    curve = rmse_curve(errors)
    assert curve[:2] == pytest.approx([math.sqrt(3.0)] * 2)
    assert math.isnan(curve[2])


def test_relative_rmse() -> None:
    rng = np.random.default_rng(0)
    common = rng.normal(size=(50, 1, 4, 3))
    assert np.allclose(relative_rmse_curve(np.repeat(common, 3, axis=1)), 0.0)
    assert np.all(np.isnan(relative_rmse_curve(common)))
    shifted = np.concatenate([common, common + [1.0, 0.0, 0.0]], axis=1)
    assert np.allclose(relative_rmse_curve(shifted), 1.0)


def test_correlation_curve() -> None:
    rng = np.random.default_rng(1)
    a = rng.normal(size=(100, 5, 3))
    assert np.allclose(correlation_curve(a, 2.0 * a + 1.0), 1.0)
    assert np.allclose(correlation_curve(a, -a), -1.0)
    independent = correlation_curve(a, rng.normal(size=(100, 5, 3)))
    assert np.all(np.abs(independent) < 0.4)
    flat = np.ones((100, 5, 3))
    assert np.all(np.isnan(correlation_curve(a, flat)))


def test_fit_inverse_sqrt() -> None:
    fit = fit_inverse_sqrt({n: 2.0 / math.sqrt(n) for n in (1, 4, 16)})
    assert fit.c == pytest.approx(2.0)
    assert fit.max_rel_residual == pytest.approx(0.0, abs=1e-12)
    assert fit.predict(25) == pytest.approx(0.4)
    noisy = fit_inverse_sqrt({2: 1.0, 8: 0.6})
    assert noisy.max_rel_residual > 0.1


def test_fit_needs_two_counts() -> None:
    with pytest.raises(InvalidInputError, match="fitting needs at least 2 distinct N, got 1"):
        fit_inverse_sqrt({4: 1.0})
    with pytest.raises(InvalidInputError, match="finite RMSE values"):
        fit_inverse_sqrt({1: 1.0, 2: math.nan})


def test_trend_slope() -> None:
    assert trend_slope(np.array([1.0, 3.0, 5.0])) == pytest.approx(2.0)
    assert trend_slope(np.array([1.0, np.nan, 5.0]), np.array([0.0, 1.0, 4.0])) == pytest.approx(1.0)
    assert math.isnan(trend_slope(np.array([1.0, np.nan])))


def test_report_files(tmp_path: Path) -> None:
    rng = np.random.default_rng(2)
    errors = rng.normal(size=(4, 2, 5, 3))
    report = build_report(errors, ["a0", "a1"], step_length=0.5, runs=4)
    report.final_rmse = {1: 1.0, 4: 0.5}
    report.fit = fit_inverse_sqrt(report.final_rmse)
    assert np.allclose(report.distance, [0.5, 1.0, 1.5, 2.0, 2.5])
    assert report.correlation is not None and report.correlation.shape == (5, 3)

    schemas = report.write(tmp_path)
    assert schemas == {
        "rmse.csv": ["distance", "abs_rmse", "rel_rmse"],
        "agent_rmse.csv": ["distance", "rmse_a0", "rmse_a1"],
        "correlation.csv": ["distance", "rho_x", "rho_y", "rho_z"],
        "final_rmse.csv": ["agents", "final_rmse", "fit"],
    }
    lines = (tmp_path / "rmse.csv").read_text().splitlines()
    assert lines[0] == "distance,abs_rmse,rel_rmse"
    assert len(lines) == 6
    summary = json.loads((tmp_path / "metrics.json").read_text())
    assert summary["runs"] == 4
    assert summary["final_abs_rmse"] == pytest.approx(report.abs_rmse[-1])
    assert summary["fit"]["c"] == pytest.approx(report.fit.c)


def test_single_run_report() -> None:
    errors = np.ones((1, 2, 3, 3))
    errors[:, :, -1] = np.nan
    report = build_report(errors, ["a0", "a1"], step_length=1.0, runs=1)
    assert report.correlation is None
    assert report.final_abs_rmse == pytest.approx(math.sqrt(3.0))
    payload = report.to_dict()
    assert payload["final_rel_rmse"] is None
    assert payload["fit"] is None
