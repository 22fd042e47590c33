import math
import re

import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from coopnav.fusion.estimate import GlobalEstimate, RangeMeasurement, RangeParams, build_lattice
from coopnav.fusion.ranging import (
    FIXED_POINT_ID,
    aux_update,
    cauchy_uniform_likelihood,
    influence_curve,
    range_update,
)
from coopnav.selfcheck import check_range
from coopnav.validation import InvalidInputError
from tests import assert_covariance, make_estimate, random_estimate

TWO_FEET = {"a": (0.0, 0.0, 0.0), "b": (10.0, 0.0, 0.0)}


def separation_variance(g: GlobalEstimate, axis: int) -> float:
    ia, ib = g.position_indices("a")[axis], g.position_indices("b")[axis]
    return float(g.P[ia, ia] + g.P[ib, ib] - 2 * g.P[ia, ib])


def test_likelihood_matches_the_direct_form() -> None:
    e = np.linspace(-5.0, 5.0, 41)
    direct = np.arctan((e + 2.0) / 0.5) - np.arctan((e - 2.0) / 0.5)
    assert np.allclose(cauchy_uniform_likelihood(e, 2.0, 0.5), direct)


def test_likelihood_tail_has_no_cancellation() -> None:
    value = float(cauchy_uniform_likelihood(1e4, 2.0, 0.5))
    assert value == pytest.approx(2 * 2.0 * 0.5 / 1e8, rel=1e-6)


def test_likelihood_is_symmetric_and_flat_topped() -> None:
    e = np.array([-1.0, -0.1, 0.0, 0.1, 1.0])
    values = cauchy_uniform_likelihood(e, 2.0, 0.1)
    assert np.allclose(values, values[::-1])
    assert values[2] == pytest.approx(values[1], rel=1e-3)


@pytest.mark.parametrize("dim", [1, 3])
def test_lattice_moments(dim: int) -> None:
    lattice = build_lattice(dim, 9, 3.0)
    assert lattice.points.shape == (9**dim, dim)
    assert lattice.weights.sum() == pytest.approx(1.0)
    assert np.allclose(lattice.weights @ lattice.points, 0.0, atol=1e-12)
    d = lattice.points
    assert np.allclose((d * lattice.weights[:, None]).T @ d, np.eye(dim))


def test_lattice_points_must_be_odd() -> None:
    with pytest.raises(InvalidInputError, match="lattice_points '8' must be odd"):
        RangeParams(lattice_points=8)


def test_consistent_range_tightens_the_line_of_sight() -> None:
    g = make_estimate(TWO_FEET)
    posterior = range_update(g, RangeMeasurement("a", "b", 10.0), RangeParams(gamma_r=0.1))
    assert abs(np.linalg.norm(posterior.position("b") - posterior.position("a")) - 10.0) < 0.5
    assert separation_variance(posterior, 0) < 0.5 * separation_variance(g, 0)
    # the range says little about the perpendicular directions
    assert separation_variance(posterior, 1) > 0.7 * separation_variance(g, 1)


def test_longer_range_pushes_feet_apart() -> None:
    g = make_estimate(TWO_FEET)
    posterior = range_update(g, RangeMeasurement("a", "b", 12.0), RangeParams(gamma_r=0.1))
    d = np.linalg.norm(posterior.position("b") - posterior.position("a"))
    assert 10.0 < d < 12.0
    # equal independent priors share the correction
    assert np.allclose(
        posterior.position("a") + posterior.position("b"), g.position("a") + g.position("b")
    )


def test_outlier_moves_the_estimate_a_bounded_amount() -> None:
    g = make_estimate(TWO_FEET)
    posterior = range_update(g, RangeMeasurement("a", "b", 1000.0), RangeParams())
    assert np.linalg.norm(posterior.position("a") - g.position("a")) < 0.5


def test_irreconcilable_range_is_rejected() -> None:
    g = make_estimate(TWO_FEET)
    assert range_update(g, RangeMeasurement("a", "b", 1e155), RangeParams()) is g


def test_range_to_a_fixed_point() -> None:
    g = make_estimate({"a": (0.0, 0.0, 0.0)})
    m = RangeMeasurement("a", np.array([5.0, 0.0, 0.0]), 4.0)
    posterior = range_update(g, m, RangeParams(gamma_r=0.1))
    assert posterior.ids == ("a",)
    assert FIXED_POINT_ID not in posterior.ids
    assert 0.3 < posterior.position("a")[0] < 1.6


def test_position_fix() -> None:
    g = make_estimate({"a": (0.0, 0.0, 0.0), "b": (1.0, 0.0, 0.0)})
    posterior = aux_update(g, "position-fix", "a", [3.0, 0.0, 0.0], RangeParams(gamma_r=0.1))
    assert posterior.position("a")[0] > 0.3
    assert np.allclose(posterior.position("b"), g.position("b"))


def test_pressure_against_a_reference_height() -> None:
    g = make_estimate({"a": (0.0, 0.0, 0.0)})
    rp = RangeParams(gamma_r=0.1, sigma_r=0.1)
    posterior = aux_update(g, "pressure", "a", 0.0, rp, r_tilde=1.0)
    assert posterior.position("a")[2] == pytest.approx(1.0, abs=0.25)
    assert np.allclose(posterior.position("a")[:2], 0.0)


def test_pressure_matches_quadrature() -> None:
    g = make_estimate({"a": (0.0, 0.0, 0.0)})
    rp = RangeParams(gamma_r=0.1, sigma_r=0.1)
    posterior = aux_update(g, "pressure", "a", 0.0, rp, r_tilde=1.0)

    def moment(power: int) -> float:
        return scipy.integrate.quad(
            lambda z: z**power
            * scipy.stats.norm.pdf(z)
            * float(cauchy_uniform_likelihood(1.0 - z, 0.1, 0.1)),
            -8.0,
            8.0,
            points=[0.9, 1.0, 1.1],
            limit=200,
        )[0]

    mass = moment(0)
    mean = moment(1) / mass
    var = moment(2) / mass - mean**2
    ia = g.position_indices("a")[2]
    assert posterior.position("a")[2] == pytest.approx(mean, abs=0.01)
    assert posterior.P[ia, ia] == pytest.approx(var, rel=0.05)


@pytest.mark.parametrize(
    "dim, per_axis",
    [
        pytest.param(1, 729, id="1d"),
        pytest.param(2, 27, id="2d"),
        pytest.param(3, 9, id="3d"),
    ],
)
def test_lattice_keeps_its_size_in_fewer_dimensions(dim: int, per_axis: int) -> None:
    lattice = RangeParams().lattice_for(dim)
    assert lattice.points.shape == (per_axis**dim, dim)


def test_pressure_between_feet() -> None:
    g = make_estimate({"a": (0.0, 0.0, 0.0), "b": (0.5, 0.0, 0.0)})
    rp = RangeParams(gamma_r=0.1, sigma_r=0.1)
    posterior = aux_update(g, "pressure", "a", "b", rp, r_tilde=1.0)
    dz = posterior.position("a")[2] - posterior.position("b")[2]
    assert dz == pytest.approx(1.0, abs=0.25)


def test_pressure_reference_must_be_a_height_or_a_foot() -> None:
    g = make_estimate({"a": (0.0, 0.0, 0.0)})
    with pytest.raises(
        InvalidInputError, match=re.escape("pressure reference '[1, 2, 3]' must be a height or a foot")
    ):
        aux_update(g, "pressure", "a", [1, 2, 3], RangeParams())


def test_anchor_needs_a_point() -> None:
    g = make_estimate({"a": (0.0, 0.0, 0.0), "b": (1.0, 0.0, 0.0)})
    with pytest.raises(InvalidInputError, match="anchor datum must be a point"):
        aux_update(g, "anchor", "a", "b", RangeParams(), r_tilde=1.0)


def test_influence_curve_redescends() -> None:
    residuals = [-10.0, -3.0, 0.0, 3.0, 10.0]
    curve = {p.residual: p for p in influence_curve(residuals, np.eye(3), RangeParams())}
    assert abs(curve[0.0].correction) < 0.2
    assert curve[3.0].correction > curve[0.0].correction > curve[-3.0].correction
    assert curve[3.0].correction > 0 > curve[-3.0].correction
    assert abs(curve[10.0].correction) < abs(curve[3.0].correction)
    # the linearized update keeps growing with the residual
    assert curve[10.0].kalman_correction == pytest.approx(5.0)
    assert math.copysign(1.0, curve[-10.0].kalman_correction) == -1.0


def test_agrees_with_grid_quadrature() -> None:
    results = check_range(cases=2, grid=41, seed=5)
    for result in results:
        assert result.passed, result.describe()


def test_random_range_updates_keep_a_valid_covariance() -> None:
    rng = np.random.default_rng(31)
    for _ in range(1000):
        g = random_estimate(rng, ["a", "b"], position_sd=float(rng.uniform(0.05, 2.0)))
        r = np.linalg.norm(g.position("a") - g.position("b"))
        m = RangeMeasurement("a", "b", abs(r + float(rng.normal(0.0, 0.5))))
        rp = RangeParams(gamma_r=float(rng.uniform(0.05, 2.0)), sigma_r=float(rng.uniform(0.05, 1.0)))
        posterior = range_update(g, m, rp)
        assert_covariance(posterior.P)
        assert np.all(np.isfinite(posterior.mean))


def test_flat_likelihood_leaves_random_estimates_unchanged() -> None:
    rng = np.random.default_rng(32)
    for _ in range(1000):
        g = random_estimate(rng, ["a", "b", "c"], position_sd=float(rng.uniform(0.05, 2.0)))
        m = RangeMeasurement("a", "b", float(rng.uniform(0.0, 50.0)))
        posterior = range_update(g, m, RangeParams(gamma_r=1e6))
        assert np.allclose(posterior.mean, g.mean, rtol=0.0, atol=1e-8)
        # the decomposition jitter of 1e-10 is the only change
        assert np.allclose(posterior.P, g.P, rtol=0.0, atol=1e-9 + 1e-8 * np.abs(g.P).max())
