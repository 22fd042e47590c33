"""
Oracle suites run by ``coopnav selfcheck``.

Every check compares a production code path with an independent computation
of the same quantity and reports the largest observed deviation next to the
tolerance:

* marginalization: joint Kalman conditioning of random Gaussians.
* constraint: rejection sampling of the joint prior against the separation
  ball.
* range: dense-grid quadrature of the posterior of the range vector.
* consistency: step-wise navigation plus dead reckoning against the
  never-reset filter on a synthetic gait.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from coopnav.fusion.constraint import constraint_update
from coopnav.fusion.estimate import (
    ConstraintParams,
    GlobalEstimate,
    RangeMeasurement,
    RangeParams,
)
from coopnav.fusion.marginalization import marginal_condition
from coopnav.fusion.ranging import cauchy_uniform_likelihood, range_update
from coopnav.fusion.transforms import PairTransform
from coopnav.scenarios.consistency import consistency_check
from coopnav.scenarios.gait import GaitParams
from coopnav.validation import FloatArray

logger = logging.getLogger(__name__)

Condition = Callable[
    [FloatArray, FloatArray, int, FloatArray, FloatArray], Tuple[FloatArray, FloatArray]
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    observed: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.observed) and self.observed <= self.tolerance)

    def describe(self) -> str:
        status = "ok" if self.passed else "FAILED"
        line = f"{self.name}: {status} (observed {self.observed:.3g}, tolerated {self.tolerance:.3g})"
        return f"{line} {self.detail}" if self.detail else line


class SelfCheckFailure(Exception):
    def __init__(self, failed: Sequence[CheckResult]) -> None:
        self.failed = list(failed)
        names = ", ".join(r.name for r in self.failed)
        super().__init__(f"self-check failed: {names}")


@dataclass
class SelfCheckReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def failed(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failed

    def raise_for_failures(self) -> None:
        if self.failed:
            raise SelfCheckFailure(self.failed)

    def lines(self) -> List[str]:
        return [r.describe() for r in self.results]

    def to_dict(self) -> Dict[str, object]:
        return {
            "schema_version": 1,
            "passed": self.passed,
            "checks": [
                {
                    "name": r.name,
                    "passed": r.passed,
                    "observed": r.observed if np.isfinite(r.observed) else None,
                    "tolerance": r.tolerance,
                }
                for r in self.results
            ],
        }


def _random_spd(rng: np.random.Generator, n: int, floor: float = 0.1) -> FloatArray:
    A = rng.normal(size=(n, n))
    return A @ A.T / n + floor * np.eye(n)


def check_marginalization(
    cases: int = 1000,
    max_dim: int = 32,
    seed: int = 0,
    condition: Condition = marginal_condition,
    tolerance: float = 1e-9,
) -> List[CheckResult]:
    """
    Condition random joint Gaussians on a linear-Gaussian measurement of their
    leading block, once with a joint Kalman update and once by handing the
    posterior moments of that block to ``condition``.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, max_dim + 1))
        k = int(rng.integers(1, n))
        mean = rng.normal(size=n)
        P = _random_spd(rng, n)
        R = _random_spd(rng, k)
        y = rng.normal(size=k)

        S = P[:k, :k] + R
        K = np.linalg.solve(S, P[:k, :]).T
        kf_mean = mean + K @ (y - mean[:k])
        kf_P = P - K @ P[:k, :]
        m = kf_mean[:k]
        C = kf_P[:k, :k] + np.outer(m, m)

        out_mean, out_P = condition(mean, P, k, m, C)
        deviation = max(
            float(np.abs(out_mean - kf_mean).max()),
            float(np.abs(out_P - kf_P).max()),
        )
        worst = max(worst, deviation)
    return [
        CheckResult(
            "marginalization",
            worst,
            tolerance,
            f"max-abs deviation from the joint Kalman update over {cases} cases",
        )
    ]


def _two_feet(
    rng: np.random.Generator, separation: FloatArray, position_std: float
) -> GlobalEstimate:
    x_a = rng.normal(scale=5.0, size=3)
    mean = np.concatenate([x_a, [0.1], x_a + separation, [-0.1]])
    P = np.zeros((8, 8))
    for blk in (slice(0, 3), slice(4, 7)):
        P[blk, blk] = position_std**2 * _random_spd(rng, 3, floor=0.5) / 1.5
    P[3, 3] = P[7, 7] = 1e-4
    return GlobalEstimate(ids=("a", "b"), mean=mean, P=P)


def _random_direction(rng: np.random.Generator) -> FloatArray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def rejection_sampling(
    g: GlobalEstimate,
    cp: ConstraintParams,
    draws: int,
    rng: np.random.Generator,
) -> Tuple[FloatArray, FloatArray, int]:
    """
    Moments of the joint prior samples whose scaled foot separation lies in
    the ball, and the number of samples kept.
    """
    tr = PairTransform.between(g.ids, "a", "b", cp.scaling)
    z, Pz = tr.forward(g.mean, g.P)
    samples = rng.multivariate_normal(z, Pz, size=draws, method="cholesky")
    kept = samples[np.linalg.norm(samples[:, :3], axis=1) <= cp.radius()]
    if len(kept) < 2:
        return np.full(g.dim, np.nan), np.full((g.dim, g.dim), np.nan), len(kept)
    mean, cov = tr.inverse(kept.mean(axis=0), np.cov(kept, rowvar=False))
    return mean, cov, len(kept)


def check_constraint(
    cases: int = 20,
    draws: int = 200_000,
    seed: int = 1,
    mean_tolerance: float = 0.05,
    cov_tolerance: float = 0.1,
    cp: Optional[ConstraintParams] = None,
) -> List[CheckResult]:
    """
    Posterior means are compared in units of the prior standard deviation,
    covariance diagonals relative to the prior variances.
    """
    rng = np.random.default_rng(seed)
    cp = cp or ConstraintParams()
    worst_mean = 0.0
    worst_cov = 0.0
    fewest = draws
    for _ in range(cases):
        separation = _random_direction(rng) * rng.uniform(0.5, 2.0) * cp.gamma_xy
        g = _two_feet(rng, separation, rng.uniform(0.2, 1.0))
        posterior = constraint_update(g, "a", "b", cp)
        oracle_mean, oracle_P, kept = rejection_sampling(g, cp, draws, rng)
        fewest = min(fewest, kept)
        prior_var = np.diag(g.P)
        worst_mean = max(
            worst_mean, float(np.max(np.abs(posterior.mean - oracle_mean) / np.sqrt(prior_var)))
        )
        worst_cov = max(
            worst_cov, float(np.max(np.abs(np.diag(posterior.P) - np.diag(oracle_P)) / prior_var))
        )
    detail = f"against rejection sampling, at least {fewest} draws kept"
    return [
        CheckResult(
            "constraint.mean", worst_mean, mean_tolerance, f"in prior standard deviations {detail}"
        ),
        CheckResult(
            "constraint.covariance", worst_cov, cov_tolerance, f"relative to prior variances {detail}"
        ),
    ]


def quadrature_posterior(
    z1: FloatArray, P1: FloatArray, r_tilde: float, rp: RangeParams, grid: int
) -> Tuple[FloatArray, FloatArray]:
    """Posterior mean and covariance of the range vector on a dense grid over +-5 sigma."""
    lam, Q = np.linalg.eigh(P1)
    axis = np.linspace(-5.0, 5.0, grid)
    u = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    offsets = (u * np.sqrt(lam)) @ Q.T
    s = z1 + offsets
    w = np.exp(-0.5 * np.sum(u * u, axis=1)) * cauchy_uniform_likelihood(
        r_tilde - np.linalg.norm(s, axis=1), rp.gamma_r, rp.sigma_r
    )
    w /= w.sum()
    m = w @ s
    d = s - m
    return m, (d * w[:, None]).T @ d


def check_range(
    cases: int = 20,
    grid: int = 61,
    seed: int = 2,
    mean_tolerance: float = 0.02,
    cov_tolerance: float = 0.1,
) -> List[CheckResult]:
    """
    The mean is compared relative to its norm, the covariance by the relative
    Frobenius norm of the difference.
    """
    rng = np.random.default_rng(seed)
    rp = RangeParams()
    worst_mean = 0.0
    worst_cov = 0.0
    for _ in range(cases):
        separation = _random_direction(rng) * rng.uniform(5.0, 15.0)
        g = _two_feet(rng, separation, rng.uniform(0.5, 1.0))
        z1 = g.position("a") - g.position("b")
        ia, ib = g.position_indices("a"), g.position_indices("b")
        P1 = (
            g.P[np.ix_(ia, ia)]
            + g.P[np.ix_(ib, ib)]
            - g.P[np.ix_(ia, ib)]
            - g.P[np.ix_(ib, ia)]
        )
        r_tilde = float(np.linalg.norm(z1) + rng.uniform(-1.0, 1.0))
        posterior = range_update(g, RangeMeasurement("a", "b", r_tilde), rp)
        m = posterior.position("a") - posterior.position("b")
        C = (
            posterior.P[np.ix_(ia, ia)]
            + posterior.P[np.ix_(ib, ib)]
            - posterior.P[np.ix_(ia, ib)]
            - posterior.P[np.ix_(ib, ia)]
        )
        oracle_m, oracle_C = quadrature_posterior(z1, P1, r_tilde, rp, grid)
        worst_mean = max(worst_mean, float(np.linalg.norm(m - oracle_m) / np.linalg.norm(oracle_m)))
        worst_cov = max(
            worst_cov, float(np.linalg.norm(C - oracle_C) / np.linalg.norm(oracle_C))
        )
    return [
        CheckResult("range.mean", worst_mean, mean_tolerance, "relative to the posterior mean"),
        CheckResult("range.covariance", worst_cov, cov_tolerance, "relative Frobenius norm"),
    ]


def check_consistency(
    params: Optional[GaitParams] = None,
    mean_tolerance: float = 0.05,
    cov_tolerance: float = 0.1,
) -> List[CheckResult]:
    report = consistency_check(params)
    return [
        CheckResult(
            "consistency.mean",
            report.max_mean_ratio,
            mean_tolerance,
            f"over {report.steps} steps, in filter standard deviations",
        ),
        CheckResult("consistency.covariance", report.max_cov_ratio, cov_tolerance),
    ]


CHECKS: Mapping[str, Callable[..., List[CheckResult]]] = {
    "marginalization": check_marginalization,
    "constraint": check_constraint,
    "range": check_range,
    "consistency": check_consistency,
}


def run_selfcheck(
    names: Optional[Sequence[str]] = None,
    condition: Condition = marginal_condition,
) -> SelfCheckReport:
    """
    :param names: Checks to run; all of them by default.
    :param condition: The conditioning under test in the marginalization check.
    """
    selected = list(CHECKS) if names is None else list(names)
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {sorted(CHECKS)}")
    report = SelfCheckReport()
    for name in selected:
        if name == "marginalization":
            results = check_marginalization(condition=condition)
        else:
            results = CHECKS[name]()
        for result in results:
            logger.info(result.describe())
        report.results.extend(results)
    return report
