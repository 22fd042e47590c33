from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from coopnav.scenarios.engine import run_scenario
from coopnav.scenarios.metrics import (
    FailedRun,
    MetricsReport,
    build_report,
    fit_inverse_sqrt,
)

if TYPE_CHECKING:
    from coopnav.config.run_config import RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplicaOutcome:
    index: int
    seed: int
    errors: Optional[np.ndarray]
    audit_ratio: float = float("nan")
    message: str = ""


def replica_seeds(base_seed: int, runs: int) -> List[int]:
    """Independent per-run seeds derived from one base seed."""
    return [
        int(s.generate_state(1)[0]) for s in np.random.SeedSequence(base_seed).spawn(runs)
    ]


def _run_replica(job: Tuple[RunConfig, int, int]) -> ReplicaOutcome:
    cfg, index, seed = job
    try:
        result = run_scenario(cfg, seed)
    except Exception as e:  # noqa: B902
        # recorded as a failed run and reported; never dropped silently
        return ReplicaOutcome(index=index, seed=seed, errors=None, message=f"{type(e).__name__}: {e}")
    agents = list(result.errors)
    errors = np.stack([result.errors[a] for a in agents])
    ratio = result.audit.ratio
    return ReplicaOutcome(index=index, seed=seed, errors=errors, audit_ratio=ratio)


def _map(jobs: Sequence[Tuple[RunConfig, int, int]], workers: int) -> Iterator[ReplicaOutcome]:
    if workers <= 1 or len(jobs) <= 1:
        return map(_run_replica, jobs)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # list() so the pool is drained before it shuts down
        return iter(list(pool.map(_run_replica, jobs)))


def run_monte_carlo(
    cfg: RunConfig, runs: Optional[int] = None, workers: Optional[int] = None
) -> MetricsReport:
    """
    Run independent replicas of the configured scenario and aggregate them.
    Replicas that raise are reported in ``failed`` and left out of the curves.

    :param runs: Defaults to ``cfg.montecarlo.runs``.
    :param workers: Worker processes; defaults to ``cfg.montecarlo.workers``.
    """
    runs = cfg.montecarlo.runs if runs is None else runs
    workers = cfg.montecarlo.workers if workers is None else workers
    if runs < 1:
        raise ValueError(f"runs '{runs}' must be at least 1")
    seeds = replica_seeds(cfg.montecarlo.seed, runs)
    jobs = [(cfg, i, seed) for i, seed in enumerate(seeds)]

    collected: List[np.ndarray] = []
    failed: List[FailedRun] = []
    ratios: List[float] = []
    for outcome in _map(jobs, workers):
        if outcome.errors is None:
            logger.warning("run %d (seed %d) failed: %s", outcome.index, outcome.seed, outcome.message)
            failed.append(FailedRun(outcome.index, outcome.seed, outcome.message))
            continue
        logger.info("run %d/%d done", outcome.index + 1, runs)
        collected.append(outcome.errors)
        ratios.append(outcome.audit_ratio)

    scenario = cfg.scenario
    agents = scenario.agent_ids()
    if collected:
        errors = np.stack(collected)
    else:
        errors = np.full((0, len(agents), scenario.steps, 3), np.nan)
    report = build_report(errors, agents, scenario.step_length, runs=len(collected))
    report.failed = failed
    if ratios:
        report.audit_ratio = float(np.mean(ratios))
    return report


def run_agents_sweep(
    cfg: RunConfig,
    agents: Iterable[int],
    runs: Optional[int] = None,
    workers: Optional[int] = None,
) -> MetricsReport:
    """
    Monte-Carlo runs for every agent count; the final absolute RMSE per count
    is fitted to c / sqrt(N). The curves of the report are those of the
    largest count.
    """
    counts = sorted(set(agents))
    report: Optional[MetricsReport] = None
    final = {}
    failed: List[FailedRun] = []
    for n in counts:
        swept = replace(cfg, scenario=replace(cfg.scenario, agents=n))
        report = run_monte_carlo(swept, runs, workers)
        final[n] = report.final_abs_rmse
        failed.extend(report.failed)
        logger.info("agents=%d final rmse %.3f", n, final[n])
    if report is None:
        raise ValueError("the agent sweep is empty")
    report.final_rmse = final
    report.failed = failed
    if len(final) >= 2:
        report.fit = fit_inverse_sqrt(final)
    return report
