"""
Error statistics over Monte-Carlo runs.

Errors are arrays of shape (runs, agents, steps, 3): estimate minus truth of
each agent's feet midpoint after each step. Missing entries are NaN and are
left out of every statistic.

* absolute RMSE: root mean squared position error over runs and agents.
* relative RMSE: the same for the error of every agent-to-agent difference
  vector, averaged over the pairs.
* correlation: per axis, the correlation over runs of the errors of two agents.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from coopnav.validation import FloatArray, InvalidInputError

SCHEMA_VERSION = 1


def _nanmean(values: FloatArray, axis: Union[int, Tuple[int, ...]]) -> FloatArray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        return np.asarray(np.nanmean(values, axis=axis))


def rmse_curve(errors: FloatArray) -> FloatArray:
    """RMSE per step of (runs, agents, steps, 3) errors."""
    squared = np.sum(errors**2, axis=-1)
    return np.sqrt(_nanmean(squared, axis=(0, 1)))


def relative_rmse_curve(errors: FloatArray) -> FloatArray:
    agents = errors.shape[1]
    if agents < 2:
        return np.full(errors.shape[2], np.nan)
    curves = [
        rmse_curve((errors[:, i] - errors[:, j])[:, None])
        for i, j in itertools.combinations(range(agents), 2)
    ]
    return _nanmean(np.array(curves), axis=0)


def correlation_curve(errors_a: FloatArray, errors_b: FloatArray) -> FloatArray:
    """
    Per step and axis correlation over runs of two (runs, steps, 3) error
    arrays. NaN where either error has no spread.
    """
    a = errors_a - _nanmean(errors_a, axis=0)
    b = errors_b - _nanmean(errors_b, axis=0)
    cov = _nanmean(a * b, axis=0)
    var_a = _nanmean(a * a, axis=0)
    var_b = _nanmean(b * b, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = cov / np.sqrt(var_a * var_b)
    return np.clip(rho, -1.0, 1.0)


@dataclass(frozen=True)
class InverseSqrtFit:
    c: float
    max_rel_residual: float

    def predict(self, n: int) -> float:
        return self.c / math.sqrt(n)


def fit_inverse_sqrt(final_rmse: Mapping[int, float]) -> InverseSqrtFit:
    """
    Least-squares fit of RMSE(N) = c / sqrt(N).

    :raises InvalidInputError: With fewer than two distinct N.
    """
    points = sorted(final_rmse.items())
    if len(points) < 2:
        raise InvalidInputError(f"fitting needs at least 2 distinct N, got {len(points)}")
    n = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.any(n < 1) or not np.all(np.isfinite(y)):
        raise InvalidInputError("fit points need N >= 1 and finite RMSE values")
    basis = 1.0 / np.sqrt(n)
    c = float(basis @ y / (basis @ basis))
    fitted = c * basis
    with np.errstate(divide="ignore", invalid="ignore"):
        residual = np.abs(y - fitted) / np.abs(y)
    residual = np.where(y == 0, np.where(fitted == 0, 0.0, np.inf), residual)
    return InverseSqrtFit(c=c, max_rel_residual=float(residual.max()))


def trend_slope(values: FloatArray, x: Optional[FloatArray] = None) -> float:
    """Least-squares slope of ``values`` against ``x`` (default: the index)."""
    y = np.asarray(values, dtype=float)
    xs = np.arange(len(y), dtype=float) if x is None else np.asarray(x, dtype=float)
    keep = np.isfinite(y)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(xs[keep], y[keep], 1)[0])


@dataclass(frozen=True)
class FailedRun:
    index: int
    seed: int
    message: str


@dataclass
class MetricsReport:
    runs: int
    agents: Tuple[str, ...]
    distance: FloatArray
    abs_rmse: FloatArray
    rel_rmse: FloatArray
    per_agent_rmse: Dict[str, FloatArray]
    correlation: Optional[FloatArray] = None
    final_rmse: Dict[int, float] = field(default_factory=dict)
    fit: Optional[InverseSqrtFit] = None
    failed: List[FailedRun] = field(default_factory=list)
    audit_ratio: float = float("nan")

    @property
    def final_abs_rmse(self) -> float:
        finite = self.abs_rmse[np.isfinite(self.abs_rmse)]
        return float(finite[-1]) if finite.size else float("nan")

    def to_dict(self) -> Dict[str, object]:
        def number(x: float) -> object:
            return x if math.isfinite(x) else None

        return {
            "schema_version": SCHEMA_VERSION,
            "runs": self.runs,
            "agents": list(self.agents),
            "final_abs_rmse": number(self.final_abs_rmse),
            "final_rel_rmse": number(float(self.rel_rmse[-1])) if len(self.rel_rmse) else None,
            "final_rmse": {str(k): number(v) for k, v in sorted(self.final_rmse.items())},
            "fit": None
            if self.fit is None
            else {"c": self.fit.c, "max_rel_residual": number(self.fit.max_rel_residual)},
            "failed": [
                {"index": f.index, "seed": f.seed, "message": f.message} for f in self.failed
            ],
            "audit_ratio": number(self.audit_ratio),
        }

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def write(self, directory: Union[str, Path]) -> Dict[str, List[str]]:
        """
        Write the summary JSON and one CSV per curve.

        :returns: Column schema of every CSV written, keyed by file name.
        """
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.json").write_text(self.serialize() + "\n")
        schemas: Dict[str, List[str]] = {}

        columns = ["distance", "abs_rmse", "rel_rmse"]
        rows = zip(self.distance, self.abs_rmse, self.rel_rmse)
        schemas["rmse.csv"] = _write_csv(out / "rmse.csv", columns, rows)

        agent_columns = ["distance"] + [f"rmse_{a}" for a in self.agents]
        agent_rows = zip(self.distance, *(self.per_agent_rmse[a] for a in self.agents))
        schemas["agent_rmse.csv"] = _write_csv(out / "agent_rmse.csv", agent_columns, agent_rows)

        if self.correlation is not None:
            corr_columns = ["distance", "rho_x", "rho_y", "rho_z"]
            corr_rows = ((d, *rho) for d, rho in zip(self.distance, self.correlation))
            schemas["correlation.csv"] = _write_csv(
                out / "correlation.csv", corr_columns, corr_rows
            )
        if self.final_rmse:
            final_columns = ["agents", "final_rmse", "fit"]
            final_rows = (
                (n, v, self.fit.predict(n) if self.fit else float("nan"))
                for n, v in sorted(self.final_rmse.items())
            )
            schemas["final_rmse.csv"] = _write_csv(
                out / "final_rmse.csv", final_columns, final_rows
            )
        return schemas


def _format(value: object) -> str:
    if isinstance(value, (float, np.floating)):
        return "nan" if not math.isfinite(value) else repr(float(value))
    return str(value)


def _write_csv(
    path: Path, columns: Sequence[str], rows: Iterable[Iterable[object]]
) -> List[str]:
    with open(path, "w", newline="") as out_file:
        writer = csv.writer(out_file)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(v) for v in row])
    return list(columns)


def build_report(
    errors: FloatArray,
    agents: Sequence[str],
    step_length: float,
    runs: int,
    correlated: Optional[Tuple[int, int]] = (0, 1),
) -> MetricsReport:
    """
    :param errors: (runs, agents, steps, 3) errors of the successful runs.
    :param correlated: Indices of the agent pair whose error correlation is
        reported; skipped with a single agent or a single run.
    """
    steps = errors.shape[2]
    correlation = None
    if correlated is not None and errors.shape[1] > max(correlated) and errors.shape[0] > 1:
        i, j = correlated
        correlation = correlation_curve(errors[:, i], errors[:, j])
    return MetricsReport(
        runs=runs,
        agents=tuple(agents),
        distance=step_length * np.arange(1, steps + 1),
        abs_rmse=rmse_curve(errors),
        rel_rmse=relative_rmse_curve(errors),
        per_agent_rmse={a: rmse_curve(errors[:, [k]]) for k, a in enumerate(agents)},
        correlation=correlation,
    )
