"""
Command-line front end.

    coopnav run --config march.conf --out out/
    coopnav montecarlo --config march.conf --runs 100
    coopnav selfcheck
    coopnav influence --out out/
    coopnav audit --config march.conf

Exit codes: 0 success, 1 runtime failure, 2 configuration error, 3 self-check
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from coopnav.config import InvalidConfigError, RunConfig, load_run_config
from coopnav.fusion.estimate import RangeParams
from coopnav.fusion.ranging import influence_curve
from coopnav.scenarios.engine import RunResult, run_scenario
from coopnav.scenarios.metrics import MetricsReport, build_report
from coopnav.scenarios.montecarlo import replica_seeds, run_agents_sweep, run_monte_carlo
from coopnav.selfcheck import CHECKS, SelfCheckFailure, run_selfcheck
from coopnav.validation import InvalidInputError

logger = logging.getLogger("coopnav")

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_SELFCHECK = 3

TRAJECTORY_COLUMNS = ["agent", "seq", "t", "est_x", "est_y", "est_z", "true_x", "true_y", "true_z"]
INFLUENCE_COLUMNS = ["residual", "correction", "kalman_correction"]


class Outputs:
    """Writes files into one directory and keeps the manifest of what was written."""

    def __init__(self, directory: Path, command: str) -> None:
        self.directory = directory
        self.directory.mkdir(parents=True, exist_ok=True)
        self.manifest: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "files": {},
        }

    def add(self, name: str, columns: Optional[Sequence[str]] = None) -> None:
        self.manifest["files"][name] = {"columns": list(columns)} if columns else {}

    def write_json(self, name: str, payload: Dict[str, Any]) -> None:
        text = json.dumps(payload, sort_keys=True, indent=2)
        (self.directory / name).write_text(text + "\n")
        self.add(name)

    def write_csv(self, name: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        with open(self.directory / name, "w", newline="") as out_file:
            writer = csv.writer(out_file)
            writer.writerow(columns)
            writer.writerows(rows)
        self.add(name, columns)

    def add_metrics(self, report: MetricsReport) -> None:
        for name, columns in report.write(self.directory).items():
            self.add(name, columns)
        self.add("metrics.json")

    def close(self) -> None:
        self.write_json("manifest.json", self.manifest)


def _load(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(args.config)
    try:
        if getattr(args, "runs", None) is not None:
            cfg = cfg.set_runs(args.runs)
        if getattr(args, "seed", None) is not None:
            cfg = cfg.set_seed(args.seed)
    except InvalidInputError as e:
        raise InvalidConfigError(f"[command line] {e}") from e
    if getattr(args, "out", None) is not None:
        cfg = cfg.set_output_directory(args.out)
    return cfg


def _first_seed(cfg: RunConfig) -> int:
    # the seed of replica 0, so a single run matches a one-run Monte-Carlo
    return replica_seeds(cfg.montecarlo.seed, 1)[0]


def _trajectory_rows(result: RunResult) -> List[List[Any]]:
    return [
        [row.agent, row.seq, repr(row.t), *(repr(v) for v in row.estimate), *(repr(v) for v in row.truth)]
        for row in result.trajectory
    ]


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    result = run_scenario(cfg, _first_seed(cfg))
    out = Outputs(Path(cfg.output_directory), "run")
    out.write_csv("trajectory.csv", TRAJECTORY_COLUMNS, _trajectory_rows(result))
    agents = list(result.errors)
    errors = np.stack([result.errors[a] for a in agents])[None]
    report = build_report(errors, agents, cfg.scenario.step_length, runs=1)
    report.audit_ratio = result.audit.ratio
    out.add_metrics(report)
    out.write_json("audit.json", result.audit.to_dict())
    (out.directory / "trace.jsonl").write_text("".join(line + "\n" for line in result.trace))
    out.add("trace.jsonl")
    out.write_json("config.json", cfg.to_dict())
    out.close()
    print(f"final rmse {report.final_abs_rmse:.3f} m, audit ratio {result.audit.ratio:.1f}")
    return EXIT_OK


def cmd_montecarlo(args: argparse.Namespace) -> int:
    cfg = _load(args)
    workers = args.workers
    if cfg.montecarlo.agents_sweep:
        report = run_agents_sweep(cfg, cfg.montecarlo.agents_sweep, workers=workers)
    else:
        report = run_monte_carlo(cfg, workers=workers)
    out = Outputs(Path(cfg.output_directory), "montecarlo")
    out.add_metrics(report)
    out.write_json("config.json", cfg.to_dict())
    out.close()
    print(f"{report.runs} runs, final rmse {report.final_abs_rmse:.3f} m")
    if report.fit is not None:
        print(f"fit c/sqrt(N): c = {report.fit.c:.3f}, max residual {report.fit.max_rel_residual:.1%}")
    if report.failed:
        print(f"{len(report.failed)} runs failed", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_selfcheck(args: argparse.Namespace) -> int:
    report = run_selfcheck(args.checks)
    for line in report.lines():
        print(line)
    if args.out is not None:
        out = Outputs(Path(args.out), "selfcheck")
        out.write_json("selfcheck.json", report.to_dict())
        out.close()
    report.raise_for_failures()
    return EXIT_OK


def cmd_influence(args: argparse.Namespace) -> int:
    rp = load_run_config(args.config).ranging if args.config else RangeParams()
    residuals = np.round(np.arange(-args.span, args.span + 1e-9, args.resolution), 9)
    curve = influence_curve(
        residuals,
        args.variance * np.eye(3),
        rp,
        distance=args.distance,
        kalman_sigma=args.kalman_sigma,
    )
    out = Outputs(Path(args.out), "influence")
    out.write_csv(
        "influence.csv",
        INFLUENCE_COLUMNS,
        [[repr(p.residual), repr(p.correction), repr(p.kalman_correction)] for p in curve],
    )
    out.close()
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    cfg = _load(args)
    result = run_scenario(cfg, _first_seed(cfg))
    out = Outputs(Path(cfg.output_directory), "audit")
    out.write_json("audit.json", result.audit.to_dict())
    out.close()
    print(result.audit.serialize())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopnav",
        description="Cooperative localization of foot-mounted inertial navigation systems.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debugging"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def scenario_command(name: str, help: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help)
        sub.add_argument("--config", required=True, help="run configuration file")
        sub.add_argument("--seed", type=int, help="override montecarlo.seed")
        sub.add_argument("--out", help="override output.directory")
        return sub

    run = scenario_command("run", "run one scenario end to end")
    run.set_defaults(handler=cmd_run)

    montecarlo = scenario_command("montecarlo", "run Monte-Carlo replicas of a scenario")
    montecarlo.add_argument("--runs", type=int, help="override montecarlo.runs")
    montecarlo.add_argument("--workers", type=int, help="override montecarlo.workers")
    montecarlo.set_defaults(handler=cmd_montecarlo)

    selfcheck = commands.add_parser("selfcheck", help="run the oracle checks")
    selfcheck.add_argument("--checks", nargs="+", choices=sorted(CHECKS), help="subset of checks")
    selfcheck.add_argument("--out", help="also write selfcheck.json here")
    selfcheck.set_defaults(handler=cmd_selfcheck)

    influence = commands.add_parser("influence", help="write the influence curve of the range update")
    influence.add_argument("--config", help="take the ranging parameters from this file")
    influence.add_argument("--out", default="out", help="output directory")
    influence.add_argument("--variance", type=float, default=1.0, help="prior variance per axis")
    influence.add_argument("--distance", type=float, default=10.0, help="prior range in meters")
    influence.add_argument("--span", type=float, default=10.0, help="largest residual in meters")
    influence.add_argument("--resolution", type=float, default=0.1, help="residual spacing")
    influence.add_argument(
        "--kalman-sigma", type=float, default=1.0, help="sigma of the comparison Kalman update"
    )
    influence.set_defaults(handler=cmd_influence)

    audit = scenario_command("audit", "report the communication audit of one run")
    audit.set_defaults(handler=cmd_audit)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return int(args.handler(args))
    except InvalidConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SelfCheckFailure as e:
        for result in e.failed:
            print(f"failed: {result.describe()}", file=sys.stderr)
        return EXIT_SELFCHECK
    except Exception as e:  # noqa: B902
        logger.debug("command failed", exc_info=True)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
