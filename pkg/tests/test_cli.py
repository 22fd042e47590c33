import csv
import json
from pathlib import Path

import pytest

from coopnav import cli
from coopnav.scenarios import montecarlo
from coopnav.selfcheck import SelfCheckReport, CheckResult
from tests import MARCH_CONFIG


@pytest.fixture
def march(tmp_path: Path) -> Path:
    path = tmp_path / "march.conf"
    path.write_text(MARCH_CONFIG)
    return path


def manifest(directory: Path) -> dict:
    return json.loads((directory / "manifest.json").read_text())


def test_run(march: Path, tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    out = tmp_path / "run"
    assert cli.main(["run", "--config", str(march), "--out", str(out)]) == cli.EXIT_OK
    assert "final rmse" in capsys.readouterr().out

    files = manifest(out)["files"]
    assert set(files) == {
        "trajectory.csv",
        "rmse.csv",
        "agent_rmse.csv",
        "metrics.json",
        "audit.json",
        "trace.jsonl",
        "config.json",
    }
    assert files["trajectory.csv"]["columns"] == cli.TRAJECTORY_COLUMNS
    assert manifest(out)["schema_version"] == cli.SCHEMA_VERSION

    with open(out / "trajectory.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2 * 20
    assert {r["agent"] for r in rows} == {"a0", "a1"}
    assert json.loads((out / "config.json").read_text())["scenario"]["steps"] == 20
    assert len((out / "trace.jsonl").read_text().splitlines()) == 160


def test_run_is_reproducible(march: Path, tmp_path: Path) -> None:
    for name in ("one", "two"):
        cli.main(["run", "--config", str(march), "--out", str(tmp_path / name)])
    first = (tmp_path / "one" / "trajectory.csv").read_text()
    assert first == (tmp_path / "two" / "trajectory.csv").read_text()
    cli.main(["run", "--config", str(march), "--seed", "8", "--out", str(tmp_path / "three")])
    assert first != (tmp_path / "three" / "trajectory.csv").read_text()


def test_montecarlo(march: Path, tmp_path: Path) -> None:
    out = tmp_path / "mc"
    code = cli.main(["montecarlo", "--config", str(march), "--runs", "3", "--workers", "1", "--out", str(out)])
    assert code == cli.EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["runs"] == 3
    assert metrics["failed"] == []
    assert "correlation.csv" in manifest(out)["files"]


def test_montecarlo_with_failures(
    march: Path, tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture
) -> None:
    def broken(cfg, seed):  # type: ignore
        raise FloatingPointError("diverged")

    monkeypatch.setattr(montecarlo, "run_scenario", broken)
    code = cli.main(["montecarlo", "--config", str(march), "--out", str(tmp_path / "mc")])
    assert code == cli.EXIT_RUNTIME
    assert "2 runs failed" in capsys.readouterr().err


def test_agents_sweep(tmp_path: Path) -> None:
    path = tmp_path / "sweep.conf"
    path.write_text(MARCH_CONFIG.replace("runs = 2", "runs = 2\nagents_sweep = 2, 3"))
    out = tmp_path / "sweep"
    assert cli.main(["montecarlo", "--config", str(path), "--out", str(out)]) == cli.EXIT_OK
    with open(out / "final_rmse.csv") as f:
        rows = list(csv.DictReader(f))
    assert [r["agents"] for r in rows] == ["2", "3"]
    assert json.loads((out / "metrics.json").read_text())["fit"] is not None


def test_selfcheck(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    out = tmp_path / "check"
    code = cli.main(["selfcheck", "--checks", "marginalization", "--out", str(out)])
    assert code == cli.EXIT_OK
    assert "marginalization: ok" in capsys.readouterr().out
    assert json.loads((out / "selfcheck.json").read_text())["passed"] is True


def test_selfcheck_failure(monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture) -> None:
    def failing(names, condition=None):  # type: ignore
        return SelfCheckReport([CheckResult("marginalization", 1.0, 1e-9)])

    monkeypatch.setattr(cli, "run_selfcheck", failing)
    assert cli.main(["selfcheck"]) == cli.EXIT_SELFCHECK
    assert "failed: marginalization: FAILED" in capsys.readouterr().err


def test_influence(tmp_path: Path) -> None:
    out = tmp_path / "influence"
    assert cli.main(["influence", "--out", str(out), "--span", "5", "--resolution", "0.5"]) == 0
    with open(out / "influence.csv") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == cli.INFLUENCE_COLUMNS
    assert len(rows) == 21
    assert float(rows[0]["residual"]) == -5.0
    assert float(rows[10]["residual"]) == 0.0


def test_audit(march: Path, tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    out = tmp_path / "audit"
    assert cli.main(["audit", "--config", str(march), "--out", str(out)]) == cli.EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed["ratio"] > 1.0
    assert json.loads((out / "audit.json").read_text()) == printed


def test_configuration_error(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    path = tmp_path / "bad.conf"
    path.write_text("[scenario]\nkind = straight-march\n")
    assert cli.main(["run", "--config", str(path)]) == cli.EXIT_CONFIG
    assert "configuration error: scenario.agents is required" in capsys.readouterr().err
    assert cli.main(["run", "--config", str(tmp_path / "missing.conf")]) == cli.EXIT_CONFIG


@pytest.mark.parametrize(
    "argv, message",
    [
        pytest.param(["montecarlo", "--runs", "0"], "runs '0' must be at least 1", id="no runs"),
        pytest.param(["run", "--seed=-1"], "seed '-1' must be at least 0", id="negative seed"),
    ],
)
def test_invalid_overrides_are_configuration_errors(
    march: Path, tmp_path: Path, capsys: pytest.CaptureFixture, argv: list, message: str
) -> None:
    code = cli.main([*argv, "--config", str(march), "--out", str(tmp_path / "x")])
    assert code == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "configuration error: [command line]" in err
    assert message in err
    assert not (tmp_path / "x").exists()


def test_runtime_error(
    march: Path, tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture
) -> None:
    def broken(cfg, seed):  # type: ignore
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "run_scenario", broken)
    code = cli.main(["-v", "run", "--config", str(march), "--out", str(tmp_path / "x")])
    assert code == cli.EXIT_RUNTIME
    assert "error: RuntimeError: boom" in capsys.readouterr().err


def test_usage_errors() -> None:
    with pytest.raises(SystemExit) as e:
        cli.main([])
    assert e.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["run"])
