import json
import math
from pathlib import Path

import pytest

from coopnav.config import InvalidConfigError, load_run_config, parse_config_text, parse_run_config
from coopnav.fusion.center import FusionMode
from coopnav.fusion.estimate import ConstraintMethod
from coopnav.scenarios.config import ScenarioKind
from tests import MARCH_CONFIG


def test_parse_march() -> None:
    cfg = parse_run_config(MARCH_CONFIG)
    assert cfg.scenario.kind is ScenarioKind.STRAIGHT_MARCH
    assert cfg.scenario.agents == 2
    assert cfg.scenario.steps == 20
    assert cfg.scenario.cauchy_scale == 0.5
    assert cfg.scenario.fusion_mode is FusionMode.COOPERATIVE
    assert cfg.montecarlo.runs == 2
    assert cfg.montecarlo.seed == 7
    # everything else keeps its default
    assert cfg.constraint.gamma_xy == 1.0
    assert cfg.ranging.lattice_points == 9
    assert cfg.network.drop_prob == 0.0
    assert cfg.imu_rate == 200.0
    assert cfg.output_directory == "out"


def test_raw_values() -> None:
    raw = parse_config_text(
        """
        # leading comment
        [a]
        n = 3   # trailing comment
        x = -1.5e-2
        flag = TRUE
        word = straight-march
        path = "with spaces, and \\"quotes\\""
        many = 1, 2.5, b

        [b]
        """
    )
    assert raw == {
        "a": {
            "n": 3,
            "x": -0.015,
            "flag": True,
            "word": "straight-march",
            "path": 'with spaces, and "quotes"',
            "many": [1, 2.5, "b"],
        },
        "b": {},
    }


def test_every_section() -> None:
    cfg = parse_run_config(
        """
        [scenario]
        kind = static-triangle
        agents = 6
        steps = 100
        fusion_mode = constraint
        triangle_side = 15
        circle_radius = 25

        [noise]
        sigma_dp = 0.02
        sigma_dpsi_deg = 0.5

        [filter]
        gamma_xy = 1.2
        gamma_z = 0.4
        eta = 4
        v_max = 2.5
        method = sigma-points
        grid_points = 21

        [ranging]
        gamma_r = 1.5
        sigma_r = 0.3
        lattice_points = 11
        lattice_span = 2.5
        rate = 4

        [network]
        drop_prob = 0.1
        latency = 0.02
        jitter = 0.01
        retry = 0.25
        link_drop_prob = a1:0.5, a2:1
        disconnect = a0:100-200, a0:300-310.5, a3:5-6
        max_attempts = 4

        [imu]
        rate = 100

        [montecarlo]
        runs = 50
        seed = 3
        workers = 4
        agents_sweep = 4, 8, 16

        [output]
        directory = "results/triangle"
        """
    )
    assert cfg.scenario.kind is ScenarioKind.STATIC_TRIANGLE
    assert cfg.scenario.fusion_mode is FusionMode.CONSTRAINT
    assert cfg.scenario.sigma_dpsi == pytest.approx(math.radians(0.5))
    assert cfg.scenario.range_rate == 4.0
    assert cfg.constraint.eta == 4.0
    assert cfg.constraint.v_max == 2.5
    assert cfg.constraint.method is ConstraintMethod.SIGMA_POINTS
    assert cfg.constraint.grid_points == 21
    assert cfg.ranging.lattice_points == 11
    assert cfg.network.link_drop_prob == {"a1": 0.5, "a2": 1.0}
    assert cfg.network.disconnects == {"a0": [(100.0, 200.0), (300.0, 310.5)], "a3": [(5.0, 6.0)]}
    assert cfg.network.max_attempts == 4
    assert cfg.imu_rate == 100.0
    assert cfg.montecarlo.agents_sweep == (4, 8, 16)
    assert cfg.output_directory == "results/triangle"


@pytest.mark.parametrize(
    "text, message",
    [
        pytest.param("[scenario]\nkind straight-march\n", "invalid configuration syntax on line 2", id="syntax"),
        pytest.param("agents = 2\n", "key 'agents' must follow a \\[section\\] header", id="no section"),
        pytest.param(
            "[scenario]\nagents = 2\nagents = 3\n", "scenario.agents is given more than once", id="twice"
        ),
        pytest.param("[x]\n", "unknown section \\[x\\]", id="section"),
        pytest.param(
            "[scenario]\nkind = straight-march\nagents = 2\nsteps = 5\nspeed = 3\n",
            "unknown key scenario.speed",
            id="key",
        ),
        pytest.param("[scenario]\nkind = straight-march\nagents = 2\n", "scenario.steps is required", id="required"),
    ],
)
def test_malformed_files(text: str, message: str) -> None:
    with pytest.raises(InvalidConfigError, match=message):
        parse_run_config(text)


MINIMAL = "[scenario]\nkind = straight-march\nagents = 2\nsteps = 5\n"


@pytest.mark.parametrize(
    "extra, message",
    [
        pytest.param("[montecarlo]\nruns = 2.5\n", "montecarlo.runs must be an integer >= 1", id="runs"),
        pytest.param("[network]\ndrop_prob = 2\n", "network.drop_prob must be a probability in \\[0, 1\\]", id="drop"),
        pytest.param("[network]\nretry = 0\n", "network.retry must be a finite number > 0", id="retry"),
        pytest.param("[network]\nlatency = fast\n", "network.latency must be a number", id="latency"),
        pytest.param(
            "[network]\ndisconnect = a0:5\n",
            "network.disconnect entry 'a0:5' must look like agent:start-end",
            id="disconnect",
        ),
        pytest.param(
            "[network]\ndisconnect = a0:9-5\n",
            "network.disconnect entry 'a0:9-5' must end after it starts",
            id="backwards",
        ),
        pytest.param(
            "[network]\nlink_drop_prob = a0\n",
            "network.link_drop_prob entry 'a0' must look like agent:probability",
            id="link",
        ),
        pytest.param(
            "[ranging]\nlattice_points = 8\n",
            "ranging.lattice_points must be an odd integer in \\[3, 41\\]",
            id="lattice",
        ),
        pytest.param("[filter]\nv_max = -1\n", "filter.v_max must be a finite number >= 0", id="v_max"),
        pytest.param("[filter]\neta = 2\n", "filter.eta must be a finite number >= 3", id="eta"),
        pytest.param("[filter]\nmethod = exact\n", "filter.method must be one of truncation, sigma-points", id="method"),
        pytest.param("[output]\ndirectory = 3\n", "output.directory must be a path", id="output"),
    ],
)
def test_invalid_values(extra: str, message: str) -> None:
    with pytest.raises(InvalidConfigError, match=message):
        parse_run_config(MINIMAL + extra)


def test_invalid_choice() -> None:
    with pytest.raises(
        InvalidConfigError,
        match="scenario.kind must be one of straight-march, static-triangle",
    ):
        parse_run_config("[scenario]\nkind = zigzag\nagents = 2\nsteps = 5\n")
    with pytest.raises(InvalidConfigError, match="scenario.fusion_mode must be one of"):
        parse_run_config(MINIMAL + "fusion_mode = magic\n")


def test_cross_field_errors_name_the_section() -> None:
    with pytest.raises(InvalidConfigError, match=r"\[scenario\] agents '3' must be at least 4"):
        parse_run_config("[scenario]\nkind = static-triangle\nagents = 3\nsteps = 5\n")
    with pytest.raises(InvalidConfigError, match=r"\[network\] disconnect of a0"):
        parse_run_config(MINIMAL + "[network]\ndisconnect = a0:1-1e400\n")
    with pytest.raises(InvalidConfigError, match=r"\[filter\] grid_points '200' is capped at 101"):
        parse_run_config(MINIMAL + "[filter]\ngrid_points = 200\n")


def test_load_from_file(tmp_path: Path) -> None:
    path = tmp_path / "march.conf"
    path.write_text(MARCH_CONFIG)
    assert load_run_config(path).montecarlo.seed == 7
    with pytest.raises(InvalidConfigError, match="cannot read configuration file"):
        load_run_config(tmp_path / "missing.conf")


def test_overrides_and_dict() -> None:
    cfg = parse_run_config(MARCH_CONFIG).set_runs(9).set_seed(1).set_output_directory("x")
    assert (cfg.montecarlo.runs, cfg.montecarlo.seed, cfg.output_directory) == (9, 1, "x")
    payload = json.loads(cfg.serialize())
    assert payload["schema_version"] == 1
    assert payload["scenario"]["kind"] == "straight-march"
    assert payload["scenario"]["fusion_mode"] == "cooperative"
    assert payload["montecarlo"]["runs"] == 9
    assert cfg.network_with_seed(42).seed == 42
