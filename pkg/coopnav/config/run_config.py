from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Union

from coopnav.config.grammar import InvalidConfigError, parse_config_text
from coopnav.config.visitors import RunConfigVisitor
from coopnav.fusion.estimate import ConstraintParams, RangeParams
from coopnav.messaging.network import NetworkConfig
from coopnav.scenarios.config import MonteCarloConfig, ScenarioConfig
from coopnav.validation import Validated, _validate_float_literal

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig(Validated):
    """
    Everything one invocation needs: the scenario, the fusion tuning, the
    network model, the replica settings and where outputs go.
    """

    scenario: ScenarioConfig
    constraint: ConstraintParams = field(default_factory=ConstraintParams)
    ranging: RangeParams = field(default_factory=RangeParams)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    imu_rate: float = 200.0
    montecarlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    output_directory: str = "out"

    def validate(self) -> None:
        _validate_float_literal("imu_rate", self.imu_rate, 0.0, strict=True)

    def network_with_seed(self, seed: int) -> NetworkConfig:
        return replace(self.network, seed=seed)

    def set_runs(self, runs: int) -> RunConfig:
        return replace(self, montecarlo=replace(self.montecarlo, runs=runs))

    def set_seed(self, seed: int) -> RunConfig:
        return replace(self, montecarlo=replace(self.montecarlo, seed=seed))

    def set_output_directory(self, directory: str) -> RunConfig:
        return replace(self, output_directory=directory)

    def to_dict(self) -> Dict[str, Any]:
        def plain(value: Any) -> Any:
            if isinstance(value, Enum):
                return value.value
            if isinstance(value, dict):
                return {str(k): plain(v) for k, v in value.items()}
            if isinstance(value, (list, tuple)):
                return [plain(v) for v in value]
            return value

        out = plain(asdict(self))
        out["schema_version"] = SCHEMA_VERSION
        return out  # type: ignore

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def parse_run_config(text: str) -> RunConfig:
    """
    Build a run configuration from the text of a configuration file.

    :raises InvalidConfigError: On a syntax error or an invalid field; the
        message names the field.
    """
    kwargs = RunConfigVisitor().visit(parse_config_text(text))
    return RunConfig(**kwargs)


def load_run_config(path: Union[str, Path]) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InvalidConfigError(f"cannot read configuration file {path}: {e.strerror}") from e
    return parse_run_config(text)
