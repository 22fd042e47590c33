from __future__ import annotations

import math
import re
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Type, TypeVar

from coopnav.config.grammar import InvalidConfigError, RawConfig, Scalar, Value
from coopnav.fusion.center import FusionMode
from coopnav.fusion.estimate import ConstraintMethod, ConstraintParams, RangeParams
from coopnav.messaging.network import NetworkConfig
from coopnav.scenarios.config import MonteCarloConfig, ScenarioConfig, ScenarioKind
from coopnav.validation import InvalidInputError

TEnum = TypeVar("TEnum")

FIELDS: Mapping[str, Tuple[str, ...]] = {
    "scenario": (
        "kind",
        "agents",
        "steps",
        "spacing",
        "step_length",
        "step_rate",
        "foot_separation",
        "fusion_mode",
        "triangle_side",
        "circle_radius",
    ),
    "noise": ("sigma_dp", "sigma_dpsi_deg"),
    "filter": ("gamma_xy", "gamma_z", "eta", "v_max", "method", "grid_points"),
    "ranging": (
        "gamma_r",
        "sigma_r",
        "lattice_points",
        "lattice_span",
        "cauchy_scale",
        "rate",
    ),
    "network": (
        "drop_prob",
        "latency",
        "jitter",
        "retry",
        "link_drop_prob",
        "disconnect",
        "max_attempts",
    ),
    "imu": ("rate",),
    "montecarlo": ("runs", "seed", "workers", "agents_sweep"),
    "output": ("directory",),
}

REQUIRED = ("scenario.kind", "scenario.agents", "scenario.steps")

DISCONNECT_RE = re.compile(r"^(?P<agent>[^:]+):(?P<start>[0-9.eE+]+)-(?P<end>[0-9.eE+]+)$")
LINK_DROP_RE = re.compile(r"^(?P<agent>[^:]+):(?P<p>[0-9.eE+-]+)$")


def _as_list(value: Value) -> List[Scalar]:
    return list(value) if isinstance(value, list) else [value]


def _integer(name: str, value: Value, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise InvalidConfigError(f"{name} must be an integer >= {minimum}")
    return value


def _real(name: str, value: Value, minimum: float = 0.0, strict: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidConfigError(f"{name} must be a number")
    number = float(value)
    below = number <= minimum if strict else number < minimum
    if not math.isfinite(number) or below:
        bound = ">" if strict else ">="
        raise InvalidConfigError(f"{name} must be a finite number {bound} {minimum:g}")
    return number


def _probability(name: str, value: Value) -> float:
    number = _real(name, value)
    if number > 1.0:
        raise InvalidConfigError(f"{name} must be a probability in [0, 1]")
    return number


def _choice(name: str, value: Value, enum: Callable[[str], TEnum], options: Sequence[str]) -> TEnum:
    try:
        return enum(str(value))
    except ValueError:
        raise InvalidConfigError(f"{name} must be one of {', '.join(options)}")


class RunConfigVisitor:
    """
    Checks the keys of a parsed configuration file and turns them into the
    keyword arguments of :class:`~coopnav.config.run_config.RunConfig`.

    Every key ``section.key`` is handled by ``_visit_<section>_<key>``, which
    receives the raw value, or None when the key is absent, and returns the
    checked value, or None to keep the default.
    """

    def visit(self, raw: RawConfig) -> Dict[str, Any]:
        for section, keys in raw.items():
            if section not in FIELDS:
                raise InvalidConfigError(f"unknown section [{section}]")
            for key in keys:
                if key not in FIELDS[section]:
                    raise InvalidConfigError(f"unknown key {section}.{key}")
        for required in REQUIRED:
            section, key = required.split(".")
            if key not in raw.get(section, {}):
                raise InvalidConfigError(f"{required} is required")

        returns: Dict[str, Any] = {}
        for section, keys in FIELDS.items():
            given = raw.get(section, {})
            for key in keys:
                value = given.get(key)
                method = getattr(self, f"_visit_{section}_{key}")
                returns[f"{section}.{key}"] = None if value is None else method(value)
        return self._combine(returns)

    def _combine(self, returns: Mapping[str, Any]) -> Dict[str, Any]:
        def given(*names: Tuple[str, str]) -> Dict[str, Any]:
            return {
                field: returns[key] for key, field in names if returns[key] is not None
            }

        scenario = given(
            ("scenario.kind", "kind"),
            ("scenario.agents", "agents"),
            ("scenario.steps", "steps"),
            ("scenario.spacing", "spacing"),
            ("scenario.step_length", "step_length"),
            ("scenario.step_rate", "step_rate"),
            ("scenario.foot_separation", "foot_separation"),
            ("scenario.fusion_mode", "fusion_mode"),
            ("scenario.triangle_side", "triangle_side"),
            ("scenario.circle_radius", "circle_radius"),
            ("noise.sigma_dp", "sigma_dp"),
            ("noise.sigma_dpsi_deg", "sigma_dpsi"),
            ("ranging.cauchy_scale", "cauchy_scale"),
            ("ranging.rate", "range_rate"),
        )
        constraint = given(
            ("filter.gamma_xy", "gamma_xy"),
            ("filter.gamma_z", "gamma_z"),
            ("filter.eta", "eta"),
            ("filter.v_max", "v_max"),
            ("filter.method", "method"),
            ("filter.grid_points", "grid_points"),
        )
        ranging = given(
            ("ranging.gamma_r", "gamma_r"),
            ("ranging.sigma_r", "sigma_r"),
            ("ranging.lattice_points", "lattice_points"),
            ("ranging.lattice_span", "lattice_span"),
        )
        network = given(
            ("network.drop_prob", "drop_prob"),
            ("network.latency", "latency"),
            ("network.jitter", "jitter"),
            ("network.retry", "retry"),
            ("network.link_drop_prob", "link_drop_prob"),
            ("network.disconnect", "disconnects"),
            ("network.max_attempts", "max_attempts"),
        )
        montecarlo = given(
            ("montecarlo.runs", "runs"),
            ("montecarlo.seed", "seed"),
            ("montecarlo.workers", "workers"),
            ("montecarlo.agents_sweep", "agents_sweep"),
        )

        kwargs: Dict[str, Any] = {
            "scenario": self._build("scenario", ScenarioConfig, scenario),
            "constraint": self._build("filter", ConstraintParams, constraint),
            "ranging": self._build("ranging", RangeParams, ranging),
            "network": self._build("network", NetworkConfig, network),
            "montecarlo": self._build("montecarlo", MonteCarloConfig, montecarlo),
        }
        if returns["imu.rate"] is not None:
            kwargs["imu_rate"] = returns["imu.rate"]
        if returns["output.directory"] is not None:
            kwargs["output_directory"] = returns["output.directory"]
        return kwargs

    @staticmethod
    def _build(section: str, cls: Type[Any], fields: Dict[str, Any]) -> Any:
        try:
            return cls(**fields)
        except InvalidInputError as e:
            raise InvalidConfigError(f"[{section}] {e}") from e

    def _visit_scenario_kind(self, value: Value) -> ScenarioKind:
        return _choice("scenario.kind", value, ScenarioKind, [k.value for k in ScenarioKind])

    def _visit_scenario_agents(self, value: Value) -> int:
        return _integer("scenario.agents", value, 1)

    def _visit_scenario_steps(self, value: Value) -> int:
        return _integer("scenario.steps", value, 1)

    def _visit_scenario_spacing(self, value: Value) -> float:
        return _real("scenario.spacing", value, strict=True)

    def _visit_scenario_step_length(self, value: Value) -> float:
        return _real("scenario.step_length", value, strict=True)

    def _visit_scenario_step_rate(self, value: Value) -> float:
        return _real("scenario.step_rate", value, strict=True)

    def _visit_scenario_foot_separation(self, value: Value) -> float:
        return _real("scenario.foot_separation", value)

    def _visit_scenario_fusion_mode(self, value: Value) -> FusionMode:
        return _choice("scenario.fusion_mode", value, FusionMode, [m.value for m in FusionMode])

    def _visit_scenario_triangle_side(self, value: Value) -> float:
        return _real("scenario.triangle_side", value, strict=True)

    def _visit_scenario_circle_radius(self, value: Value) -> float:
        return _real("scenario.circle_radius", value, strict=True)

    def _visit_noise_sigma_dp(self, value: Value) -> float:
        return _real("noise.sigma_dp", value)

    def _visit_noise_sigma_dpsi_deg(self, value: Value) -> float:
        return math.radians(_real("noise.sigma_dpsi_deg", value))

    def _visit_filter_gamma_xy(self, value: Value) -> float:
        return _real("filter.gamma_xy", value, strict=True)

    def _visit_filter_gamma_z(self, value: Value) -> float:
        return _real("filter.gamma_z", value, strict=True)

    def _visit_filter_eta(self, value: Value) -> float:
        return _real("filter.eta", value, 3.0)

    def _visit_filter_v_max(self, value: Value) -> float:
        return _real("filter.v_max", value)

    def _visit_filter_method(self, value: Value) -> ConstraintMethod:
        return _choice("filter.method", value, ConstraintMethod, [m.value for m in ConstraintMethod])

    def _visit_filter_grid_points(self, value: Value) -> int:
        return _integer("filter.grid_points", value, 5)

    def _visit_ranging_gamma_r(self, value: Value) -> float:
        return _real("ranging.gamma_r", value)

    def _visit_ranging_sigma_r(self, value: Value) -> float:
        return _real("ranging.sigma_r", value, strict=True)

    def _visit_ranging_lattice_points(self, value: Value) -> int:
        points = _integer("ranging.lattice_points", value, 3)
        if points % 2 == 0 or points > 41:
            raise InvalidConfigError("ranging.lattice_points must be an odd integer in [3, 41]")
        return points

    def _visit_ranging_lattice_span(self, value: Value) -> float:
        return _real("ranging.lattice_span", value, strict=True)

    def _visit_ranging_cauchy_scale(self, value: Value) -> float:
        return _real("ranging.cauchy_scale", value)

    def _visit_ranging_rate(self, value: Value) -> float:
        return _real("ranging.rate", value, strict=True)

    def _visit_network_drop_prob(self, value: Value) -> float:
        return _probability("network.drop_prob", value)

    def _visit_network_latency(self, value: Value) -> float:
        return _real("network.latency", value)

    def _visit_network_jitter(self, value: Value) -> float:
        return _real("network.jitter", value)

    def _visit_network_retry(self, value: Value) -> float:
        return _real("network.retry", value, strict=True)

    def _visit_network_link_drop_prob(self, value: Value) -> Dict[str, float]:
        out: Dict[str, float] = {}
        for item in _as_list(value):
            match = LINK_DROP_RE.match(str(item))
            if match is None:
                raise InvalidConfigError(
                    f"network.link_drop_prob entry '{item}' must look like agent:probability"
                )
            p = _probability("network.link_drop_prob", float(match.group("p")))
            out[match.group("agent")] = p
        return out

    def _visit_network_disconnect(self, value: Value) -> Dict[str, List[Tuple[float, float]]]:
        out: Dict[str, List[Tuple[float, float]]] = {}
        for item in _as_list(value):
            match = DISCONNECT_RE.match(str(item))
            try:
                if match is None:
                    raise ValueError(item)
                start, end = float(match.group("start")), float(match.group("end"))
            except ValueError:
                raise InvalidConfigError(
                    f"network.disconnect entry '{item}' must look like agent:start-end"
                )
            if end < start:
                raise InvalidConfigError(
                    f"network.disconnect entry '{item}' must end after it starts"
                )
            out.setdefault(match.group("agent"), []).append((start, end))
        return out

    def _visit_network_max_attempts(self, value: Value) -> Optional[int]:
        return _integer("network.max_attempts", value, 1)

    def _visit_imu_rate(self, value: Value) -> float:
        return _real("imu.rate", value, strict=True)

    def _visit_montecarlo_runs(self, value: Value) -> int:
        return _integer("montecarlo.runs", value, 1)

    def _visit_montecarlo_seed(self, value: Value) -> int:
        return _integer("montecarlo.seed", value, 0)

    def _visit_montecarlo_workers(self, value: Value) -> int:
        return _integer("montecarlo.workers", value, 1)

    def _visit_montecarlo_agents_sweep(self, value: Value) -> Tuple[int, ...]:
        return tuple(_integer("montecarlo.agents_sweep", n, 1) for n in _as_list(value))

    def _visit_output_directory(self, value: Value) -> str:
        if not isinstance(value, str) or not value:
            raise InvalidConfigError("output.directory must be a path")
        return value
