from coopnav.config.grammar import InvalidConfigError, parse_config_text
from coopnav.config.run_config import RunConfig, load_run_config, parse_run_config

__all__ = [
    "InvalidConfigError",
    "RunConfig",
    "load_run_config",
    "parse_config_text",
    "parse_run_config",
]
