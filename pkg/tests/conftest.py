import logging
from typing import Any, Iterator, List

import pytest


def pytest_addoption(parser: Any) -> None:
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="also run the slow Monte-Carlo acceptance tests",
    )


def pytest_collection_modifyitems(config: Any, items: List[Any]) -> None:
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def restore_logging() -> Iterator[None]:
    # the CLI installs its own handler on the package logger
    logger = logging.getLogger("coopnav")
    handlers, level = list(logger.handlers), logger.level
    yield
    logger.handlers[:] = handlers
    logger.setLevel(level)
