from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Any, Optional, Sequence

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]


class InvalidInputError(Exception):
    pass


class Validated(ABC):
    """
    Base for the value types of this package. Instances are frozen dataclasses
    that validate (and coerce array fields) as soon as they are built.
    """

    def __post_init__(self) -> None:
        self.validate()

    @abstractmethod
    def validate(self) -> None:
        raise NotImplementedError

    def _coerce(self, name: str, value: FloatArray) -> None:
        # frozen dataclasses need the escape hatch to store the coerced array
        object.__setattr__(self, name, value)


def _validate_int_literal(
    name: str, literal: int, minn: Optional[int], maxn: Optional[int]
) -> None:
    if not isinstance(literal, (int, np.integer)) or isinstance(literal, bool):
        raise InvalidInputError(f"{name} '{literal}' must be an integer")
    if minn is not None and literal < minn:
        raise InvalidInputError(f"{name} '{literal}' must be at least {minn:,}")
    elif maxn is not None and literal > maxn:
        raise InvalidInputError(f"{name} '{literal}' is capped at {maxn:,}")


def _validate_float_literal(
    name: str,
    literal: float,
    minn: Optional[float] = None,
    maxn: Optional[float] = None,
    strict: bool = False,
) -> None:
    if isinstance(literal, bool) or not isinstance(
        literal, (int, float, np.integer, np.floating)
    ):
        raise InvalidInputError(f"{name} '{literal}' must be a number")
    if not math.isfinite(float(literal)):
        raise InvalidInputError(f"{name} '{literal}' must be finite")
    if minn is not None:
        if strict and literal <= minn:
            raise InvalidInputError(f"{name} '{literal}' must be greater than {minn}")
        if not strict and literal < minn:
            raise InvalidInputError(f"{name} '{literal}' must be at least {minn}")
    if maxn is not None and literal > maxn:
        raise InvalidInputError(f"{name} '{literal}' is capped at {maxn}")


def _validate_probability(name: str, literal: float) -> None:
    _validate_float_literal(name, literal, 0.0, 1.0)


def as_array(name: str, value: Any, shape: Sequence[int]) -> FloatArray:
    """
    Convert ``value`` into a finite float64 array of the given shape.

    :param name: The field name used in error messages.
    :param value: Anything ``numpy.asarray`` accepts.
    :param shape: The expected shape.
    :raises InvalidInputError: If the shape is wrong or a component is not finite.
    """
    try:
        array = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"{name} must be numeric") from e
    if array.shape != tuple(shape):
        raise InvalidInputError(
            f"{name} must have shape {tuple(shape)}, got {array.shape}"
        )
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} must be finite")
    array.setflags(write=False)
    return array


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped
