"""
The joint state of every tracked foot and the parameters of the fusion
updates.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from coopnav.deadreck import TrackState
from coopnav.linalg import symmetrize
from coopnav.validation import (
    FloatArray,
    InvalidInputError,
    Validated,
    _validate_float_literal,
    _validate_int_literal,
    as_array,
    wrap_angle,
)

FOOT_DIM = 4


class UnknownFootError(KeyError):
    pass


class InvalidParamsError(InvalidInputError):
    pass


@dataclass(frozen=True, eq=False)
class GlobalEstimate(Validated):
    """
    Stacked [x_j, chi_j] of every tracked foot with the full joint covariance.
    ``seqs`` and ``times`` hold the last ingested step index and step time of
    each foot.
    """

    ids: Tuple[str, ...]
    mean: FloatArray
    P: FloatArray
    seqs: Tuple[int, ...] = ()
    times: Tuple[float, ...] = ()

    def validate(self) -> None:
        ids = tuple(self.ids)
        if len(set(ids)) != len(ids):
            raise InvalidInputError(f"foot ids {ids} must be unique")
        object.__setattr__(self, "ids", ids)
        n = FOOT_DIM * len(ids)
        mean = np.array(as_array("mean", self.mean, (n,)))
        mean[3::FOOT_DIM] = [wrap_angle(float(c)) for c in mean[3::FOOT_DIM]]
        mean.setflags(write=False)
        self._coerce("mean", mean)
        P = as_array("P", self.P, (n, n))
        scale = max(float(np.abs(P).max()) if n else 1.0, 1.0)
        if n and np.abs(P - P.T).max() > 1e-9 * scale:
            raise InvalidInputError("joint covariance must be symmetric")
        self._coerce("P", P)
        seqs = tuple(self.seqs) if self.seqs else (0,) * len(ids)
        times = tuple(self.times) if self.times else (0.0,) * len(ids)
        if len(seqs) != len(ids) or len(times) != len(ids):
            raise InvalidInputError("seqs and times must have one entry per foot")
        object.__setattr__(self, "seqs", seqs)
        object.__setattr__(self, "times", times)

    @classmethod
    def from_tracks(
        cls, tracks: Mapping[str, TrackState], times: Optional[Mapping[str, float]] = None
    ) -> GlobalEstimate:
        ids = tuple(tracks)
        n = FOOT_DIM * len(ids)
        mean = np.zeros(n)
        P = np.zeros((n, n))
        for j, foot in enumerate(ids):
            blk = slice(FOOT_DIM * j, FOOT_DIM * (j + 1))
            mean[blk] = tracks[foot].mean
            P[blk, blk] = tracks[foot].P
        return cls(
            ids=ids,
            mean=mean,
            P=P,
            seqs=tuple(tracks[f].seq for f in ids),
            times=tuple((times or {}).get(f, 0.0) for f in ids),
        )

    @property
    def dim(self) -> int:
        return FOOT_DIM * len(self.ids)

    def index(self, foot: str) -> int:
        try:
            return self.ids.index(foot)
        except ValueError:
            raise UnknownFootError(f"foot '{foot}' is not tracked") from None

    def block(self, foot: str) -> slice:
        j = self.index(foot)
        return slice(FOOT_DIM * j, FOOT_DIM * (j + 1))

    def position_indices(self, foot: str) -> np.ndarray:
        j = self.index(foot)
        return np.arange(FOOT_DIM * j, FOOT_DIM * j + 3)

    def position(self, foot: str) -> FloatArray:
        return np.array(self.mean[self.block(foot)][:3])

    def heading(self, foot: str) -> float:
        return float(self.mean[self.block(foot)][3])

    def track(self, foot: str) -> TrackState:
        blk = self.block(foot)
        return TrackState(
            x=self.mean[blk][:3],
            chi=float(self.mean[blk][3]),
            P=symmetrize(self.P[blk, blk]),
            seq=self.seqs[self.index(foot)],
        )

    def set_moments(self, mean: FloatArray, P: FloatArray) -> GlobalEstimate:
        return replace(self, mean=mean, P=symmetrize(P))

    def add_foot(self, foot: str, track: TrackState, t: float = 0.0) -> GlobalEstimate:
        n = self.dim
        P = np.zeros((n + FOOT_DIM, n + FOOT_DIM))
        P[:n, :n] = self.P
        P[n:, n:] = track.P
        return GlobalEstimate(
            ids=self.ids + (foot,),
            mean=np.concatenate([self.mean, track.mean]),
            P=P,
            seqs=self.seqs + (track.seq,),
            times=self.times + (t,),
        )

    def drop_foot(self, foot: str) -> GlobalEstimate:
        j = self.index(foot)
        keep = np.array(
            [i for i in range(self.dim) if not FOOT_DIM * j <= i < FOOT_DIM * (j + 1)],
            dtype=int,
        )
        return GlobalEstimate(
            ids=self.ids[:j] + self.ids[j + 1 :],
            mean=self.mean[keep],
            P=self.P[np.ix_(keep, keep)],
            seqs=self.seqs[:j] + self.seqs[j + 1 :],
            times=self.times[:j] + self.times[j + 1 :],
        )

    def permuted(self, order: Sequence[str]) -> GlobalEstimate:
        """The same estimate with the feet relabelled into ``order``."""
        if sorted(order) != sorted(self.ids):
            raise InvalidInputError(f"order {tuple(order)} is not a permutation of {self.ids}")
        idx = np.concatenate([np.arange(self.block(f).start, self.block(f).stop) for f in order])
        return GlobalEstimate(
            ids=tuple(order),
            mean=self.mean[idx],
            P=self.P[np.ix_(idx, idx)],
            seqs=tuple(self.seqs[self.index(f)] for f in order),
            times=tuple(self.times[self.index(f)] for f in order),
        )


class ConstraintMethod(Enum):
    # moments of the prior truncated to the ball, by quadrature
    TRUNCATION = "truncation"
    # moments of sigma points projected onto the ball
    SIGMA_POINTS = "sigma-points"


@dataclass(frozen=True)
class ConstraintParams(Validated):
    gamma_xy: float = 1.0
    gamma_z: float = 0.5
    eta: float = 3.0
    v_max: float = 3.0
    method: ConstraintMethod = ConstraintMethod.TRUNCATION
    grid_points: int = 31

    def validate(self) -> None:
        try:
            _validate_float_literal("gamma_xy", self.gamma_xy, 0.0, strict=True)
            _validate_float_literal("gamma_z", self.gamma_z, 0.0, strict=True)
            # below 3 the center sigma point gets a negative weight
            _validate_float_literal("eta", self.eta, 3.0)
            _validate_float_literal("v_max", self.v_max, 0.0)
            if not isinstance(self.method, ConstraintMethod):
                raise InvalidParamsError(f"method '{self.method}' must be a ConstraintMethod")
            _validate_int_literal("grid_points", self.grid_points, 5, 101)
        except InvalidParamsError:
            raise
        except InvalidInputError as e:
            raise InvalidParamsError(str(e)) from e

    @property
    def scaling(self) -> FloatArray:
        """Diagonal of D, which makes the separation ellipsoid a ball."""
        return np.array([1.0, 1.0, self.gamma_xy / self.gamma_z])

    def radius(self, dt: float = 0.0) -> float:
        return self.gamma_xy + self.v_max * abs(dt)


@dataclass(frozen=True, eq=False)
class Lattice:
    """Standard-normal abscissas with normalized prior weights."""

    points: FloatArray
    weights: FloatArray

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])


@functools.lru_cache(maxsize=16)
def build_lattice(dim: int, points_per_axis: int = 9, span: float = 3.0) -> Lattice:
    """
    Centered cubic lattice over [-span, span]^dim with weights proportional
    to exp(-|u|^2 / 2), rescaled so its first two weighted moments are
    exactly zero and the identity.
    """
    axis = np.linspace(-span, span, points_per_axis)
    grid = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1)
    u = grid.reshape(-1, dim)
    w = np.exp(-0.5 * np.sum(u * u, axis=1))
    w /= w.sum()
    u = u - w @ u
    cov = (u * w[:, None]).T @ u
    u = u @ np.linalg.inv(np.linalg.cholesky(cov)).T
    u.setflags(write=False)
    w.setflags(write=False)
    return Lattice(points=u, weights=w)


@dataclass(frozen=True)
class RangeParams(Validated):
    gamma_r: float = 2.0
    sigma_r: float = 0.5
    lattice_points: int = 9
    lattice_span: float = 3.0

    def validate(self) -> None:
        try:
            _validate_float_literal("gamma_r", self.gamma_r, 0.0)
            _validate_float_literal("sigma_r", self.sigma_r, 0.0, strict=True)
            _validate_int_literal("lattice_points", self.lattice_points, 3, 41)
            if self.lattice_points % 2 == 0:
                raise InvalidParamsError(
                    f"lattice_points '{self.lattice_points}' must be odd"
                )
            _validate_float_literal("lattice_span", self.lattice_span, 0.0, strict=True)
        except InvalidParamsError:
            raise
        except InvalidInputError as e:
            raise InvalidParamsError(str(e)) from e

    @property
    def lattice(self) -> Lattice:
        return self.lattice_for(3)

    def lattice_for(self, dim: int) -> Lattice:
        """
        The lattice for a dim-dimensional update. Lower-dimensional updates get
        the same number of points as the 3-D lattice, spread over fewer axes.
        """
        budget = self.lattice_points**3
        per_axis = int(math.floor(budget ** (1.0 / dim) + 1e-9))
        if per_axis % 2 == 0:
            per_axis -= 1
        return build_lattice(dim, max(per_axis, 3), self.lattice_span)

    def inflated(self, extra: float) -> RangeParams:
        return replace(self, gamma_r=self.gamma_r + max(extra, 0.0))


@dataclass(frozen=True, eq=False)
class RangeMeasurement(Validated):
    """
    A range between ``a`` and ``b``. ``b`` is either another identifier or a
    fixed point given as a 3-vector. Identifiers may name feet or agents; the
    fusion center resolves agents to feet.
    """

    a: str
    b: Union[str, FloatArray]
    r_tilde: float
    t: float = 0.0

    def validate(self) -> None:
        if not isinstance(self.a, str) or not self.a:
            raise InvalidInputError(f"a '{self.a}' must be a non-empty identifier")
        if isinstance(self.b, str):
            if self.b == self.a:
                raise InvalidInputError(f"a and b must differ, both are '{self.a}'")
        else:
            self._coerce("b", as_array("b", self.b, (3,)))
        _validate_float_literal("r_tilde", self.r_tilde, 0.0)
        _validate_float_literal("t", self.t)

    @property
    def to_fixed_point(self) -> bool:
        return not isinstance(self.b, str)
