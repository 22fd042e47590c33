"""
Robust range updates of the joint estimate.

The ranging error is modelled as a uniform component of half-width gamma_r
(device placement, asynchrony, correlated errors) convolved with a Cauchy
component of scale sigma_r. The resulting likelihood has a bounded score, so a
single wild measurement can only move the estimate a bounded amount.

The prior of the range vector s is represented by a fixed lattice of
standard-normal abscissas mapped through the eigen-decomposition of its
covariance; the likelihood reweights the lattice and the reweighted moments are
propagated to the rest of the state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from coopnav.deadreck import TrackState
from coopnav.fusion.estimate import (
    GlobalEstimate,
    InvalidParamsError,
    RangeMeasurement,
    RangeParams,
)
from coopnav.fusion.marginalization import marginal_condition
from coopnav.fusion.transforms import PairTransform
from coopnav.linalg import eigen_sqrt
from coopnav.validation import (
    FloatArray,
    InvalidInputError,
    _validate_float_literal,
    as_array,
)

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-300
FIXED_POINT_ID = "__fixed__"

Likelihood = Callable[[FloatArray], FloatArray]


class AuxKind(Enum):
    ANCHOR = "anchor"
    POSITION_FIX = "position-fix"
    PRESSURE = "pressure"


def cauchy_uniform_likelihood(
    residual: Union[float, FloatArray], gamma: float, sigma: float
) -> FloatArray:
    """
    atan((e + gamma) / sigma) - atan((e - gamma) / sigma) for residuals e,
    evaluated as a single arctangent where that is exact to avoid cancellation
    in the tails.
    """
    e = np.asarray(residual, dtype=float)
    a = (e + gamma) / sigma
    b = (e - gamma) / sigma
    ab = a * b
    with np.errstate(divide="ignore", invalid="ignore"):
        single = np.arctan((a - b) / (1.0 + ab))
    return np.where(ab > -1.0, single, np.arctan(a) - np.arctan(b))


def lattice_condition(
    z: FloatArray,
    Pz: FloatArray,
    k: int,
    likelihood: Likelihood,
    rp: RangeParams,
) -> Optional[Tuple[FloatArray, FloatArray]]:
    """
    Reweight the lattice representation of the leading k-block of z by
    ``likelihood`` and condition the whole state on the result.

    :returns: The posterior moments, or None if every weight underflowed.
    """
    z1 = z[:k]
    Q, sqrt_lam = eigen_sqrt(Pz[:k, :k], "range prior covariance")
    lattice = rp.lattice_for(k)
    offsets = (lattice.points * sqrt_lam) @ Q.T
    samples = z1 + offsets
    weights = lattice.weights * likelihood(samples)
    if not np.all(np.isfinite(weights)) or weights.max() < WEIGHT_FLOOR:
        return None
    weights = weights / weights.sum()
    m_offset = weights @ offsets
    C_offset = (offsets * weights[:, None]).T @ offsets
    m = z1 + m_offset
    # raw second moment assembled around z1 to keep the cancellation small
    C = (
        C_offset
        + np.outer(z1, m_offset)
        + np.outer(m_offset, z1)
        + np.outer(z1, z1)
    )
    return marginal_condition(z, Pz, k, m, C)


def _norm_likelihood(r_tilde: float, rp: RangeParams) -> Likelihood:
    def likelihood(s: FloatArray) -> FloatArray:
        return cauchy_uniform_likelihood(
            r_tilde - np.linalg.norm(s, axis=1), rp.gamma_r, rp.sigma_r
        )

    return likelihood


def _signed_likelihood(r_tilde: float, rp: RangeParams) -> Likelihood:
    def likelihood(s: FloatArray) -> FloatArray:
        return cauchy_uniform_likelihood(r_tilde - s[:, 0], rp.gamma_r, rp.sigma_r)

    return likelihood


def _conditioned(
    g: GlobalEstimate,
    tr: PairTransform,
    k: int,
    likelihood: Likelihood,
    rp: RangeParams,
    what: str,
) -> GlobalEstimate:
    z, Pz = tr.forward(g.mean, g.P)
    posterior = lattice_condition(z, Pz, k, likelihood, rp)
    if posterior is None:
        logger.warning("%s rejected: measurement is irreconcilable with the estimate", what)
        return g
    mean, P = tr.inverse(*posterior)
    return g.set_moments(mean, P)


def _with_fixed_point(g: GlobalEstimate, point: FloatArray) -> GlobalEstimate:
    return g.add_foot(
        FIXED_POINT_ID, TrackState(x=point, chi=0.0, P=np.zeros((4, 4)), seq=0)
    )


def range_update(g: GlobalEstimate, m: RangeMeasurement, rp: RangeParams) -> GlobalEstimate:
    """
    Condition the estimate on a range between two tracked feet, or between a
    foot and a fixed point.

    Irreconcilable measurements leave the estimate unchanged (the same object
    is returned) and are logged.

    :raises UnknownFootError: If a foot is not tracked.
    :raises DegenerateCovarianceError: If the range prior is degenerate.
    """
    if m.to_fixed_point:
        return aux_update(g, AuxKind.ANCHOR, m.a, m.b, rp, r_tilde=m.r_tilde)
    tr = PairTransform.between(g.ids, m.a, str(m.b))
    return _conditioned(
        g, tr, 3, _norm_likelihood(m.r_tilde, rp), rp, f"range {m.a}-{m.b}"
    )


def aux_update(
    g: GlobalEstimate,
    kind: Union[AuxKind, str],
    foot: str,
    datum: Union[str, float, Sequence[float], FloatArray],
    rp: RangeParams,
    r_tilde: float = 0.0,
) -> GlobalEstimate:
    """
    Updates against information that is not another agent.

    anchor: ``datum`` is a known point and ``r_tilde`` the measured range to it.
    position-fix: ``datum`` is the measured position (a range of zero to it).
    pressure: ``r_tilde`` is the measured height of the foot above ``datum``,
        which is either a reference height or the identifier of another foot.
    """
    kind = AuxKind(kind)
    _validate_float_literal("r_tilde", r_tilde)
    if kind is AuxKind.PRESSURE:
        if isinstance(datum, str):
            tr = PairTransform.between(g.ids, foot, datum, axes=(2,))
            return _conditioned(
                g, tr, 1, _signed_likelihood(r_tilde, rp), rp, f"pressure {foot}-{datum}"
            )
        if not isinstance(datum, (int, float, np.floating, np.integer)):
            raise InvalidInputError(f"pressure reference '{datum}' must be a height or a foot")
        _validate_float_literal("reference height", datum)
        augmented = _with_fixed_point(g, np.array([0.0, 0.0, float(datum)]))
        tr = PairTransform.between(augmented.ids, foot, FIXED_POINT_ID, axes=(2,))
        result = _conditioned(
            augmented, tr, 1, _signed_likelihood(r_tilde, rp), rp, f"pressure {foot}"
        )
        return g if result is augmented else result.drop_foot(FIXED_POINT_ID)

    if isinstance(datum, str):
        raise InvalidInputError(f"{kind.value} datum must be a point")
    point = as_array("datum", datum, (3,))
    if kind is AuxKind.POSITION_FIX:
        r_tilde = 0.0
    elif r_tilde < 0:
        raise InvalidInputError(f"r_tilde '{r_tilde}' must be at least 0")
    augmented = _with_fixed_point(g, point)
    tr = PairTransform.between(augmented.ids, foot, FIXED_POINT_ID)
    result = _conditioned(
        augmented, tr, 3, _norm_likelihood(r_tilde, rp), rp, f"{kind.value} {foot}"
    )
    return g if result is augmented else result.drop_foot(FIXED_POINT_ID)


@dataclass(frozen=True)
class InfluencePoint:
    residual: float
    correction: float
    kalman_correction: float


def influence_curve(
    residuals: Sequence[float],
    prior_cov: FloatArray,
    rp: RangeParams,
    distance: float = 10.0,
    kalman_sigma: float = 1.0,
) -> List[InfluencePoint]:
    """
    Mean correction along the line of sight produced by a range update, as a
    function of the residual r_tilde - |s_hat|, next to the correction of a
    linearized Kalman update.

    :param prior_cov: Prior covariance of the range vector s, which has mean
        [distance, 0, 0].
    :param kalman_sigma: Measurement standard deviation of the comparison
        Kalman update.
    """
    P = as_array("prior_cov", prior_cov, (3, 3))
    _validate_float_literal("distance", distance, 0.0, strict=True)
    if kalman_sigma <= 0:
        raise InvalidParamsError(f"kalman_sigma '{kalman_sigma}' must be positive")
    z = np.array([distance, 0.0, 0.0])
    gain = P[0, 0] / (P[0, 0] + kalman_sigma**2)

    curve = []
    for e in residuals:
        r_tilde = max(distance + float(e), 0.0)
        posterior = lattice_condition(z, P, 3, _norm_likelihood(r_tilde, rp), rp)
        shift = 0.0 if posterior is None else float(posterior[0][0] - distance)
        curve.append(
            InfluencePoint(
                residual=float(e),
                correction=shift,
                kalman_correction=gain * (r_tilde - distance),
            )
        )
    return curve
