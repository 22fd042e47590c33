from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from coopnav.fusion.estimate import ConstraintMethod, ConstraintParams, GlobalEstimate
from coopnav.fusion.marginalization import marginal_condition
from coopnav.fusion.transforms import PairTransform
from coopnav.linalg import cholesky_lower
from coopnav.validation import FloatArray

logger = logging.getLogger(__name__)

# half-width, in prior standard deviations, of the truncation quadrature box
TRUNCATION_SPAN = 6.0


def sigma_points(
    mean: FloatArray, P: FloatArray, eta: float
) -> Tuple[FloatArray, FloatArray]:
    """
    The 2n + 1 symmetric sigma points of N(mean, P) at sqrt(eta) along the
    Cholesky columns, with weights 1 - n / eta for the center and 1 / (2 eta)
    for the others.
    """
    n = mean.shape[0]
    L = cholesky_lower(P, "separation covariance")
    offsets = np.sqrt(eta) * L.T
    points = np.vstack([mean, mean + offsets, mean - offsets])
    weights = np.full(2 * n + 1, 1.0 / (2.0 * eta))
    weights[0] = 1.0 - n / eta
    return points, weights


def project_to_ball(points: FloatArray, radius: float) -> FloatArray:
    """Move every point outside the ball of ``radius`` radially onto its surface."""
    norms = np.linalg.norm(points, axis=1)
    scale = np.ones_like(norms)
    outside = norms > radius
    scale[outside] = radius / norms[outside]
    return points * scale[:, None]


def projected_moments(
    points: FloatArray, weights: FloatArray, radius: float
) -> Tuple[FloatArray, FloatArray]:
    """Mean and raw second moment of the weighted points after projection."""
    projected = project_to_ball(points, radius)
    return weights @ projected, (projected * weights[:, None]).T @ projected


def truncated_moments(
    mean: FloatArray, P: FloatArray, radius: float, points_per_axis: int = 31
) -> Optional[Tuple[FloatArray, FloatArray]]:
    """
    Mean and raw second moment of N(mean, P) restricted to the ball of
    ``radius`` about the origin.

    The integral is a midpoint rule in whitened coordinates over the part of
    the ball's bounding box within TRUNCATION_SPAN standard deviations of the
    mean.

    :returns: None if the ball lies further out or no grid point falls
        inside it.
    """
    n = mean.shape[0]
    L = cholesky_lower(P, "separation covariance")
    L_inv = scipy.linalg.solve_triangular(L, np.eye(n), lower=True)
    center = -L_inv @ mean
    half = radius * np.linalg.norm(L_inv, axis=1)
    lo = np.maximum(center - half, -TRUNCATION_SPAN)
    hi = np.minimum(center + half, TRUNCATION_SPAN)
    if np.any(lo >= hi):
        return None

    cells = (np.arange(points_per_axis) + 0.5) / points_per_axis
    axes = [lo[i] + (hi[i] - lo[i]) * cells for i in range(n)]
    u = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    s = mean + u @ L.T
    inside = np.einsum("ij,ij->i", s, s) <= radius * radius
    if not np.any(inside):
        return None
    u, s = u[inside], s[inside]
    log_w = -0.5 * np.einsum("ij,ij->i", u, u)
    w = np.exp(log_w - log_w.max())
    w /= w.sum()
    return w @ s, (s * w[:, None]).T @ s


def constraint_update(
    g: GlobalEstimate, a: str, b: str, cp: ConstraintParams, dt_ab: float = 0.0
) -> GlobalEstimate:
    """
    Impose the maximum separation of the two feet of one agent.

    In the scaled difference coordinates D (x_a - x_b) the feasible set is a
    ball. The update is active when a sigma point of the prior separation
    lies outside it. The posterior moments of the separation are then those
    of the prior truncated to the ball, or of the sigma points projected onto
    it (``cp.method``), and are propagated to the rest of the state.

    :param dt_ab: Time between the last steps of the two feet; the radius
        grows by ``v_max * |dt_ab|`` to cover the asynchrony.
    :raises DegenerateCovarianceError: If the separation covariance cannot be
        factored.
    """
    tr = PairTransform.between(g.ids, a, b, cp.scaling)
    z, Pz = tr.forward(g.mean, g.P)
    radius = cp.radius(dt_ab)
    points, weights = sigma_points(z[:3], Pz[:3, :3], cp.eta)
    if np.all(np.linalg.norm(points, axis=1) <= radius):
        return g

    moments = None
    if cp.method is ConstraintMethod.TRUNCATION:
        moments = truncated_moments(z[:3], Pz[:3, :3], radius, cp.grid_points)
        if moments is None:
            logger.debug("ball is far in the prior tail, projecting sigma points")
    if moments is None:
        moments = projected_moments(points, weights, radius)
    m, C = moments
    z_post, Pz_post = marginal_condition(z, Pz, 3, m, C)
    mean, P = tr.inverse(z_post, Pz_post)
    logger.debug(
        "separation of %s and %s constrained: %.3f -> %.3f",
        a,
        b,
        float(np.linalg.norm(z[:3])),
        float(np.linalg.norm(m)),
    )
    return g.set_moments(mean, P)
