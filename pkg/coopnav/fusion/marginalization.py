"""
Propagation of a refined belief about part of a Gaussian state to the rest of
it.

The state z is split into a leading block z1 and the remainder z2. Given new
first and second moments of z1 (from sampling, projection or any other
non-Gaussian treatment), z2 keeps its prior conditional distribution given z1:

    z2 | z1 ~ N(U z1 + V, P2 - U P12)
    U = P12^T P1^-1
    V = z2_hat - U z1_hat

and the moments of the joint follow by marginalizing over the new belief of z1.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from coopnav.linalg import solve_spd, symmetrize
from coopnav.validation import FloatArray, InvalidInputError


def marginal_condition(
    mean_z: FloatArray,
    P_z: FloatArray,
    z1_dim: int,
    cond_mean_z1: FloatArray,
    cond_second_moment_z1: FloatArray,
) -> Tuple[FloatArray, FloatArray]:
    """
    :param mean_z: Prior mean of z.
    :param P_z: Prior covariance of z.
    :param z1_dim: Length of the leading block z1.
    :param cond_mean_z1: New mean m of z1.
    :param cond_second_moment_z1: New raw second moment C = E[z1 z1^T].
    :returns: The posterior mean and covariance of z.
    :raises DegenerateCovarianceError: If the prior covariance of z1 is
        ill-conditioned.
    """
    n = mean_z.shape[0]
    k = z1_dim
    if not 0 < k <= n:
        raise InvalidInputError(f"z1_dim '{k}' must be in [1, {n}]")
    m = np.asarray(cond_mean_z1, dtype=float)
    C = symmetrize(np.asarray(cond_second_moment_z1, dtype=float))
    if k == n:
        return m.copy(), symmetrize(C - np.outer(m, m))

    z1 = mean_z[:k]
    P1 = P_z[:k, :k]
    P12 = P_z[:k, k:]
    P2 = P_z[k:, k:]

    U = solve_spd(symmetrize(P1), P12, "prior covariance of z1").T
    # z2 is taken relative to its prior mean; the shift is added back at the end
    V = -U @ z1
    z2_post = V + U @ m

    Z = U @ np.outer(m, V) + np.outer(V, m) @ U.T
    P1_post = C - np.outer(m, m)
    P12_post = np.outer(m, V) + C @ U.T - np.outer(m, z2_post)
    P2_post = (
        P2 - U @ P12 + np.outer(V, V) + Z + U @ C @ U.T - np.outer(z2_post, z2_post)
    )

    mean = np.empty(n)
    mean[:k] = m
    mean[k:] = mean_z[k:] + z2_post
    P = np.empty((n, n))
    P[:k, :k] = P1_post
    P[:k, k:] = P12_post
    P[k:, :k] = P12_post.T
    P[k:, k:] = P2_post
    return mean, symmetrize(P)
