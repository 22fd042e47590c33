"""
Small numerical helpers shared by the filters: symmetrization, the diagonal
jitter policy, conditioning checks and guarded decompositions.
"""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np
import scipy.linalg

from coopnav.validation import FloatArray

logger = logging.getLogger(__name__)

DECOMPOSITION_JITTER = 1e-10
INNOVATION_JITTER = 1e-12
CONDITION_LIMIT = 1e12


class DegenerateCovarianceError(Exception):
    pass


def symmetrize(P: FloatArray) -> FloatArray:
    return 0.5 * (P + P.T)


def add_jitter(P: FloatArray, jitter: float = DECOMPOSITION_JITTER) -> FloatArray:
    return P + jitter * np.eye(P.shape[0])


def check_condition(
    P: FloatArray, what: str, limit: float = CONDITION_LIMIT
) -> None:
    """
    :raises DegenerateCovarianceError: If the 2-norm condition number of P
        exceeds ``limit``.
    """
    if P.size == 0:
        return
    cond = np.linalg.cond(P)
    if not np.isfinite(cond) or cond > limit:
        raise DegenerateCovarianceError(
            f"{what} is ill-conditioned (condition number {cond:.3e} > {limit:.0e})"
        )


def solve_spd(A: FloatArray, B: FloatArray, what: str) -> FloatArray:
    """Solve A X = B for symmetric positive definite A."""
    check_condition(A, what)
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise DegenerateCovarianceError(f"{what} is not positive definite") from e
    return np.asarray(scipy.linalg.cho_solve(factor, B, check_finite=False))


def cholesky_lower(P: FloatArray, what: str) -> FloatArray:
    """
    Lower Cholesky factor of P after the jitter policy.

    :raises DegenerateCovarianceError: If the factorization fails after jitter.
    """
    try:
        return np.asarray(
            scipy.linalg.cholesky(add_jitter(symmetrize(P)), lower=True)
        )
    except np.linalg.LinAlgError:
        pass
    # one escalation, for covariances with tiny negative eigenvalues from rounding
    eigenvalues = np.linalg.eigvalsh(symmetrize(P))
    shift = DECOMPOSITION_JITTER - min(float(eigenvalues.min()), 0.0)
    logger.debug("escalating cholesky jitter of %s to %.3e", what, shift)
    try:
        return np.asarray(
            scipy.linalg.cholesky(add_jitter(symmetrize(P), shift), lower=True)
        )
    except np.linalg.LinAlgError as e:
        raise DegenerateCovarianceError(f"cholesky of {what} failed") from e


def eigen_sqrt(P: FloatArray, what: str) -> Tuple[FloatArray, FloatArray]:
    """
    Eigen-decomposition P = Q diag(lam) Q^T after jitter; returns (Q, sqrt(lam))
    with negative rounding residue clipped to zero.
    """
    try:
        lam, Q = scipy.linalg.eigh(add_jitter(symmetrize(P)))
    except (np.linalg.LinAlgError, ValueError) as e:
        raise DegenerateCovarianceError(f"eigen-decomposition of {what} failed") from e
    return np.asarray(Q), np.sqrt(np.clip(lam, 0.0, None))


def min_eigenvalue(P: FloatArray) -> float:
    if P.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(symmetrize(P)).min())


def project_psd(P: FloatArray) -> FloatArray:
    """The nearest positive semidefinite matrix in the Frobenius norm."""
    lam, Q = np.linalg.eigh(symmetrize(P))
    return symmetrize((Q * np.clip(lam, 0.0, None)) @ Q.T)


def skew(v: FloatArray) -> FloatArray:
    """Cross-product matrix: skew(a) @ b == cross(a, b)."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def planar_rotation(angle: float) -> FloatArray:
    """Rotation about the vertical axis."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
