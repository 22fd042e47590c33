"""
State transformations that bring the (scaled) position difference of two feet
to the front of the joint state.

Writing x_a, x_b for the two positions, the transform first permutes them to
the front of the state and then mixes them with

    [[D, -D],
     [D,  D]]

so the leading block is D (x_a - x_b) and the next one D (x_a + x_b). Every
other coordinate is left alone. The inverse of the mixing block is
1/2 [[D^-1, D^-1], [-D^-1, D^-1]].
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from coopnav.fusion.estimate import (
    FOOT_DIM,
    ConstraintParams,
    GlobalEstimate,
    UnknownFootError,
)
from coopnav.linalg import symmetrize
from coopnav.validation import FloatArray, InvalidInputError


class TransformKind(Enum):
    GAMMA = "gamma"
    ONE = "one"


@dataclass(frozen=True, eq=False)
class PairTransform:
    """
    The transform as an index permutation plus a 6x6 leading block, so it can
    be applied without forming the m x m matrix.
    """

    dim: int
    order: np.ndarray
    lead: FloatArray
    lead_inv: FloatArray

    @classmethod
    def between(
        cls,
        ids: Sequence[str],
        a: str,
        b: str,
        scaling: Optional[FloatArray] = None,
        axes: Sequence[int] = (0, 1, 2),
    ) -> PairTransform:
        """
        :param ids: The foot identifiers of the joint state, in order.
        :param scaling: Diagonal of D; the identity when omitted.
        :param axes: Difference components placed first, in this order. The
            remaining difference components follow, then the sum block.
        :raises UnknownFootError: If a or b is not in ``ids``.
        """
        ids = list(ids)
        for foot in (a, b):
            if foot not in ids:
                raise UnknownFootError(f"foot '{foot}' is not tracked")
        if a == b:
            raise InvalidInputError(f"a and b must differ, both are '{a}'")
        axes = list(axes)
        if len(set(axes)) != len(axes) or not set(axes) <= {0, 1, 2} or not axes:
            raise InvalidInputError(f"axes {axes} must be distinct components of 0..2")

        dim = FOOT_DIM * len(ids)
        ia = FOOT_DIM * ids.index(a)
        ib = FOOT_DIM * ids.index(b)
        front = [ia, ia + 1, ia + 2, ib, ib + 1, ib + 2]
        rest = [i for i in range(dim) if i not in front]
        order = np.array(front + rest, dtype=int)

        d = np.ones(3) if scaling is None else np.asarray(scaling, dtype=float)
        if d.shape != (3,) or np.any(d <= 0):
            raise InvalidInputError("scaling must hold three positive entries")
        D = np.diag(d)
        D_inv = np.diag(1.0 / d)
        mix = np.block([[D, -D], [D, D]])
        mix_inv = 0.5 * np.block([[D_inv, D_inv], [-D_inv, D_inv]])

        lead_order = axes + [i for i in range(3) if i not in axes] + [3, 4, 5]
        perm = np.eye(6)[lead_order]
        return cls(
            dim=dim,
            order=order,
            lead=perm @ mix,
            lead_inv=mix_inv @ perm.T,
        )

    def forward(self, mean: FloatArray, P: FloatArray) -> Tuple[FloatArray, FloatArray]:
        z = mean[self.order].astype(float)
        Pz = P[np.ix_(self.order, self.order)].astype(float)
        z[:6] = self.lead @ z[:6]
        Pz[:6, :] = self.lead @ Pz[:6, :]
        Pz[:, :6] = Pz[:, :6] @ self.lead.T
        return z, Pz

    def inverse(self, z: FloatArray, Pz: FloatArray) -> Tuple[FloatArray, FloatArray]:
        x = np.array(z, dtype=float)
        Px = np.array(Pz, dtype=float)
        x[:6] = self.lead_inv @ x[:6]
        Px[:6, :] = self.lead_inv @ Px[:6, :]
        Px[:, :6] = Px[:, :6] @ self.lead_inv.T
        mean = np.empty(self.dim)
        P = np.empty((self.dim, self.dim))
        mean[self.order] = x
        P[np.ix_(self.order, self.order)] = Px
        return mean, symmetrize(P)

    def matrices(self) -> Tuple[FloatArray, FloatArray]:
        """The dense transform T and its inverse."""
        Pi = np.eye(self.dim)[self.order]
        block = np.eye(self.dim)
        block[:6, :6] = self.lead
        block_inv = np.eye(self.dim)
        block_inv[:6, :6] = self.lead_inv
        return block @ Pi, Pi.T @ block_inv


def build_transform(
    kind: Union[TransformKind, str],
    a: str,
    b: str,
    ids: Union[GlobalEstimate, Sequence[str]],
    params: Optional[ConstraintParams] = None,
    axes: Sequence[int] = (0, 1, 2),
) -> Tuple[FloatArray, FloatArray]:
    """
    Dense transform T and its inverse such that the leading entries of T x are
    D (x_a - x_b), with D from ``params`` for the gamma kind and D = I for the
    one kind.
    """
    kind = TransformKind(kind)
    if isinstance(ids, GlobalEstimate):
        ids = ids.ids
    scaling = None
    if kind is TransformKind.GAMMA:
        scaling = (params or ConstraintParams()).scaling
    return PairTransform.between(ids, a, b, scaling, axes).matrices()
