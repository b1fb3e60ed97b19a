"""Channel layout of the split variable w = T f for the two regularisers.

Both PSTAIC and the weighted ICTV baseline split into the same four blocks:

    data   1 channel    h * g, fitted to the measurement
    pair   2n channels  penalised through ||A z||, A = [I, -I] / sqrt(2)
    group  k channels   penalised through the pixel-wise Euclidean norm
    box    2 channels   copies of g and v, constrained to the box C

The pair block carries the weight alpha_s and the group block 1 - alpha_s.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linops

__all__ = ["SplitModel", "pstaic_model", "pictv_model"]


@dataclass(frozen=True, eq=False)
class SplitModel:
    name: str
    bank: linops.FilterBank
    n_pair: int
    n_group: int

    def __post_init__(self):
        expected = 1 + 2 * self.n_pair + self.n_group + 2
        if len(self.bank) != expected:
            raise ValueError(f"bank has {len(self.bank)} rows, layout needs {expected}")

    @property
    def data(self):
        return slice(0, 1)

    @property
    def pair(self):
        return slice(1, 1 + 2 * self.n_pair)

    @property
    def group(self):
        start = 1 + 2 * self.n_pair
        return slice(start, start + self.n_group)

    @property
    def box(self):
        start = 1 + 2 * self.n_pair + self.n_group
        return slice(start, start + 2)

    @property
    def n_channels(self):
        return len(self.bank)

    def forward(self, f):
        return linops.apply_bank(f, self.bank)

    def adjoint(self, s):
        return linops.apply_bank_adjoint(s, self.bank)

    def pair_norms(self, stack):
        """sqrt(2) ||A z|| per pixel, i.e. the norm of z_j - z_{j+n}."""
        z = stack[self.pair]
        d = z[: self.n_pair] - z[self.n_pair :]
        return np.sqrt(np.sum(d * d, axis=0))

    def group_norms(self, stack):
        z = stack[self.group]
        return np.sqrt(np.sum(z * z, axis=0))

    def regularizer_values(self, stack):
        """Unweighted (spatial, temporal) regulariser values of a bank output."""
        return float(np.sum(self.pair_norms(stack))), float(np.sum(self.group_norms(stack)))


def pstaic_model(h):
    """T = [h; T_s; T_t; e] with the A_s coupling on T_s (22 channels)."""
    return SplitModel("pstaic", linops.pstaic_bank(h), n_pair=5, n_group=9)


def pictv_model(h, kappa1=1.0, kappa2=1.0):
    """Weighted ICTV on 3D gradients: kappa1 weights space in grad(g - v), kappa2 weights time in grad v (12 channels)."""
    return SplitModel("pictv", linops.pictv_bank(h, kappa1, kappa2), n_pair=3, n_group=3)
