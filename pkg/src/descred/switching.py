"""Joint reduction of switched descriptor systems ``E_s x' = A_s x``.

When every mode shares ``range(F_i^{k_i})`` for one common shift, a single
basis `X` of that range reduces all modes at once:
``F_tilde_i z' = (I + lam F_tilde_i) z`` with ``x = X z``.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from descred.errors import CommonRangeError, DimensionError
from descred.linalg import left_inverse, max_principal_angle, power_bases
from descred.model import DescriptorSystem, select_lambda, shift
from descred.reduction import ANGLE_TOL


@dataclass(frozen=True)
class SwitchedDescriptorSystem:
    modes: Sequence[DescriptorSystem]
    lam: Optional[complex] = None

    def __post_init__(self):
        if not self.modes:
            raise DimensionError("a switched system needs at least one mode")
        n = self.modes[0].n
        if any(mode.n != n for mode in self.modes):
            raise DimensionError("all modes must have the same state dimension")
        object.__setattr__(self, "modes", tuple(self.modes))

    @property
    def n(self):
        return self.modes[0].n

    def common_lambda(self, tol=None):
        if self.lam is not None:
            return complex(self.lam)
        return select_lambda([m.E for m in self.modes], [m.A for m in self.modes], tol)


@dataclass(frozen=True)
class MismatchReport:
    pair: tuple
    angle: float
    dims: tuple

    def __str__(self):
        i, j = self.pair
        return (
            f"modes {i} and {j} do not share a range: dimensions {self.dims[0]} and "
            f"{self.dims[1]}, largest principal angle {self.angle:.3e} rad"
        )


@dataclass(frozen=True)
class SwitchedReduction:
    X: np.ndarray
    F_tilde_list: List[np.ndarray]
    k_list: List[int]
    lam: complex


def _mode_shifts(sws, tol):
    lam = sws.common_lambda(tol)
    return lam, [shift(mode, lam, tol) for mode in sws.modes]


def common_range_check(sws, k_list, tol=None, angle_tol=ANGLE_TOL):
    """Basis of the shared range of ``F_i^{k_i}``, or a :class:`MismatchReport`.

    Returns the first mode's orthonormal basis when every pair of ranges is
    within `angle_tol` radians.
    """
    k_list = [int(k) for k in k_list]
    if len(k_list) != len(sws.modes):
        raise DimensionError(f"{len(k_list)} powers given for {len(sws.modes)} modes")
    if any(k < 1 for k in k_list):
        raise ValueError("every power k_i must be at least 1")
    _, shifts = _mode_shifts(sws, tol)
    ranges = [power_bases(sh.F, k, tol).range_basis for sh, k in zip(shifts, k_list)]
    worst = None
    for i in range(len(ranges)):
        for j in range(i + 1, len(ranges)):
            angle = max_principal_angle(ranges[i], ranges[j])
            if angle > angle_tol and (worst is None or angle > worst.angle):
                worst = MismatchReport((i, j), angle, (ranges[i].shape[1], ranges[j].shape[1]))
    return ranges[0] if worst is None else worst


def reduce_switching(sws, k_list, tol=None, angle_tol=ANGLE_TOL):
    """``F_tilde_i = X^+ F_i X`` for a basis `X` of the common range."""
    X = common_range_check(sws, k_list, tol, angle_tol)
    if isinstance(X, MismatchReport):
        raise CommonRangeError(X)
    lam, shifts = _mode_shifts(sws, tol)
    Xd = left_inverse(X)
    return SwitchedReduction(
        X=X,
        F_tilde_list=[Xd @ sh.F @ X for sh in shifts],
        k_list=[int(k) for k in k_list],
        lam=lam,
    )
