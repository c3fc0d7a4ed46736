"""Descriptor systems ``E x' = A x + B u``: regularity, shift, index, consistency space."""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from descred.errors import DimensionError, NotRegularError
from descred.linalg import (
    _tol,
    as_matrix,
    compressed_powers,
    sigma_min,
    solve,
)


@dataclass(frozen=True)
class DescriptorSystem:
    """Linear time-invariant descriptor system ``E x' = A x + B u``.

    `B` is optional; unforced systems have ``m == 0``.
    """

    E: np.ndarray
    A: np.ndarray
    B: Optional[np.ndarray] = None

    def __post_init__(self):
        E = as_matrix(self.E, "E")
        A = as_matrix(self.A, "A")
        if E.shape[0] != E.shape[1] or E.shape[0] < 1:
            raise DimensionError(f"E must be square and nonempty, got {E.shape}")
        if A.shape != E.shape:
            raise DimensionError(f"A has shape {A.shape}, E has {E.shape}")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "A", A)
        if self.B is not None:
            B = as_matrix(self.B, "B")
            if B.shape[0] != E.shape[0]:
                raise DimensionError(f"B has {B.shape[0]} rows, expected {E.shape[0]}")
            object.__setattr__(self, "B", B)

    @property
    def n(self):
        return self.E.shape[0]

    @property
    def m(self):
        return 0 if self.B is None else self.B.shape[1]

    def input_matrix(self):
        """`B`, or an ``n x 0`` matrix for unforced systems."""
        if self.B is None:
            return np.zeros((self.n, 0), dtype=np.complex128)
        return self.B


@dataclass(frozen=True)
class ShiftedSystem:
    """``F = (A - lam E)^{-1} E`` and ``G = (A - lam E)^{-1} B`` for a shift `lam`."""

    lam: complex
    F: np.ndarray
    G: Optional[np.ndarray]
    source: DescriptorSystem

    @property
    def n(self):
        return self.F.shape[0]


@dataclass(frozen=True)
class IndexReport:
    k_star: int
    rank_sequence: List[int]
    consistency_dim: int
    is_pure: bool
    is_regular: bool
    lambda_used: complex
    cond_estimate: float = field(default=float("nan"), compare=False)


def lambda_candidates(E_list, A_list):
    """Zero, then ``n + 1`` points on a circle of radius ``1 + ||E||_F / (1 + ||A||_F)``."""
    n = E_list[0].shape[0]
    rho = max(1.0 + np.linalg.norm(E) / (1.0 + np.linalg.norm(A)) for E, A in zip(E_list, A_list))
    ring = [complex(rho * np.exp(2j * np.pi * j / (n + 1))) for j in range(n + 1)]
    return [0j] + ring


def _nonsingular(M, tol):
    s = np.linalg.svd(M, compute_uv=False)
    return s[0] > 0 and s[-1] > _tol(tol).threshold(s[0], M.shape)


def select_lambda(E_list, A_list, tol=None):
    """Common shift for one or several pencils.

    ``0`` is returned when every ``A`` is nonsingular.  Otherwise the
    candidate that maximizes the worst smallest singular value of
    ``A_i - lam E_i`` is chosen among those leaving every pencil nonsingular.
    """
    if all(_nonsingular(A, tol) for A in A_list):
        return 0j
    best, best_score = None, -1.0
    for lam in lambda_candidates(E_list, A_list)[1:]:
        mats = [A - lam * E for E, A in zip(E_list, A_list)]
        if not all(_nonsingular(M, tol) for M in mats):
            continue
        score = min(sigma_min(M) for M in mats)
        if score > best_score:
            best, best_score = lam, score
    if best is None:
        raise NotRegularError("pencil is not regular: det(sE - A) vanishes at every test point")
    return best


def check_regularity(sys, tol=None):
    """Return a shift `lam` with ``A - lam E`` nonsingular, or raise :class:`NotRegularError`.

    ``det(sE - A)`` has degree at most ``n``, so a regular pencil cannot vanish
    at all ``n + 1`` distinct ring points.
    """
    return select_lambda([sys.E], [sys.A], tol)


def shift(sys, lam, tol=None):
    lam = complex(lam)
    M = sys.A - lam * sys.E
    F = solve(M, sys.E, tol)
    G = None if sys.B is None else solve(M, sys.B, tol)
    return ShiftedSystem(lam=lam, F=F, G=G, source=sys)


def shifted(sys, lam=None, tol=None):
    """Shift with `lam`, choosing one by :func:`check_regularity` when absent."""
    if lam is None:
        lam = check_regularity(sys, tol)
    return shift(sys, lam, tol)


def rank_sequence(F, tol=None):
    """Ranks of ``F^0, F^1, ...`` up to one step past the index."""
    n = as_matrix(F).shape[0]
    return [Q.shape[1] for Q, _ in compressed_powers(F, n + 1, tol, stop_at_index=True)]


def matrix_index(F, tol=None):
    """Smallest ``k`` with ``rank(F^{k+1}) == rank(F^k)``; zero for nonsingular `F`."""
    return len(rank_sequence(F, tol)) - 2


def analyze(sys, tol=None, lam=None):
    """Regularity, shift, index and consistency dimension of a descriptor system."""
    sh = shifted(sys, lam, tol)
    ranks = rank_sequence(sh.F, tol)
    k_star = len(ranks) - 2
    pencil = sys.A - sh.lam * sys.E
    s = np.linalg.svd(pencil, compute_uv=False)
    return IndexReport(
        k_star=k_star,
        rank_sequence=ranks,
        consistency_dim=ranks[k_star],
        is_pure=ranks[k_star] == 0,
        is_regular=True,
        lambda_used=sh.lam,
        cond_estimate=float(s[0] / s[-1]),
    )


def consistency_basis(F, tol=None):
    """Orthonormal basis of ``range(F^{k*})``; ``n x 0`` when `F` is nilpotent."""
    n = as_matrix(F).shape[0]
    seq = compressed_powers(F, n + 1, tol, stop_at_index=True)
    return seq[-2][0]


def consistency_space(sys, tol=None, lam=None):
    """Orthonormal basis of the consistency space of ``(E, A)``."""
    return consistency_basis(shifted(sys, lam, tol).F, tol)
