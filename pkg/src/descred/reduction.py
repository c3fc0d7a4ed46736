"""Exact order and index reduction of unforced descriptor systems.

All reductions start from the shifted form ``F x' = (I + lam F) x`` with
``F = (A - lam E)^{-1} E``.  A basis of ``range(F^k)`` (range side) or of
``range(F'^k)`` (corange side) turns it into an equivalent system of
smaller state dimension whose index drops by ``k``.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from descred.errors import BasisMismatchError, PureSystemError, SingularError, ZeroMatrixError
from descred.linalg import (
    EPS,
    RankTolerance,
    _tol,
    as_matrix,
    ctr,
    inverse,
    left_inverse,
    max_principal_angle,
    norm2,
    power_bases,
    svd_bases,
)
from descred.model import consistency_basis, matrix_index

ANGLE_TOL = 1e-8


@dataclass(frozen=True)
class ReducedSystem:
    """Reduced system ``F_tilde z' = (I + lam F_tilde) z`` with ``x = lift z``, ``z = proj x``."""

    F_tilde: np.ndarray
    lam: complex
    lift: np.ndarray
    proj: np.ndarray
    k_used: int
    index: int
    side: str

    def A_tilde(self):
        """Standard-form matrix ``F_tilde^{-1} + lam I``; needs ``index == 0``."""
        r = self.F_tilde.shape[0]
        return inverse(self.F_tilde, "F_tilde") + self.lam * np.eye(r)


@dataclass(frozen=True)
class StandardSystem:
    """ODE ``z' = A_tilde z`` equivalent to the descriptor system through ``x = lift z``."""

    A_tilde: np.ndarray
    lift: np.ndarray
    proj: np.ndarray
    lam: complex = 0j
    side: str = "range"


@dataclass(frozen=True)
class FullRankDecomposition:
    X: np.ndarray
    Y: np.ndarray


@dataclass(frozen=True)
class ExplicitFormulas:
    X_dagger: np.ndarray
    Y_dagger: np.ndarray
    A_tilde_range: np.ndarray
    A_tilde_corange: np.ndarray


def source_tolerance(F, tol=None):
    """Absolute rank tolerance for matrices derived from `F`, such as ``F_tilde``.

    A reduced matrix carries roundoff of order ``eps ||F||``, not
    ``eps ||F_tilde||``, so its rank decisions are made on the scale of `F`:
    ``value * ||F||`` with the relative `value` of `tol` (default
    ``10 n eps``).  Absolute tolerances pass through unchanged.
    """
    F = as_matrix(F, "F")
    tol = _tol(tol)
    if tol.mode == "absolute":
        return tol
    value = 10 * F.shape[0] * EPS if tol.value is None else tol.value
    return RankTolerance("absolute", value * norm2(F))


def reduced_index(red, F, tol=None):
    """Index of ``red.F_tilde`` with rank decisions on the scale of the source `F`."""
    if red.F_tilde.size == 0:
        return 0
    return matrix_index(red.F_tilde, source_tolerance(F, tol))


def full_rank_decomposition(M, tol=None):
    """``M = X Y'`` with ``X = U1`` and ``Y = V1 Sigma`` from the SVD of `M`."""
    b = svd_bases(M, tol)
    if b.rank == 0:
        raise ZeroMatrixError("full rank decomposition of a zero matrix")
    s = b.singular_values[: b.rank]
    return FullRankDecomposition(X=b.range_basis, Y=b.corange_basis * s)


def check_basis(B, reference, what, tol=None):
    """Validate a user basis against an orthonormal reference basis.

    `B` must have full column rank and the same range as `reference`, up to
    a principal angle of ``1e-8``.
    """
    B = as_matrix(B, what)
    if B.shape[0] != reference.shape[0]:
        raise BasisMismatchError(f"{what} has {B.shape[0]} rows, expected {reference.shape[0]}")
    if B.shape[1] != reference.shape[1]:
        raise BasisMismatchError(
            f"{what} has {B.shape[1]} columns but the subspace has dimension {reference.shape[1]}"
        )
    if svd_bases(B, tol).rank < B.shape[1]:
        raise BasisMismatchError(f"{what} does not have full column rank")
    angle = max_principal_angle(B, reference)
    if angle > ANGLE_TOL:
        raise BasisMismatchError(f"{what} spans the wrong subspace (principal angle {angle:.3e})")
    return B


def _require_power(shifted, k, tol):
    if k < 1:
        raise ValueError("reduction power k must be at least 1")
    bases = power_bases(shifted.F, k, tol)
    if bases.rank == 0:
        raise PureSystemError(f"pure descriptor system: only the zero solution (F^{k} = 0)")
    return bases


def reduce_via_range(shifted, k, X=None, tol=None):
    """Reduce through a basis `X` of ``range(F^k)``: ``F_tilde = X^+ F X``, ``x = X z``."""
    bases = _require_power(shifted, k, tol)
    X = bases.range_basis if X is None else check_basis(X, bases.range_basis, "X", tol)
    Xd = left_inverse(X)
    F_tilde = Xd @ shifted.F @ X
    k_star = matrix_index(shifted.F, tol)
    return ReducedSystem(
        F_tilde=F_tilde,
        lam=shifted.lam,
        lift=X,
        proj=Xd,
        k_used=k,
        index=max(k_star - k, 0),
        side="range",
    )


def corange_lift(Y, C):
    """Map ``z = Y' x`` back to ``x`` for consistent states.

    `C` spans the consistency space.  ``Y'`` is injective on it, so
    ``C (Y' C)^+`` is the unique lift landing in the consistency space.
    For ``k >= k*`` this equals ``X (Y' X)^{-1}``.
    """
    return C @ np.linalg.pinv(ctr(Y) @ C)


def reduce_via_corange(shifted, k, Y=None, tol=None):
    """Reduce through a basis `Y` of ``range(F'^k)``: ``F_tilde = Y' F Y^+'``, ``z = Y' x``."""
    bases = _require_power(shifted, k, tol)
    Y = bases.corange_basis if Y is None else check_basis(Y, bases.corange_basis, "Y", tol)
    Yd = left_inverse(Y)
    F_tilde = ctr(Y) @ shifted.F @ ctr(Yd)
    k_star = matrix_index(shifted.F, tol)
    C = consistency_basis(shifted.F, tol)
    return ReducedSystem(
        F_tilde=F_tilde,
        lam=shifted.lam,
        lift=corange_lift(Y, C),
        proj=ctr(Y),
        k_used=k,
        index=max(k_star - k, 0),
        side="corange",
    )


def to_standard(shifted, side="range", basis=None, tol=None):
    """Equivalent standard system on the consistency space (``k = k*``).

    ``side='range'``: ``A_tilde = (X^+ F X)^{-1} + lam I``, ``x = X z``, ``z = X^+ x``.
    ``side='corange'``: ``A_tilde = (Y' F Y^+')^{-1} + lam I``, ``z = Y' x`` and
    ``x = X (Y'X)^{-1} z``.
    """
    if side not in ("range", "corange"):
        raise ValueError(f"side must be 'range' or 'corange', got {side!r}")
    k = max(matrix_index(shifted.F, tol), 1)
    if side == "range":
        red = reduce_via_range(shifted, k, basis, tol)
    else:
        red = reduce_via_corange(shifted, k, basis, tol)
    r = red.F_tilde.shape[0]
    A_tilde = inverse(red.F_tilde, "reduced F") + shifted.lam * np.eye(r)
    return StandardSystem(A_tilde=A_tilde, lift=red.lift, proj=red.proj, lam=shifted.lam, side=side)


def explicit_standard_formulas(F, X, Y, lam=0j):
    """Closed forms built from ``(Y'X)^{-1}`` when `X`, `Y` span ``range(F^k)``, ``range(F'^k)``, ``k >= k*``.

    Returns the left inverses ``X^+ = (Y'X)^{-1} Y'`` and
    ``Y^+ = (Y'X)^{-'} X'`` and the two standard-system matrices
    ``(Y'FX)^{-1} Y'X + lam I`` and ``Y'X (Y'FX)^{-1} + lam I``.
    """
    F, X, Y = as_matrix(F, "F"), as_matrix(X, "X"), as_matrix(Y, "Y")
    if X.shape != Y.shape:
        raise BasisMismatchError(f"X {X.shape} and Y {Y.shape} must have equal shape")
    YX = ctr(Y) @ X
    try:
        YX_inv = inverse(YX, "Y'X")
        YFX_inv = inverse(ctr(Y) @ F @ X, "Y'FX")
    except SingularError as exc:
        raise BasisMismatchError(f"{exc}; bases are wrong or k < k*") from exc
    r = X.shape[1]
    lam_i = complex(lam) * np.eye(r)
    return ExplicitFormulas(
        X_dagger=YX_inv @ ctr(Y),
        Y_dagger=ctr(YX_inv) @ ctr(X),
        A_tilde_range=YFX_inv @ YX + lam_i,
        A_tilde_corange=YX @ YFX_inv + lam_i,
    )


def full_order_standard(shifted, tol=None):
    """``A_hat = X (Y'FX)^{-1} Y' + lam X (Y'X)^{-1} Y'`` acting on the original state.

    Every consistent solution satisfies ``x' = A_hat x``.
    """
    k = max(matrix_index(shifted.F, tol), 1)
    bases = _require_power(shifted, k, tol)
    X, Y = bases.range_basis, bases.corange_basis
    Yh = ctr(Y)
    return X @ inverse(Yh @ shifted.F @ X, "Y'FX") @ Yh + shifted.lam * (
        X @ inverse(Yh @ X, "Y'X") @ Yh
    )
