"""Quasi-Weierstrass decomposition of forced descriptor systems.

For ``k >= k*`` the four subspaces of ``F^k`` split the state.  With ``X``,
``Y`` spanning ``range(F^k)``, ``range(F'^k)`` and ``V``, ``W`` spanning
``ker(F^k)``, ``ker(F'^k)``::

    z1 = Y' x:   z1' = A_tilde z1 + B1_tilde u          (slow, standard)
    z2 = W' x:   N_tilde z2' = z2 + B2_tilde u          (fast, N_tilde nilpotent)
    x = X (Y'X)^{-1} z1 + V (W'V)^{-1} z2
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from descred.errors import (
    BasisMismatchError,
    ComputationError,
    DimensionError,
    NoFastPartError,
    NoInputError,
    PureSystemError,
    SingularError,
)
from descred.linalg import as_matrix, ctr, inverse, left_inverse, norm2, power_bases
from descred.model import matrix_index, shifted as make_shifted
from descred.reduction import check_basis


@dataclass(frozen=True)
class FourBases:
    X: np.ndarray
    Y: np.ndarray
    V: np.ndarray
    W: np.ndarray
    k: int


@dataclass(frozen=True)
class SlowSubsystem:
    F_tilde: np.ndarray
    G1_tilde: np.ndarray
    A_tilde: Optional[np.ndarray] = None
    B1_tilde: Optional[np.ndarray] = None


@dataclass(frozen=True)
class FastSubsystem:
    N: np.ndarray
    N_tilde: np.ndarray
    B2_tilde: np.ndarray


@dataclass(frozen=True)
class QuasiWeierstrass:
    A_tilde: np.ndarray
    B1_tilde: np.ndarray
    N_tilde: np.ndarray
    B2_tilde: np.ndarray
    lift1: np.ndarray
    lift2: np.ndarray
    proj1: np.ndarray
    proj2: np.ndarray
    k_nilpotent: int
    lam: complex

    @property
    def n(self):
        return self.lift1.shape[0]

    @property
    def r(self):
        return self.A_tilde.shape[0]

    def transition_residual(self):
        """``|| [proj1; proj2] [lift1 lift2] - I ||``."""
        P = np.vstack([self.proj1, self.proj2])
        L = np.hstack([self.lift1, self.lift2])
        return norm2(P @ L - np.eye(self.n))


def nilpotency_residual(N, k):
    """``||N^k|| / max(1, ||N||^k)``; zero for empty `N`."""
    if N.size == 0:
        return 0.0
    return norm2(np.linalg.matrix_power(N, k)) / max(1.0, norm2(N) ** k)


def four_bases(F, k=None, tol=None):
    """Orthonormal ``X, Y, V, W`` from a single SVD of ``F^k``.

    ``X = U1``, ``Y = V1``, ``V = V2`` (kernel of ``F^k``) and ``W = U2``
    (kernel of ``F'^k``).  `k` defaults to the index of `F`.
    """
    F = as_matrix(F, "F")
    k_star = matrix_index(F, tol)
    k = max(k_star, 1) if k is None else int(k)
    if k < k_star:
        raise ValueError(f"k = {k} is below the index {k_star}")
    b = power_bases(F, k, tol)
    if b.rank == 0:
        raise PureSystemError()
    if b.rank == F.shape[0]:
        raise NoFastPartError("F is nonsingular (E nonsingular): there is no fast subsystem")
    return FourBases(X=b.range_basis, Y=b.corange_basis, V=b.kernel_basis, W=b.cokernel_basis, k=k)


def validate_bases(F, X, Y, V, W, k=None, tol=None):
    """Check user bases against :func:`four_bases` and return them as :class:`FourBases`."""
    ref = four_bases(F, k, tol)
    return FourBases(
        X=check_basis(X, ref.X, "X", tol),
        Y=check_basis(Y, ref.Y, "Y", tol),
        V=check_basis(V, ref.V, "V", tol),
        W=check_basis(W, ref.W, "W", tol),
        k=ref.k,
    )


def slow_subsystem(shifted, bases):
    """``F_tilde = Y'FY^+'``, ``G1_tilde = Y'G``, and the standard form when ``F_tilde`` is invertible."""
    if shifted.G is None:
        raise NoInputError("slow subsystem needs an input matrix B")
    Y = bases.Y
    Yh = ctr(Y)
    F_tilde = Yh @ shifted.F @ ctr(left_inverse(Y))
    G1 = Yh @ shifted.G
    try:
        Fi = inverse(F_tilde, "Y'FY^+'")
    except SingularError:
        return SlowSubsystem(F_tilde, G1)
    r = F_tilde.shape[0]
    return SlowSubsystem(F_tilde, G1, A_tilde=Fi + shifted.lam * np.eye(r), B1_tilde=Fi @ G1)


def fast_subsystem(shifted, bases):
    """``N_tilde = (I + lam N)^{-1} N`` and ``B2_tilde = (I + lam N)^{-1} W'G`` with ``N = W'FW^+'``."""
    if shifted.G is None:
        raise NoInputError("fast subsystem needs an input matrix B")
    W = bases.W
    if W.shape[1] == 0:
        raise NoFastPartError("E is nonsingular: there is no fast subsystem")
    Wh = ctr(W)
    N = Wh @ shifted.F @ ctr(left_inverse(W))
    q = N.shape[0]
    R = np.eye(q) + shifted.lam * N
    N_tilde = np.linalg.solve(R, N)
    B2 = np.linalg.solve(R, Wh @ shifted.G)
    res = nilpotency_residual(N_tilde, bases.k)
    if res > 1e-10:
        raise ComputationError(f"fast matrix is not nilpotent to tolerance (||N^k|| ratio {res:.2e})")
    return FastSubsystem(N=N, N_tilde=N_tilde, B2_tilde=B2)


def qw_decompose(sys, lam=None, k=None, tol=None, bases=None):
    """Quasi-Weierstrass form of a regular, non-pure system with singular `E`.

    Parameters
    ----------
    sys
        :class:`~descred.model.DescriptorSystem`; a missing `B` is read as
        zero inputs.
    lam
        Shift; chosen automatically when ``None``.
    k
        Power used for the subspaces; defaults to the index.
    bases
        Optional ``(X, Y, V, W)`` overriding the orthonormal SVD bases.
        Each is validated against the corresponding subspace.
    """
    sh = make_shifted(sys, lam, tol)
    if sh.G is None:
        sh = type(sh)(lam=sh.lam, F=sh.F, G=np.zeros((sys.n, 0), dtype=np.complex128), source=sys)
    if bases is None:
        fb = four_bases(sh.F, k, tol)
    elif isinstance(bases, FourBases):
        fb = validate_bases(sh.F, bases.X, bases.Y, bases.V, bases.W, k if k is not None else bases.k, tol)
    else:
        fb = validate_bases(sh.F, *bases, k=k, tol=tol)
    slow = slow_subsystem(sh, fb)
    if slow.A_tilde is None:
        raise ComputationError("slow subsystem matrix is singular although k >= k*")
    fast = fast_subsystem(sh, fb)
    X, Y, V, W = fb.X, fb.Y, fb.V, fb.W
    try:
        lift1 = X @ inverse(ctr(Y) @ X, "Y'X")
        lift2 = V @ inverse(ctr(W) @ V, "W'V")
    except SingularError as exc:
        raise BasisMismatchError(str(exc)) from exc
    return QuasiWeierstrass(
        A_tilde=slow.A_tilde,
        B1_tilde=slow.B1_tilde,
        N_tilde=fast.N_tilde,
        B2_tilde=fast.B2_tilde,
        lift1=lift1,
        lift2=lift2,
        proj1=ctr(Y),
        proj2=ctr(W),
        k_nilpotent=fb.k,
        lam=sh.lam,
    )


def qw_reconstruct(qw, z1, z2):
    """``x = lift1 z1 + lift2 z2``."""
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.asarray(z2, dtype=np.complex128)
    if z1.shape[0] != qw.lift1.shape[1] or z2.shape[0] != qw.lift2.shape[1]:
        raise DimensionError(
            f"expected z1 of length {qw.lift1.shape[1]} and z2 of length {qw.lift2.shape[1]}"
        )
    return qw.lift1 @ z1 + qw.lift2 @ z2
