"""Dense complex matrix kernel.

Every routine here works on ``numpy`` arrays of dtype ``complex128``.  Rank
decisions always go through a :class:`RankTolerance` so that the threshold
separating "zero" from "nonzero" singular values is explicit.

The prime of the underlying theory is the conjugate transpose; ``ctr`` is
used for it throughout the package.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as spla

from descred.errors import ComputationError, DimensionError, RankError, SingularError

EPS = np.finfo(float).eps


def as_matrix(a, name="matrix"):
    """Return `a` as a finite 2-D ``complex128`` array.

    One-dimensional input is treated as a column.
    """
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    elif m.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def ctr(m):
    """Conjugate transpose."""
    return m.conj().T


@dataclass(frozen=True)
class RankTolerance:
    """Threshold used for numerical rank decisions.

    Parameters
    ----------
    mode
        ``'relative'``: singular value ``s`` counts iff ``s > value * s_max``.
        ``'absolute'``: ``s`` counts iff ``s > value``.
    value
        Nonnegative threshold.  ``None`` (relative mode only) means
        ``eps * max(rows, cols)``, the same default as ``numpy.linalg.matrix_rank``.
    """

    mode: str = "relative"
    value: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("relative", "absolute"):
            raise ValueError(f"unknown tolerance mode {self.mode!r}")
        if self.value is not None and not self.value >= 0:
            raise ValueError("tolerance value must be nonnegative")
        if self.mode == "absolute" and self.value is None:
            raise ValueError("absolute tolerance needs an explicit value")

    def threshold(self, s_max, shape):
        if self.mode == "absolute":
            return float(self.value)
        value = EPS * max(shape) if self.value is None else self.value
        return float(value * s_max)

    def to_dict(self):
        return {"mode": self.mode, "value": self.value}


DEFAULT_TOL = RankTolerance()


def _tol(tol):
    if tol is None:
        return DEFAULT_TOL
    if isinstance(tol, RankTolerance):
        return tol
    return RankTolerance("relative", float(tol))


@dataclass(frozen=True)
class SvdBases:
    """Orthonormal bases for the four fundamental subspaces of a matrix.

    ``range_basis`` = U1, ``corange_basis`` = V1 (range of the conjugate
    transpose), ``kernel_basis`` = V2, ``cokernel_basis`` = U2.
    """

    range_basis: np.ndarray
    corange_basis: np.ndarray
    kernel_basis: np.ndarray
    cokernel_basis: np.ndarray
    rank: int
    singular_values: np.ndarray


def _svd(m, full_matrices=True):
    try:
        return np.linalg.svd(m, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(f"SVD did not converge: {exc}") from exc


def norm2(m):
    """Spectral norm; zero for empty matrices."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def svd_bases(M, tol=None, scale=None):
    """Split a matrix into range, corange, kernel and cokernel bases.

    Parameters
    ----------
    M
        Nonempty matrix.
    tol
        :class:`RankTolerance` (or a float, read as a relative value).
    scale
        Reference magnitude for a relative tolerance.  Defaults to the
        largest singular value of `M`; callers that compress a product
        pass the norm of the original factor instead.
    """
    M = as_matrix(M)
    if M.size == 0:
        raise DimensionError("svd_bases needs a nonempty matrix")
    tol = _tol(tol)
    u, s, vh = _svd(M, full_matrices=True)
    s_max = s[0] if s.size else 0.0
    thr = tol.threshold(s_max if scale is None else scale, M.shape)
    r = int(np.count_nonzero(s > thr))
    v = ctr(vh)
    return SvdBases(
        range_basis=u[:, :r],
        corange_basis=v[:, :r],
        kernel_basis=v[:, r:],
        cokernel_basis=u[:, r:],
        rank=r,
        singular_values=s,
    )


def rank(M, tol=None):
    return svd_bases(M, tol).rank


def left_inverse(X, tol=None):
    """Moore-Penrose left inverse ``(X'X)^{-1} X'`` of a full-column-rank `X`.

    Evaluated from the SVD rather than the normal equations.  For a matrix
    with orthonormal columns this is the conjugate transpose.
    """
    X = as_matrix(X, "X")
    n, r = X.shape
    if r == 0:
        return np.zeros((0, n), dtype=np.complex128)
    if r > n:
        raise RankError(f"a {n}x{r} matrix cannot have full column rank")
    b = svd_bases(X, tol)
    if b.rank < r:
        raise RankError(f"matrix has rank {b.rank} < {r} columns")
    u1 = b.range_basis
    v1 = b.corange_basis
    return (v1 / b.singular_values[:r]) @ ctr(u1)


def solve(M, RHS, tol=None):
    """Solve ``M Z = RHS`` for square, numerically nonsingular `M`."""
    M = as_matrix(M, "M")
    RHS = as_matrix(RHS, "RHS")
    n = M.shape[0]
    if M.shape[1] != n:
        raise DimensionError(f"solve needs a square matrix, got {M.shape}")
    if RHS.shape[0] != n:
        raise DimensionError(f"right-hand side has {RHS.shape[0]} rows, expected {n}")
    s = _svd(M, full_matrices=False)[1]
    cond = s[0] / s[-1] if s[-1] > 0 else float("inf")
    if s[-1] <= _tol(tol).threshold(s[0], M.shape) or s[0] == 0:
        raise SingularError("matrix is singular at the working tolerance", cond)
    if RHS.shape[1] == 0:
        return np.zeros((n, 0), dtype=np.complex128)
    return spla.solve(M, RHS)


def sigma_min(M):
    M = as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(_svd(M, full_matrices=False)[1][-1])


def inverse(M, what="matrix"):
    """Inverse of a small square matrix with the package's nonsingularity rule.

    Nonsingular means ``sigma_min > max(eps * n * sigma_max, 1e-12 * sigma_max)``.
    """
    M = as_matrix(M, what)
    n = M.shape[0]
    if n == 0:
        return M.copy()
    s = _svd(M, full_matrices=False)[1]
    cond = s[0] / s[-1] if s[-1] > 0 else float("inf")
    if s[0] == 0 or s[-1] <= max(EPS * n, 1e-12) * s[0]:
        raise SingularError(f"{what} is singular", cond)
    return spla.inv(M)


def matrix_exponential(M, t=1.0):
    """``exp(M t)`` by scaling and squaring with Pade approximants."""
    M = as_matrix(M, "M")
    if M.shape[0] != M.shape[1]:
        raise DimensionError("matrix_exponential needs a square matrix")
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = spla.expm(M * t)
        except (FloatingPointError, OverflowError) as exc:
            raise ComputationError(f"matrix exponential overflowed: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise ComputationError("matrix exponential overflowed")
    return np.asarray(out, dtype=np.complex128)


def orth_complement(Q):
    """Orthonormal basis of the orthogonal complement of ``range(Q)``.

    `Q` must have orthonormal columns.
    """
    n, r = Q.shape
    if r == 0:
        return np.eye(n, dtype=np.complex128)
    u = _svd(Q, full_matrices=True)[0]
    return u[:, r:]


def max_principal_angle(A, B):
    """Largest principal angle (radians) between ``range(A)`` and ``range(B)``.

    Inputs are taken to have full column rank.  Subspaces of different
    dimension are reported as ``pi / 2`` apart.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[0] != B.shape[0]:
        raise DimensionError("subspaces live in spaces of different dimension")
    if A.shape[1] != B.shape[1]:
        return float(np.pi / 2)
    if A.shape[1] == 0:
        return 0.0
    return float(np.max(spla.subspace_angles(A, B)))


def compressed_powers(F, k_max, tol=None, stop_at_index=False):
    """Factor the powers of `F` without forming them explicitly.

    Keeps ``F^k = Q_k M_k`` where ``Q_k`` has orthonormal columns spanning
    ``range(F^k)``.  Each step takes an SVD of ``F Q_{k-1}`` and truncates it
    at the tolerance, scaled by ``||F||``, so rank decisions never see the
    spread of singular values of an explicit power.

    Returns
    -------
    list of (Q_k, M_k) for k = 0, 1, ..., k_max.  With ``stop_at_index`` the
    list ends one step after the rank stops dropping.
    """
    F = as_matrix(F, "F")
    n = F.shape[0]
    tol = _tol(tol)
    scale = norm2(F)
    thr = tol.threshold(scale, F.shape)
    Q = np.eye(n, dtype=np.complex128)
    M = np.eye(n, dtype=np.complex128)
    out = [(Q, M)]
    for _ in range(k_max):
        r_prev = Q.shape[1]
        if r_prev == 0:
            Q, M = np.zeros((n, 0), dtype=np.complex128), np.zeros((0, n), dtype=np.complex128)
        else:
            u, s, vh = _svd(F @ Q, full_matrices=False)
            r = int(np.count_nonzero(s > thr)) if scale > 0 else 0
            Q = u[:, :r]
            M = (s[:r, None] * vh[:r]) @ M
        out.append((Q, M))
        if stop_at_index and Q.shape[1] == r_prev:
            break
    return out


def power_bases(F, k, tol=None):
    """:class:`SvdBases` of ``F^k`` computed from compressed products."""
    F = as_matrix(F, "F")
    n = F.shape[0]
    Q, M = compressed_powers(F, k, tol)[-1]
    r = Q.shape[1]
    if r == 0:
        eye = np.eye(n, dtype=np.complex128)
        empty = np.zeros((n, 0), dtype=np.complex128)
        return SvdBases(empty, empty, eye, eye, 0, np.zeros(n))
    u, s, vh = _svd(M, full_matrices=True)
    v = ctr(vh)
    X = Q @ u
    return SvdBases(
        range_basis=X,
        corange_basis=v[:, :r],
        kernel_basis=v[:, r:],
        cokernel_basis=orth_complement(Q),
        rank=r,
        singular_values=np.concatenate([s[:r], np.zeros(n - r)]),
    )
