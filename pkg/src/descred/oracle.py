"""Independent checks of reductions against the original descriptor system.

Trajectories are built in closed form (matrix exponentials for standard
parts, a finite Neumann sum for nilpotent parts) and their derivatives are
taken analytically, so a residual ``E x' - A x - B u`` that is not at
roundoff level points at a wrong reduction and never at a time stepper.
"""
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from descred.errors import DimensionError, NilpotencyError, ReducedIndexError
from descred.linalg import (
    EPS,
    RankTolerance,
    as_matrix,
    ctr,
    left_inverse,
    matrix_exponential,
    norm2,
    sigma_min,
    svd_bases,
)
from descred.model import DescriptorSystem
from descred.reduction import ReducedSystem, StandardSystem, full_rank_decomposition

MAX_DEGREE = 4


def default_seed():
    """Oracle RNG seed; ``DESCRED_SEED`` overrides the default of 0."""
    return int(os.environ.get("DESCRED_SEED", "0"))


@dataclass(frozen=True)
class PolynomialInput:
    """``u(t) = sum_j c_j t^j`` with coefficient vectors stored as rows."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.complex128)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        if c.ndim != 2 or c.shape[0] == 0:
            raise DimensionError("coefficients must be a nonempty (degree + 1) x m array")
        if c.shape[0] - 1 > MAX_DEGREE:
            raise ValueError(f"polynomial inputs are limited to degree {MAX_DEGREE}")
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def zero(cls, m):
        return cls(np.zeros((1, m)))

    @property
    def degree(self):
        return self.coefficients.shape[0] - 1

    @property
    def m(self):
        return self.coefficients.shape[1]

    def __call__(self, t):
        powers = np.array([t**j for j in range(self.degree + 1)])
        return powers @ self.coefficients

    def derivative(self, order=1):
        c = self.coefficients
        for _ in range(order):
            if c.shape[0] == 1:
                c = np.zeros_like(c)
            else:
                c = c[1:] * np.arange(1, c.shape[0])[:, None]
        return PolynomialInput(c)


@dataclass(frozen=True)
class ResidualReport:
    """Residual norms at sample points, with the state norm at each sample."""

    max_residual: float
    grid: List[float]
    per_sample: List[float]
    state_norms: List[float] = field(default_factory=list)
    identity_residual: Optional[float] = None

    @classmethod
    def from_samples(cls, grid, residuals, norms, identity_residual=None):
        residuals = [float(r) for r in residuals]
        return cls(
            max_residual=max(residuals) if residuals else 0.0,
            grid=[float(t) for t in grid],
            per_sample=residuals,
            state_norms=[float(v) for v in norms],
            identity_residual=identity_residual,
        )

    @property
    def max_state_norm(self):
        return max(self.state_norms) if self.state_norms else 0.0

    def within(self, rtol, atol=0.0):
        """True when every sample satisfies ``residual <= atol + rtol * ||x||``."""
        return all(r <= atol + rtol * s for r, s in zip(self.per_sample, self.state_norms))

    def to_dict(self):
        return {
            "max_residual": self.max_residual,
            "max_state_norm": self.max_state_norm,
            "grid": self.grid,
            "per_sample": self.per_sample,
            "state_norms": self.state_norms,
            "identity_residual": self.identity_residual,
        }


def _check_nilpotent(N):
    q = N.shape[0]
    if q == 0:
        return
    ratio = norm2(np.linalg.matrix_power(N, q)) / max(1.0, norm2(N) ** q)
    if ratio > 1e-10:
        raise NilpotencyError(f"N_tilde is not nilpotent (||N^q|| ratio {ratio:.2e})")


def _fast(N, B2, u, t, order, check):
    N = as_matrix(N, "N_tilde")
    B2 = as_matrix(B2, "B2_tilde") if np.size(B2) else np.zeros((N.shape[0], u.m), np.complex128)
    if check:
        _check_nilpotent(N)
    q = N.shape[0]
    z = np.zeros(q, dtype=np.complex128)
    term = np.eye(q, dtype=np.complex128)
    for i in range(q):
        z -= term @ (B2 @ u.derivative(i + order)(t))
        term = term @ N
    return z


def solve_fast(N_tilde, B2_tilde, u, t, check=True):
    """Smooth solution of ``N z' = z + B2 u``: ``z = -sum_i N^i B2 u^(i)``.

    `N_tilde` must be nilpotent; with ``check=False`` the sum is truncated at
    the dimension regardless (used for corrupted matrices in negative controls).
    """
    return _fast(N_tilde, B2_tilde, u, t, 0, check)


def fast_derivative(N_tilde, B2_tilde, u, t, check=True):
    return _fast(N_tilde, B2_tilde, u, t, 1, check)


def _augmented(A, B1, u):
    # xi_j = t^j / j! with xi_j' = xi_{j-1}; u = sum_j c_j j! xi_j
    r = A.shape[0]
    d = u.degree
    C = (u.coefficients * np.array([math.factorial(j) for j in range(d + 1)])[:, None]).T
    M = np.zeros((r + d + 1, r + d + 1), dtype=np.complex128)
    M[:r, :r] = A
    if B1.size:
        M[:r, r:] = B1 @ C
    for j in range(1, d + 1):
        M[r + j, r + j - 1] = 1.0
    return M


def solve_slow(A_tilde, B1_tilde, z1_0, u, t):
    """Variation-of-constants solution of ``z' = A z + B1 u`` for polynomial `u`.

    The input is embedded as the state of a shift system so that one matrix
    exponential of the augmented generator gives the exact solution.
    """
    A = as_matrix(A_tilde, "A_tilde")
    r = A.shape[0]
    B1 = as_matrix(B1_tilde, "B1_tilde") if np.size(B1_tilde) else np.zeros((r, u.m), np.complex128)
    z0 = np.asarray(z1_0, dtype=np.complex128).reshape(-1)
    if z0.shape[0] != r:
        raise DimensionError(f"initial state has length {z0.shape[0]}, expected {r}")
    M = _augmented(A, B1, u)
    w0 = np.zeros(M.shape[0], dtype=np.complex128)
    w0[:r] = z0
    w0[r] = 1.0
    return (matrix_exponential(M, t) @ w0)[:r]


def slow_derivative(A_tilde, B1_tilde, z1, u, t):
    A = as_matrix(A_tilde)
    if not np.size(B1_tilde):
        return A @ z1
    return A @ z1 + as_matrix(B1_tilde) @ u(t)


def check_residual(sys, qw, z1_0, u, grid, check_nilpotent=False):
    """Residual of the reconstructed quasi-Weierstrass trajectory in ``E x' = A x + B u``."""
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    B = sys.input_matrix()
    if u.m != B.shape[1]:
        raise DimensionError(f"input has {u.m} channels, system has {B.shape[1]}")
    res, norms = [], []
    for t in grid:
        z1 = solve_slow(qw.A_tilde, qw.B1_tilde, z1_0, u, t)
        dz1 = slow_derivative(qw.A_tilde, qw.B1_tilde, z1, u, t)
        z2 = solve_fast(qw.N_tilde, qw.B2_tilde, u, t, check=check_nilpotent)
        dz2 = fast_derivative(qw.N_tilde, qw.B2_tilde, u, t, check=check_nilpotent)
        x = qw.lift1 @ z1 + qw.lift2 @ z2
        dx = qw.lift1 @ dz1 + qw.lift2 @ dz2
        res.append(np.linalg.norm(sys.E @ dx - sys.A @ x - B @ u(t)))
        norms.append(np.linalg.norm(x))
    return ResidualReport.from_samples(grid, res, norms, identity_residual=qw_identity_residual(sys, qw))


def qw_identity_residual(sys, qw):
    """Largest of ``||E L1 A~ - A L1||``, ``||E L2 - A L2 N~||``, ``||E L1 B1~ + A L2 B2~ - B||``.

    Substituting ``x = L1 z1 + L2 z2`` and both subsystems into
    ``E x' - A x - B u`` leaves exactly these three coefficient matrices
    (of ``z1``, ``z2'`` and ``u``), so their vanishing is sufficient for a
    zero residual under every input.  Unlike the trajectory residual it
    also sees ``N~`` when the input is constant.
    """
    E, A, B = sys.E, sys.A, sys.input_matrix()
    L1, L2 = qw.lift1, qw.lift2
    parts = [norm2(E @ L1 @ qw.A_tilde - A @ L1), norm2(E @ L2 - A @ L2 @ qw.N_tilde)]
    if B.shape[1]:
        B1 = qw.B1_tilde if np.size(qw.B1_tilde) else np.zeros((L1.shape[1], B.shape[1]))
        B2 = qw.B2_tilde if np.size(qw.B2_tilde) else np.zeros((L2.shape[1], B.shape[1]))
        parts.append(norm2(E @ L1 @ B1 + A @ L2 @ B2 - B))
    return max(parts)


def _standard_matrix(red):
    if isinstance(red, StandardSystem):
        return red.A_tilde
    if isinstance(red, ReducedSystem):
        if red.index != 0:
            raise ReducedIndexError(
                f"reduced system has index {red.index}; only index-zero reductions have closed-form trajectories"
            )
        return red.A_tilde()
    raise TypeError(f"cannot check {type(red).__name__}")


def _random_vector(rng, r):
    return rng.standard_normal(r) + 1j * rng.standard_normal(r)


def check_unforced_reduction(sys, red, trials=3, grid=(0.0, 0.25, 0.5, 1.0), seed=None):
    """Residual of ``x(t) = lift exp(A_tilde t) z0`` for random ``z0``.

    Also reports ``||E lift A_tilde - A lift||``, whose vanishing is
    sufficient for a zero residual.
    """
    A_t = _standard_matrix(red)
    L = red.lift
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    times, res, norms = [], [], []
    for _ in range(trials):
        z0 = _random_vector(rng, A_t.shape[0])
        for t in grid:
            z = matrix_exponential(A_t, t) @ z0
            x = L @ z
            dx = L @ (A_t @ z)
            times.append(t)
            res.append(np.linalg.norm(sys.E @ dx - sys.A @ x))
            norms.append(np.linalg.norm(x))
    identity = norm2(sys.E @ L @ A_t - sys.A @ L)
    return ResidualReport.from_samples(times, res, norms, identity_residual=identity)


def discrete_map(red):
    """One-step map of the reduced difference equation ``F z(t+1) = (I + lam F) z(t)``."""
    if isinstance(red, ReducedSystem):
        if red.index != 0:
            raise ReducedIndexError("discrete recursion needs an index-zero reduced system")
        F = red.F_tilde
        return np.linalg.solve(F, np.eye(F.shape[0]) + red.lam * F)
    return _standard_matrix(red)


def check_discrete(sys, red, steps=20, z0=None, seed=None):
    """Residual ``||E x(t+1) - A x(t)||`` along ``z(t+1) = A_d z(t)``, ``x = lift z``."""
    A_d = discrete_map(red)
    if z0 is None:
        rng = np.random.default_rng(default_seed() if seed is None else seed)
        z0 = _random_vector(rng, A_d.shape[0])
    z = np.asarray(z0, dtype=np.complex128).reshape(-1)
    res, norms = [], []
    x = red.lift @ z
    for _ in range(steps):
        z = A_d @ z
        x_next = red.lift @ z
        res.append(np.linalg.norm(sys.E @ x_next - sys.A @ x))
        norms.append(np.linalg.norm(x))
        x = x_next
    return ResidualReport.from_samples(list(range(steps)), res, norms)


def check_reduction_identities(F, red):
    """Commutation residual of an arbitrary-index reduction, relative to ``||F||``.

    Range side: ``F lift = lift F_tilde``.  Corange side: ``proj F = F_tilde proj``.
    """
    scale = max(norm2(F), 1e-300)
    if red.side == "range":
        return norm2(F @ red.lift - red.lift @ red.F_tilde) / scale
    return norm2(red.proj @ F - red.F_tilde @ red.proj) / scale


def check_switched(sws, red, schedule, z0):
    """Residual of a piecewise trajectory of a switched reduction.

    `schedule` is a list of ``(mode, duration)``; on each segment
    ``z(t) = exp(A_i t) z_start`` with ``A_i = F_tilde_i^{-1} + lam I``, and
    the residual ``||E_i x' - A_i x||`` is sampled at the segment start,
    middle and end.
    """
    z = np.asarray(z0, dtype=np.complex128).reshape(-1)
    X = red.X
    r = X.shape[1]
    times, res, norms = [], [], []
    t0 = 0.0
    for mode, dur in schedule:
        A_i = np.linalg.inv(red.F_tilde_list[mode]) + red.lam * np.eye(r)
        E, A = sws.modes[mode].E, sws.modes[mode].A
        for s in (0.0, dur / 2, dur):
            zs = matrix_exponential(A_i, s) @ z
            x = X @ zs
            times.append(t0 + s)
            res.append(np.linalg.norm(E @ (X @ (A_i @ zs)) - A @ x))
            norms.append(np.linalg.norm(x))
        z = matrix_exponential(A_i, dur) @ z
        t0 += dur
    return ResidualReport.from_samples(times, res, norms)


# Brute-force identities on explicit powers -------------------------------


@dataclass
class IdentityReport:
    """Scaled deviations of the subspace identities plus smallest singular values."""

    deviations: Dict[str, float] = field(default_factory=dict)
    min_singular: Dict[str, float] = field(default_factory=dict)

    @property
    def worst(self):
        return max(self.deviations.values(), default=0.0)

    def passed(self, rtol=1e-8, sv_floor=1e-12):
        return self.worst <= rtol and all(s > sv_floor for s in self.min_singular.values())


def power_tolerance(F, k):
    """Absolute rank threshold for an explicitly formed ``F^k``.

    Forming ``F^k`` by repeated products leaves an error of order
    ``k n eps ||F||^k``, which can exceed ``eps n sigma_max(F^k)`` by many
    orders of magnitude when ``F`` has a large nilpotent part.
    """
    n = F.shape[0]
    return RankTolerance("absolute", 10.0 * n * max(k, 1) * EPS * norm2(F) ** k)


def explicit_index(F, tol=None):
    """Index from SVD ranks of explicit powers ``F^0, F^1, ...``."""
    F = as_matrix(F)
    n = F.shape[0]
    ranks = [n]
    P = np.eye(n, dtype=np.complex128)
    for j in range(1, n + 2):
        P = P @ F
        t = power_tolerance(F, j) if tol is None else tol
        r = svd_bases(P, t).rank if norm2(P) > 0 else 0
        if r == ranks[-1]:
            break
        ranks.append(r)
    return len(ranks) - 1, ranks


def _rel(a, scale, floor=0.0):
    """``(||a|| - floor)_+ / scale``: relative excess over a roundoff floor."""
    return max(norm2(a) - floor, 0.0) / max(scale, 1e-300)


def brute_force_identities(F, k, tol=None):
    """Evaluate the range/kernel identities of ``F`` with explicit powers.

    Keys of ``deviations``: ``range_commute`` (``F^l X = X Ft^l``), ``reduced_power``
    (``F^{l+k} = X Ft^l Y'`` and ``X^+FX = Y'FY^+'``), ``corange_commute``
    (``Y'F^l = Ft^l Y'``), ``rank_one_step`` (``X^+FX = Y'X`` for a full
    rank decomposition of ``F``), ``kernel_commute`` (``F^l V = V N^l``,
    ``N^k = 0``), ``cokernel_commute`` (``W'F^l = N^l W'``, ``N^k = 0``),
    ``orthogonality`` (``W'F^k = 0``, ``X'W = 0``, ``Y'V = 0``) and
    ``block_inverse`` (inverse of ``[Y W]``).  ``min_singular`` holds the
    smallest singular values of ``Y'F^lX`` (l = 0..3) and ``V'W``, each
    relative to the norms of its factors.
    """
    F = as_matrix(F, "F")
    n = F.shape[0]
    k = int(k)
    k_star, _ = explicit_index(F, tol)
    nF = norm2(F)
    powers = [np.eye(n, dtype=np.complex128)]
    for _ in range(n + k + 1):
        powers.append(powers[-1] @ F)
    # residuals of explicit powers are measured above the roundoff floor of
    # F^l, so powers that vanish in exact arithmetic do not count as failures
    scales = [norm2(P) for P in powers]
    floors = [power_tolerance(F, l).value for l in range(len(powers))]
    Fk = powers[k]
    rep = IdentityReport()
    tol_k = power_tolerance(F, k) if tol is None else tol
    b = svd_bases(Fk, tol_k) if norm2(Fk) > 0 else None
    r = 0 if b is None else b.rank
    X = Y = None

    if r > 0:
        X, Y = b.range_basis, b.corange_basis
        Ft = left_inverse(X) @ F @ X
        rep.deviations["range_commute"] = max(
            _rel(powers[l] @ X - X @ np.linalg.matrix_power(Ft, l), scales[l], floors[l]) for l in range(n + 1)
        )
        frd = full_rank_decomposition(Fk, tol_k)
        Ftf = left_inverse(frd.X) @ F @ frd.X
        reduced_power = [
            _rel(powers[l + k] - frd.X @ np.linalg.matrix_power(Ftf, l) @ ctr(frd.Y), scales[l + k], floors[l + k])
            for l in range(n + 1)
        ]
        reduced_power.append(_rel(Ftf - ctr(frd.Y) @ F @ ctr(left_inverse(frd.Y)), nF))
        rep.deviations["reduced_power"] = max(reduced_power)
        FtY = ctr(Y) @ F @ ctr(left_inverse(Y))
        rep.deviations["corange_commute"] = max(
            _rel(ctr(Y) @ powers[l] - np.linalg.matrix_power(FtY, l) @ ctr(Y), scales[l], floors[l])
            for l in range(1, n + 1)
        )
        if k >= k_star:
            for l in range(4):
                rep.min_singular[f"Y'F^{l}X"] = sigma_min(ctr(Y) @ powers[l] @ X) / max(scales[l], floors[l])

    if nF > 0:
        f1 = full_rank_decomposition(F, tol)
        rep.deviations["rank_one_step"] = _rel(
            left_inverse(f1.X) @ F @ f1.X - ctr(f1.Y) @ f1.X, nF
        )

    if r < n:
        V = np.eye(n, dtype=np.complex128) if b is None else b.kernel_basis
        W = np.eye(n, dtype=np.complex128) if b is None else b.cokernel_basis
        N = left_inverse(V) @ F @ V
        NW = ctr(W) @ F @ ctr(left_inverse(W))
        kern = [_rel(powers[l] @ V - V @ np.linalg.matrix_power(N, l), scales[l], floors[l]) for l in range(1, n + 1)]
        kern.append(_rel(np.linalg.matrix_power(N, k), max(nF**k, 1.0)))
        rep.deviations["kernel_commute"] = max(kern)
        cok = [_rel(ctr(W) @ powers[l] - np.linalg.matrix_power(NW, l) @ ctr(W), scales[l], floors[l]) for l in range(1, n + 1)]
        cok.append(_rel(np.linalg.matrix_power(NW, k), max(nF**k, 1.0)))
        rep.deviations["cokernel_commute"] = max(cok)
        if r > 0:
            rep.deviations["orthogonality"] = max(
                _rel(ctr(W) @ Fk, scales[k], floors[k]), norm2(ctr(X) @ W), norm2(ctr(Y) @ V)
            )
            if k >= k_star:
                rep.min_singular["V'W"] = sigma_min(ctr(V) @ W)
                T = np.hstack([Y, W])
                Tinv = np.vstack(
                    [
                        np.linalg.solve(ctr(X) @ Y, ctr(X)),
                        np.linalg.solve(ctr(V) @ W, ctr(V)),
                    ]
                )
                rep.deviations["block_inverse"] = norm2(Tinv @ T - np.eye(n))
    return rep


# Random systems of known structure ----------------------------------------


@dataclass(frozen=True)
class KnownStructure:
    n_slow: int
    index: int
    block_sizes: tuple
    slow_eigenvalues: np.ndarray


def _well_conditioned(rng, n, cond, complex_):
    def unitary():
        Z = rng.standard_normal((n, n))
        if complex_:
            Z = Z + 1j * rng.standard_normal((n, n))
        q, r = np.linalg.qr(Z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    s = np.exp(rng.uniform(-0.5, 0.5, n) * np.log(cond))
    return unitary() @ np.diag(s) @ unitary()


def nilpotent_jordan(sizes):
    n = sum(sizes)
    N = np.zeros((n, n))
    pos = 0
    for s in sizes:
        for i in range(s - 1):
            N[pos + i, pos + i + 1] = 1.0
        pos += s
    return N


def random_regular_system(rng, n, index, n_slow=None, m=0, cond=4.0, complex_=False):
    """Random regular pencil in disguised Weierstrass form.

    Builds ``E0 = diag(I, N)``, ``A0 = diag(J, I)`` with ``N`` nilpotent of
    index `index` (Jordan blocks, the largest of size `index`) and ``J``
    having eigenvalues of modulus in [0.5, 2], then returns
    ``(P E0 Q, P A0 Q)`` for random `P`, `Q` of condition number at most
    `cond`.  ``index == 0`` gives ``E`` nonsingular; ``n_slow == 0`` a pure
    system.
    """
    if index < 0 or index > n:
        raise ValueError("index must lie in [0, n]")
    if n_slow is None:
        lo = 1 if index < n else 0
        n_slow = int(rng.integers(lo, n - index + 1)) if index > 0 else n
    n_fast = n - n_slow
    if index == 0 and n_fast:
        raise ValueError("index 0 leaves no room for a fast part")
    if index > 0 and n_fast < index:
        raise ValueError("fast part too small for the requested index")
    sizes = []
    if n_fast:
        sizes = [index]
        rest = n_fast - index
        while rest > 0:
            s = int(rng.integers(1, min(index, rest) + 1))
            sizes.append(s)
            rest -= s
    mags = rng.uniform(0.5, 2.0, n_slow)
    if complex_:
        eigs = mags * np.exp(1j * rng.uniform(0, 2 * np.pi, n_slow))
    else:
        eigs = mags * rng.choice([-1.0, 1.0], n_slow)
    S = _well_conditioned(rng, n_slow, 2.0, complex_) if n_slow else np.zeros((0, 0))
    J = S @ np.diag(eigs) @ np.linalg.inv(S) if n_slow else S
    E0 = np.zeros((n, n), dtype=np.complex128)
    A0 = np.zeros((n, n), dtype=np.complex128)
    E0[:n_slow, :n_slow] = np.eye(n_slow)
    A0[:n_slow, :n_slow] = J
    E0[n_slow:, n_slow:] = nilpotent_jordan(sizes)
    A0[n_slow:, n_slow:] = np.eye(n_fast)
    P = _well_conditioned(rng, n, cond, complex_)
    Q = _well_conditioned(rng, n, cond, complex_)
    B = None
    if m:
        B = rng.standard_normal((n, m))
        if complex_:
            B = B + 1j * rng.standard_normal((n, m))
    if not complex_:
        E, A = (P @ E0 @ Q).real, (P @ A0 @ Q).real
    else:
        E, A = P @ E0 @ Q, P @ A0 @ Q
    return DescriptorSystem(E, A, B), KnownStructure(n_slow, index, tuple(sizes), eigs)


def random_polynomial_input(rng, m, degree=2):
    return PolynomialInput(rng.standard_normal((degree + 1, m)))
