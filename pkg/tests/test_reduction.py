import numpy as np
import pytest

from conftest import F1
from descred.errors import BasisMismatchError, PureSystemError, ZeroMatrixError
from descred.linalg import ctr, left_inverse, max_principal_angle, norm2, power_bases
from descred.model import DescriptorSystem, consistency_basis, matrix_index, shift, shifted
from descred.oracle import check_unforced_reduction, power_tolerance, random_regular_system
from descred.reduction import (
    explicit_standard_formulas,
    full_order_standard,
    full_rank_decomposition,
    reduce_via_corange,
    reduce_via_range,
    reduced_index,
    to_standard,
)

X_K1 = np.array([[1.0, 1.0], [0.0, -2.0], [1.0, -1.0]])
Y_K1 = np.array([[1.0, 0.0], [1.0, 1.0], [-1.0, 0.0]])
X_K2 = np.array([[0.0], [1.0], [1.0]])
Y_K2 = np.array([[0.0], [1.0], [0.0]])


def sorted_eigs(M):
    ev = np.linalg.eigvals(M)
    return ev[np.lexsort((ev.imag, ev.real))]


def test_full_rank_decomposition_examples():
    d = full_rank_decomposition(np.eye(3))
    assert np.allclose(d.X @ ctr(d.Y), np.eye(3))
    F2 = F1 @ F1
    d = full_rank_decomposition(F2)
    assert d.X.shape == (3, 1)
    assert max_principal_angle(d.X, X_K2) < 1e-12
    assert max_principal_angle(d.Y, Y_K2) < 1e-12
    assert norm2(d.X @ ctr(d.Y) - F2) <= 1e-12 * norm2(F2)
    with pytest.raises(ZeroMatrixError):
        full_rank_decomposition(np.zeros((2, 2)))


def test_range_reduction_examples(ex1):
    sh = shift(ex1, 0)
    red = reduce_via_range(sh, 1, X_K1)
    assert np.allclose(red.F_tilde, [[0, 2], [0, -2]], atol=1e-10)
    assert red.index == 1
    red = reduce_via_range(sh, 2, X_K2)
    assert np.allclose(red.F_tilde, [[-2]], atol=1e-10)
    assert red.index == 0
    # z = X^+ x is the average of the last two coordinates
    assert np.allclose(red.proj, [[0.0, 0.5, 0.5]], atol=1e-15)


def test_range_reduction_nonsingular_e():
    A = np.array([[1.0, 2.0], [0.0, 3.0]])
    sh = shift(DescriptorSystem(np.eye(2), A), 0)
    red = reduce_via_range(sh, 1, np.eye(2))
    assert np.allclose(red.F_tilde, sh.F)
    assert red.index == 0


def test_corange_reduction_examples(ex1):
    sh = shift(ex1, 0)
    red = reduce_via_corange(sh, 1, Y_K1)
    assert np.allclose(red.F_tilde, [[0, 0], [0, -2]], atol=1e-10)
    assert red.index == 1
    red = reduce_via_corange(sh, 2, Y_K2)
    assert np.allclose(red.F_tilde, [[-2]], atol=1e-10)
    x = np.array([0.3, -1.7, 2.9])
    assert np.allclose(red.proj @ x, [x[1]])
    A = np.array([[1.0, 2.0], [0.0, 3.0]])
    sh = shift(DescriptorSystem(np.eye(2), A), 0)
    assert np.allclose(reduce_via_corange(sh, 1, np.eye(2)).F_tilde, sh.F)


def test_corange_lift_stays_in_consistency_space(ex1):
    sh = shift(ex1, 0)
    C = consistency_basis(sh.F)
    for k, Y in ((1, Y_K1), (2, Y_K2), (2, None), (3, None)):
        red = reduce_via_corange(sh, k, Y)
        assert norm2(red.lift - C @ ctr(C) @ red.lift) < 1e-14
        x = C @ np.array([1.3])
        assert np.allclose(red.lift @ (red.proj @ x), x)


def test_proj_lift_identity(rng):
    for _ in range(30):
        sys, known = random_regular_system(rng, 7, int(rng.integers(1, 4)), complex_=True)
        sh = shifted(sys)
        for k in range(1, known.index + 2):
            red = reduce_via_range(sh, k)
            r = red.F_tilde.shape[0]
            assert norm2(red.proj @ red.lift - np.eye(r)) <= 1e-10
            if k >= known.index:
                red = reduce_via_corange(sh, k)
                assert norm2(red.proj @ red.lift - np.eye(r)) <= 1e-10


def test_wrong_basis_rejected(ex1):
    sh = shift(ex1, 0)
    with pytest.raises(BasisMismatchError):
        reduce_via_range(sh, 2, [[1.0], [0.0], [0.0]])
    with pytest.raises(BasisMismatchError):
        reduce_via_corange(sh, 2, X_K2)


def test_pure_and_bad_power_rejected(ex1):
    pure = shift(DescriptorSystem(np.diag([1.0], 1), np.eye(2)), 0)
    with pytest.raises(PureSystemError, match="pure descriptor system: only the zero solution"):
        reduce_via_range(pure, 2)
    with pytest.raises(PureSystemError):
        to_standard(pure)
    with pytest.raises(ValueError):
        reduce_via_range(shift(ex1, 0), 0)


def test_to_standard_examples(ex1):
    sh = shift(ex1, 0)
    std = to_standard(sh, "range", X_K2)
    assert np.allclose(std.A_tilde, [[-0.5]], atol=1e-12)
    std = to_standard(sh, "corange", Y_K2)
    assert np.allclose(std.A_tilde, [[-0.5]], atol=1e-12)
    assert np.allclose(std.proj, [[0.0, 1.0, 0.0]])
    assert np.allclose(std.lift, X_K2)
    a = np.array([-1.0, 2.0, 0.5])
    std = to_standard(shift(DescriptorSystem(np.eye(3), np.diag(a)), 0))
    assert np.allclose(sorted_eigs(std.A_tilde), np.sort(a))
    assert np.allclose(std.lift @ std.A_tilde @ std.proj, np.diag(a))


def test_explicit_formulas_examples():
    out = explicit_standard_formulas(F1, X_K2, Y_K2)
    assert np.allclose(out.A_tilde_range, [[-0.5]])
    assert np.allclose(out.A_tilde_corange, [[-0.5]])
    assert np.allclose(out.X_dagger @ X_K2, [[1.0]])
    Fn = np.array([[2.0, 1.0], [0.0, 4.0]])
    out = explicit_standard_formulas(Fn, np.eye(2), np.eye(2))
    assert np.allclose(out.A_tilde_range, np.linalg.inv(Fn))
    assert np.allclose(out.A_tilde_corange, np.linalg.inv(Fn))
    # below the index Y'X = [[0, 0], [0, -2]] is singular, so the closed forms do not apply
    with pytest.raises(BasisMismatchError):
        explicit_standard_formulas(F1, X_K1, Y_K1)
    with pytest.raises(BasisMismatchError):
        explicit_standard_formulas(F1, X_K2, np.array([[1.0], [0.0], [0.0]]))


def test_full_order_standard_examples(ex1):
    A_hat = full_order_standard(shift(ex1, 0))
    expected = np.zeros((3, 3))
    expected[1, 1] = expected[2, 1] = -0.5
    assert np.allclose(A_hat, expected, atol=1e-12)
    assert norm2((ex1.E @ A_hat - ex1.A) @ X_K2) < 1e-12
    A = np.array([[0.0, 1.0], [-2.0, -3.0]])
    assert np.allclose(full_order_standard(shift(DescriptorSystem(np.eye(2), A), 0.5)), A)


def test_full_order_standard_nonsingular_a(rng):
    for _ in range(20):
        sys, known = random_regular_system(rng, 6, int(rng.integers(1, 4)))
        sh = shift(sys, 0)
        b = power_bases(sh.F, known.index)
        X, Y = b.range_basis, b.corange_basis
        expected = X @ np.linalg.inv(ctr(Y) @ np.linalg.solve(sys.A, sys.E) @ X) @ ctr(Y)
        A_hat = full_order_standard(sh)
        assert norm2(A_hat - expected) <= 1e-8 * max(1.0, norm2(expected))
        assert norm2((sys.E @ A_hat - sys.A) @ X) <= 1e-8 * norm2(sys.A)


def test_range_commutation(rng):
    for _ in range(40):
        n = int(rng.integers(2, 9))
        sys, known = random_regular_system(rng, n, int(rng.integers(1, min(n, 4) + 1)), complex_=True)
        F = shifted(sys).F
        k = int(rng.integers(1, n + 1))
        if power_bases(F, k).rank == 0:
            continue
        red = reduce_via_range(shifted(sys), k)
        X, Ft = red.lift, red.F_tilde
        for l in range(n + 1):
            Fl = np.linalg.matrix_power(F, l)
            # above the roundoff floor of the explicit power
            floor = power_tolerance(F, l).value
            assert norm2(Fl @ X - X @ np.linalg.matrix_power(Ft, l)) <= 1e-8 * norm2(Fl) + floor


def test_index_law(rng):
    for _ in range(40):
        n = int(rng.integers(2, 9))
        index = int(rng.integers(1, min(n, 4) + 1))
        sys, known = random_regular_system(rng, n, index)
        if known.n_slow == 0:
            continue
        sh = shifted(sys)
        for k in range(1, index + 2):
            for red in (reduce_via_range(sh, k), reduce_via_corange(sh, k)):
                assert red.index == max(index - k, 0)
                assert reduced_index(red, sh.F) == red.index


def test_basis_invariance(rng):
    for _ in range(30):
        sys, known = random_regular_system(rng, 6, int(rng.integers(1, 4)), complex_=True)
        sh = shifted(sys)
        k = int(rng.integers(1, known.index + 2))
        red1 = reduce_via_range(sh, k)
        r = red1.lift.shape[1]
        T = rng.standard_normal((r, r)) + 3 * np.eye(r)
        red2 = reduce_via_range(sh, k, red1.lift @ T)
        assert np.allclose(sorted_eigs(red1.F_tilde), sorted_eigs(red2.F_tilde), atol=1e-7)


def test_any_left_inverse_gives_same_reduction(rng):
    for _ in range(20):
        sys, known = random_regular_system(rng, 6, int(rng.integers(1, 4)))
        sh = shifted(sys)
        red = reduce_via_range(sh, known.index)
        X = red.lift
        Y = power_bases(sh.F, known.index).corange_basis
        oblique = np.linalg.solve(ctr(Y) @ X, ctr(Y))
        assert norm2(oblique @ sh.F @ X - red.F_tilde) <= 1e-9 * norm2(sh.F)


def test_rank_one_step_identity(rng):
    # (X, Y) a full rank decomposition of F: X^+ F X = Y'X
    for _ in range(20):
        sys, _ = random_regular_system(rng, 6, int(rng.integers(1, 4)), complex_=True)
        F = shifted(sys).F
        d = full_rank_decomposition(F)
        assert norm2(left_inverse(d.X) @ F @ d.X - ctr(d.Y) @ d.X) <= 1e-9 * norm2(F)


def test_y_f_x_nonsingular(rng):
    for _ in range(30):
        sys, known = random_regular_system(rng, 7, int(rng.integers(1, 4)))
        F = shifted(sys).F
        for k in (known.index, known.index + 1):
            b = power_bases(F, k)
            for l in range(4):
                M = ctr(b.corange_basis) @ np.linalg.matrix_power(F, l) @ b.range_basis
                s = np.linalg.svd(M, compute_uv=False)
                assert s[-1] > 1e-12 * max(1.0, s[0])


def test_standard_system_trajectories(rng):
    for _ in range(30):
        sys, known = random_regular_system(rng, 7, int(rng.integers(1, 4)), complex_=True)
        sh = shifted(sys)
        for side in ("range", "corange"):
            rep = check_unforced_reduction(sys, to_standard(sh, side), trials=2, seed=int(rng.integers(1 << 30)))
            assert rep.within(1e-7)
            assert rep.identity_residual <= 1e-9 * (norm2(sys.A) + norm2(sys.E))
