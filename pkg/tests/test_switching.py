import numpy as np
import pytest

from conftest import A1, E1
from descred.errors import CommonRangeError, DimensionError
from descred.linalg import max_principal_angle, norm2
from descred.model import DescriptorSystem, shift
from descred.oracle import check_switched, random_regular_system
from descred.reduction import reduce_via_range
from descred.switching import (
    MismatchReport,
    SwitchedDescriptorSystem,
    common_range_check,
    reduce_switching,
)

X_C = np.array([[0.0], [1.0], [1.0]])


def test_identical_modes(ex1):
    sws = SwitchedDescriptorSystem([ex1, ex1])
    X = common_range_check(sws, [2, 2])
    assert max_principal_angle(X, X_C) < 1e-12
    red = reduce_switching(sws, [2, 2])
    for F in red.F_tilde_list:
        assert np.allclose(F, [[-2]], atol=1e-10)


def test_scaled_mode_shares_range(ex1):
    sws = SwitchedDescriptorSystem([ex1, DescriptorSystem(E1, 2 * A1)])
    assert sws.common_lambda() == 0
    assert not isinstance(common_range_check(sws, [2, 2]), MismatchReport)
    red = reduce_switching(sws, [2, 2])
    F1t, F2t = red.F_tilde_list
    assert norm2(F2t - F1t / 2) <= 1e-10


def test_mismatch_reported(ex1):
    sws = SwitchedDescriptorSystem([ex1, DescriptorSystem(np.eye(3), A1)])
    rep = common_range_check(sws, [2, 2])
    assert isinstance(rep, MismatchReport)
    assert rep.pair == (0, 1) and rep.dims == (1, 3)
    assert rep.angle == pytest.approx(np.pi / 2)
    with pytest.raises(CommonRangeError):
        reduce_switching(sws, [2, 2])


def test_single_mode_matches_range_reduction(ex1):
    red = reduce_switching(SwitchedDescriptorSystem([ex1]), [1])
    ref = reduce_via_range(shift(ex1, 0), 1)
    assert max_principal_angle(red.X, ref.lift) < 1e-12
    assert np.allclose(red.F_tilde_list[0], ref.F_tilde)


def test_argument_checks(ex1):
    sws = SwitchedDescriptorSystem([ex1, ex1])
    with pytest.raises(DimensionError):
        common_range_check(sws, [2])
    with pytest.raises(ValueError):
        common_range_check(sws, [0, 2])
    with pytest.raises(DimensionError):
        SwitchedDescriptorSystem([ex1, DescriptorSystem(np.eye(2), np.eye(2))])
    with pytest.raises(DimensionError):
        SwitchedDescriptorSystem([])


def test_common_shift_for_singular_a():
    E = np.diag([1.0, 0.0])
    modes = [DescriptorSystem(E, np.diag([0.0, 1.0])), DescriptorSystem(E, np.diag([0.0, 3.0]))]
    lam = SwitchedDescriptorSystem(modes).common_lambda()
    assert lam != 0
    for m in modes:
        assert abs(np.linalg.det(m.A - lam * m.E)) > 1e-3
    assert SwitchedDescriptorSystem(modes, lam=2.0).common_lambda() == 2.0


def related_modes(rng, count):
    """Modes (E, A + s E): each is a shift of the first, so all ranges coincide."""
    sys, known = random_regular_system(rng, 6, int(rng.integers(1, 4)), complex_=True)
    modes = [sys] + [DescriptorSystem(sys.E, sys.A + rng.uniform(-0.5, 0.5) * sys.E) for _ in range(count - 1)]
    return SwitchedDescriptorSystem(modes, lam=0.0), known


def test_mode_commutation_and_trajectories(rng):
    for _ in range(20):
        try:
            sws, known = related_modes(rng, 3)
            red = reduce_switching(sws, [known.index] * 3)
        except ValueError:
            continue  # a drawn shift left some A_i singular
        for mode, Ft in zip(sws.modes, red.F_tilde_list):
            F = shift(mode, 0.0).F
            assert norm2(F @ red.X - red.X @ Ft) <= 1e-9 * norm2(F)
        schedule = [(0, 0.3), (1, 0.2), (2, 0.4), (0, 0.1)]
        rep = check_switched(sws, red, schedule, rng.standard_normal(red.X.shape[1]))
        assert rep.max_residual <= 1e-7
