"""Analysis and reduction of linear descriptor systems ``E x' = A x + B u``."""
from descred.errors import *  # noqa: F401,F403
from descred.linalg import RankTolerance, SvdBases, left_inverse, power_bases, svd_bases
from descred.model import (
    DescriptorSystem,
    IndexReport,
    ShiftedSystem,
    analyze,
    consistency_space,
    matrix_index,
    rank_sequence,
    select_lambda,
    shift,
    shifted,
)
from descred.qw import QuasiWeierstrass, four_bases, qw_decompose, qw_reconstruct
from descred.reduction import (
    ReducedSystem,
    StandardSystem,
    full_order_standard,
    full_rank_decomposition,
    reduce_via_corange,
    reduce_via_range,
    explicit_standard_formulas,
    to_standard,
)
from descred.switching import SwitchedDescriptorSystem, SwitchedReduction, common_range_check, reduce_switching

__version__ = "0.1.0"
