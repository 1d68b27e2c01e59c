"""Crossed products by the shift on subshifts of finite type, and their KMS states.

The subpackages build up in layers: :mod:`shift` (symbols and cylinder
functions), :mod:`endo` (shift endomorphism, transfer operator, expectations),
:mod:`tower` (matrix models of the projection tower), :mod:`star` (the term
calculus for ``a S^n S*^m b``) and :mod:`kms` (Ruelle matrices and KMS
states).  :mod:`suites` collects the executable property checks run by the
command line tool.
"""

from .errors import *  # noqa: F401,F403
from .shift import (
    BlockCode,
    CylFn,
    Sft,
    WordIndex,
    admissible_words,
    basis,
    build_sft,
    full_shift,
    golden_mean,
    higher_block_recode,
    pointwise_transform,
    promote,
    sup_norm,
    symbol_indicators,
)
from .endo import (
    alpha,
    alpha_inverse,
    alpha_power,
    cocycle_power,
    degree_N,
    expectation_E,
    index_cocycle_In,
    inner_product_n,
    level_expectation_En,
    quasi_basis,
    raw_sum_T,
    tower_expectation,
    transfer_L,
    transfer_power,
    watatani_index,
)
from .tower import (
    LinOp,
    SpanElem,
    SpanTerm,
    L_mat,
    alpha_mat,
    basic_projection_en,
    beta_on_operator,
    expectation_F_check,
    expectation_Gn,
    quasi_basis_projection_identity,
    span_product,
)
from .star import (
    StarElem,
    StarTerm,
    expectation_G,
    fixed_point_project_P,
    gauge_gamma,
    gauge_sigma_u,
    gauge_sigma_z,
    ground_functional,
    redundancy_element_k,
    star_adjoint,
    star_multiply,
)
from .kms import (
    CylMeasure,
    KmsSolution,
    bowen_solve,
    dominant_eigen,
    ground_verify,
    kms_measure,
    kms_solve,
    kms_verify,
    pressure_curve,
    ruelle_matrix,
    state_eval,
)

__version__ = "0.1.0"
