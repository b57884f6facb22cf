"""Exact first and second moments of minors of Wishart matrices.

Closed-form expectations, variances, and covariances of the determinants of
submatrices of a Wishart-distributed matrix, for identity and general positive
definite scales; a standardized-minor hypothesis test; a hidden-factor
covariance simulator; and a reproducible Monte Carlo oracle for validating
every formula.
"""

from .constraints import (
    CIStatement,
    HiddenFactorCov,
    ci_to_minors,
    offdiag_minor_implied,
    sample_cm_cov,
)
from .errors import (
    FormulaExtrapolationWarning,
    NotPositiveDefiniteError,
    NumericalError,
    SingularMatrixError,
)
from .general_moments import (
    CovarianceTable,
    DetMoments,
    VarianceBreakdown,
    cov_compound_general,
    cross_moment_general,
    e_compound_general,
    e_minor_general,
    noncentral_det_moments,
    tetrad_variance,
    var_minor_general,
    var_offdiag_minor,
    var_principal_minor,
    variance_breakdown,
)
from .indexing import (
    CanonicalRelabeling,
    IndexSeq,
    SubsetEnumeration,
    as_index_seq,
    canonical_relabeling,
    subset_rank,
    subset_unrank,
    sym_diff,
)
from .linalg import (
    CompoundMatrix,
    SymPDMatrix,
    compound,
    dump_matrix_csv,
    ensure_spd,
    format_matrix_csv,
    kronecker,
    load_matrix_csv,
    minor_det,
    schur_complement,
    sym_sqrt,
    trace_compound,
)
from .minor_test import (
    SampleInput,
    TestReport,
    batch_test,
    normal_p_two_sided,
    standardized_minor_test,
)
from .oracle import (
    OracleEstimate,
    mc_minor_covariance,
    mc_minor_moments,
    mc_minor_variance,
    mc_noncentral_det,
)
from .sampling import (
    CholeskiFactor,
    RngStream,
    WishartSpec,
    derive_stream,
    sample_bartlett,
    sample_bartlett_batch,
    sample_gaussian_square,
    sample_gaussian_square_batch,
    sample_general,
    sample_general_batch,
    sample_standard,
    sample_standard_batch,
)
from .standard_moments import (
    CompoundCovariance,
    MinorPair,
    MomentValue,
    cov_compound_std,
    cross_moment_std,
    e_compound_std,
    e_minor_std,
    falling_product,
    second_moment_std,
    var_minor_std,
)

__version__ = "0.1.0"

__all__ = [
    "CIStatement",
    "CanonicalRelabeling",
    "CholeskiFactor",
    "CompoundCovariance",
    "CompoundMatrix",
    "CovarianceTable",
    "DetMoments",
    "FormulaExtrapolationWarning",
    "HiddenFactorCov",
    "IndexSeq",
    "MinorPair",
    "MomentValue",
    "NotPositiveDefiniteError",
    "NumericalError",
    "OracleEstimate",
    "RngStream",
    "SampleInput",
    "SingularMatrixError",
    "SubsetEnumeration",
    "SymPDMatrix",
    "TestReport",
    "VarianceBreakdown",
    "WishartSpec",
    "as_index_seq",
    "batch_test",
    "canonical_relabeling",
    "ci_to_minors",
    "compound",
    "cov_compound_general",
    "cov_compound_std",
    "cross_moment_general",
    "cross_moment_std",
    "derive_stream",
    "dump_matrix_csv",
    "e_compound_general",
    "e_compound_std",
    "e_minor_general",
    "e_minor_std",
    "ensure_spd",
    "falling_product",
    "format_matrix_csv",
    "kronecker",
    "load_matrix_csv",
    "mc_minor_covariance",
    "mc_minor_moments",
    "mc_minor_variance",
    "mc_noncentral_det",
    "minor_det",
    "noncentral_det_moments",
    "normal_p_two_sided",
    "offdiag_minor_implied",
    "sample_bartlett",
    "sample_bartlett_batch",
    "sample_cm_cov",
    "sample_gaussian_square",
    "sample_gaussian_square_batch",
    "sample_general",
    "sample_general_batch",
    "sample_standard",
    "sample_standard_batch",
    "schur_complement",
    "second_moment_std",
    "standardized_minor_test",
    "subset_rank",
    "subset_unrank",
    "sym_diff",
    "sym_sqrt",
    "tetrad_variance",
    "trace_compound",
    "var_minor_general",
    "var_minor_std",
    "var_offdiag_minor",
    "var_principal_minor",
    "variance_breakdown",
]
