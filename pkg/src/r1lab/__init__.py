"""Numerical toolkit for rank-one convex integrands on matrix spaces."""
from .errors import (
    DimensionError,
    DomainError,
    InvalidDirectionError,
    InvalidInputError,
    InvalidParameterError,
    InvalidRequestError,
    InvalidSpaceError,
    InvalidSpecError,
    NonConvexError,
    R1LabError,
    ValidationError,
)
from .matrix_core import (
    FULL,
    SYMMETRIC,
    MinorSpec,
    MinorVector,
    SignedSvd,
    SquareMatrix,
    all_minors,
    conformal_split,
    from_complex_pair,
    index_of,
    minor,
    minor_specs,
    signed_svd,
    to_complex_pair,
)
from .integrands import COMPLEX_PAIR, IntegrandHandle, integrand_from_id
from .prelaminate import (
    HomSplitRequest,
    Prelaminate,
    diagonal_homogeneity_split,
    h_coefficient,
    lemma_hom_split,
    verify_prelaminate,
)
from .convexity import (
    ScanConfig,
    ViolationReport,
    convexity_along_segment,
    homogeneity_bound_check,
    minor_dependence_rank,
    null_lagrangian_fit,
    rank_one_scan,
    zigzag_scan,
)
from .laminate import (
    DiscreteMeasure,
    Extreme1DSpec,
    choquet_decompose_1d,
    extreme_1d,
    jensen_gap,
    test_measure,
)

__version__ = "0.1.0"
