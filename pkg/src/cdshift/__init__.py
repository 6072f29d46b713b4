"""Canonical right inverses, kernel-bundle cross-sections and shift criteria
for Cowen-Douglas operators, computed on finite truncations of l^2."""

from .basis import (
    BasisDiagnostics,
    BiorthogonalSystem,
    NamedExample,
    basis_diagnostics,
    biorthogonal_dual,
    build_named_example,
    verify_biorthogonal,
    verify_shift_relation,
)
from .criteria import (
    CriterionReport,
    check_b1_disk,
    check_kernel_powers_span,
    check_markushevich_shift,
    check_onb_plain_shift,
    check_onb_weighted_shift,
    demo_no_mbasis_shift,
)
from .inverse import CanonicalInverse, canonical_right_inverse, verify_canonical_right_inverse
from .operators import (
    ExactWindow,
    KernelBasis,
    TruncatedOperator,
    adjoint,
    build_operator,
    kernel_basis,
    shift_operator,
    spectral_radius_estimate,
    surjectivity_margin,
)
from .sections import (
    CrossSection,
    canonical_section,
    canonical_tuple,
    decompose_pseudocanonical,
    pseudocanonical_check,
    pseudocanonicalize,
    relate_tuples,
    section_diagnostics,
)
from .series import ScalarSeries, VectorSeries, series_div, series_eval, series_inner, series_mul

__version__ = "0.1.0"

__all__ = [
    "BasisDiagnostics",
    "BiorthogonalSystem",
    "NamedExample",
    "basis_diagnostics",
    "biorthogonal_dual",
    "build_named_example",
    "verify_biorthogonal",
    "verify_shift_relation",
    "CriterionReport",
    "check_b1_disk",
    "check_kernel_powers_span",
    "check_markushevich_shift",
    "check_onb_plain_shift",
    "check_onb_weighted_shift",
    "demo_no_mbasis_shift",
    "ExactWindow",
    "KernelBasis",
    "TruncatedOperator",
    "adjoint",
    "build_operator",
    "kernel_basis",
    "shift_operator",
    "spectral_radius_estimate",
    "surjectivity_margin",
    "CrossSection",
    "canonical_section",
    "canonical_tuple",
    "decompose_pseudocanonical",
    "pseudocanonical_check",
    "pseudocanonicalize",
    "relate_tuples",
    "section_diagnostics",
    "CanonicalInverse",
    "canonical_right_inverse",
    "verify_canonical_right_inverse",
    "ScalarSeries",
    "VectorSeries",
    "series_div",
    "series_eval",
    "series_inner",
    "series_mul",
]
