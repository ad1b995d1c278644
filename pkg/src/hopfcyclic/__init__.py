"""Exact universal differential calculus and cyclic-type cohomology for
finite-dimensional Hopf algebras over the rationals.

Everything is computed with exact rational arithmetic; there is no floating
point anywhere in the package.  All values are immutable after construction
and every operation is a pure, deterministic function of its inputs.
"""

from .linalg import (
    SparseMatrix,
    Subspace,
    rank_kernel_image,
    subspace_combine,
    restrict_map,
    cohomology_dim,
    evaluate_polynomial,
    DimensionMismatch,
    NonSquare,
    NotStable,
    NotAComplex,
)
from .hopf import (
    AlgebraPresentation,
    HopfPresentation,
    Element,
    TensorVector,
    Character,
    validate_hopf,
    iterated_coproduct,
    is_grouplike,
    star_convolve,
    ad_character,
    twisted_antipode,
    check_modular_pair,
    diagonal_action,
    two_sided_twist,
    NotAutomorphism,
)
from .catalog import builtin, builtin_names, builtin_pair
from . import forms, cyclic, cohomology, algfile

__all__ = [
    "SparseMatrix",
    "Subspace",
    "rank_kernel_image",
    "subspace_combine",
    "restrict_map",
    "cohomology_dim",
    "evaluate_polynomial",
    "DimensionMismatch",
    "NonSquare",
    "NotStable",
    "NotAComplex",
    "AlgebraPresentation",
    "HopfPresentation",
    "Element",
    "TensorVector",
    "Character",
    "validate_hopf",
    "iterated_coproduct",
    "is_grouplike",
    "star_convolve",
    "ad_character",
    "twisted_antipode",
    "check_modular_pair",
    "diagonal_action",
    "two_sided_twist",
    "NotAutomorphism",
    "builtin",
    "builtin_names",
    "builtin_pair",
    "forms",
    "cyclic",
    "cohomology",
    "algfile",
]
