"""Adaptive partition-of-unity Chebyshev approximation in two and three dimensions.

Build an approximant with :func:`build`, evaluate it by calling it or with
``eval_grid``, combine approximants with ``+ - * /``, and differentiate or
integrate them. :func:`build_extension` handles nonrectangular regions.
"""

from .algebra import apply_binary, apply_unary_sample, merge
from .box import Box, Interval
from .chebcore import (
    ChebInterpolant,
    ChopResult,
    cheb_points,
    chop,
    clenshaw_curtis_weights,
    clenshaw_eval,
    coeffs_to_values,
    diff_coeffs,
    sum_coeff_magnitudes_except,
    values_to_coeffs,
)
from .errors import (
    ConstructionLimitError,
    DegenerateLeafError,
    DivisionSingularityError,
    InsufficientSamplesError,
    InvalidArgumentError,
    InvalidDataError,
    MergePreconditionError,
    OutOfDomainError,
    PUFunError,
)
from .evaluate import bump, differentiate, eval_grid, evaluate, integrate, numden, psi0
from .extension import (
    DomainSpec,
    ExtensionFun,
    build_extension,
    extension_sample_set,
    get_domain,
    lsq_fit,
    shrink_zone_to_domain,
)
from .tree import BuildParams, PUFun, TreeNode, build, extend_zone, leaves, refine, split

__version__ = "0.1.0"

__all__ = [
    "Box", "BuildParams", "ChebInterpolant", "ChopResult", "ConstructionLimitError",
    "DegenerateLeafError", "DivisionSingularityError", "DomainSpec", "ExtensionFun",
    "InsufficientSamplesError", "Interval", "InvalidArgumentError", "InvalidDataError",
    "MergePreconditionError", "OutOfDomainError", "PUFun", "PUFunError", "TreeNode",
    "apply_binary", "apply_unary_sample", "build", "build_extension", "bump", "cheb_points",
    "chop", "clenshaw_curtis_weights", "clenshaw_eval", "coeffs_to_values", "diff_coeffs",
    "differentiate", "eval_grid", "evaluate", "extend_zone", "extension_sample_set",
    "get_domain", "integrate", "leaves", "lsq_fit", "merge", "numden", "psi0", "refine",
    "shrink_zone_to_domain", "split", "sum_coeff_magnitudes_except", "values_to_coeffs",
]
