"""Solver-free synthetic training data for elliptic operator learning.

Sample solutions u from truncated Laplacian-eigenfunction expansions on the
unit square, apply elliptic operators to them in closed form to obtain f,
and serialize (f, u) pairs bit-reproducibly.  A separate verifier checks
emitted datasets with finite differences and a sine-transform solve.
"""

from .basis import BoundaryCondition, Derivatives, eigenvalue, eval_basis
from .dataset import (
    DatasetError,
    DatasetManifest,
    MissingArrayFileError,
    SampleRecord,
    ShapeMismatchError,
    UnknownVersionError,
    generate_dataset,
    load_arrays,
    ood_rhs,
    read_dataset,
    read_manifest,
)
from .fields import FieldSpec, RandomField, eval_field, eval_field_grid, sample_field
from .grid import Grid
from .operators import (
    CoefficientFamily,
    CoefficientMatrix,
    Operator,
    OperatorKind,
    apply_divergence_form,
    apply_poisson,
    apply_semilinear,
    sample_coefficient_matrix,
)
from .verifier import (
    ResidualReport,
    dst_poisson_inverse,
    fd_apply,
    h1_inner_product,
    residual_check,
    verify_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "Derivatives",
    "eigenvalue",
    "eval_basis",
    "FieldSpec",
    "RandomField",
    "sample_field",
    "eval_field",
    "eval_field_grid",
    "CoefficientFamily",
    "CoefficientMatrix",
    "Operator",
    "OperatorKind",
    "apply_poisson",
    "apply_divergence_form",
    "apply_semilinear",
    "sample_coefficient_matrix",
    "Grid",
    "DatasetManifest",
    "SampleRecord",
    "DatasetError",
    "MissingArrayFileError",
    "ShapeMismatchError",
    "UnknownVersionError",
    "generate_dataset",
    "read_dataset",
    "read_manifest",
    "load_arrays",
    "ood_rhs",
    "ResidualReport",
    "fd_apply",
    "residual_check",
    "verify_dataset",
    "dst_poisson_inverse",
    "h1_inner_product",
    "__version__",
]
