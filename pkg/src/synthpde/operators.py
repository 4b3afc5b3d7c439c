"""Elliptic operators applied analytically to sampled fields.

Right-hand sides come from closed-form differentiation, never from a
discretized solve:

* Poisson:          f = -(uxx + uyy)
* Divergence form:  f = -div(A(x, y) grad u), expanded by the product rule
  into second-derivative terms weighted by the entries of A plus
  first-derivative terms weighted by the analytic partials of those entries
* Semilinear:       f = -(uxx + uyy) + exp(2 u)

The divergence form needs exactly four entry partials once expanded:

    f = -( a11 uxx + (a12 + a21) uxy + a22 uyy
           + (d a11/dx + d a21/dy) ux + (d a12/dx + d a22/dy) uy )

Coefficient matrices are restricted to families whose entries and partials
have closed forms: the identity, one fixed non-symmetric matrix
[[x^2, sin(xy)], [x + y, y]], and a diagonal family
diag(m1 x + m2 y, m3 x + m4 y) with parameters in [0.1, 5] (keeping the
diagonal positive and the operator uniformly elliptic on the open square).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .basis import Derivatives
from .fields import RandomField, eval_field

__all__ = [
    "CoefficientFamily",
    "CoefficientMatrix",
    "OperatorKind",
    "Operator",
    "apply_poisson",
    "apply_divergence_form",
    "apply_semilinear",
    "sample_coefficient_matrix",
    "PARAM_RANGE",
]

PARAM_RANGE = (0.1, 5.0)


class CoefficientFamily(enum.Enum):
    IDENTITY = "identity"
    FIXED = "fixed"
    DIAGONAL_LINEAR = "diagonal-linear"


@dataclass(frozen=True)
class CoefficientMatrix:
    """A 2x2 coefficient matrix A(x, y) from one of the closed-form families."""

    family: CoefficientFamily
    params: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.family is CoefficientFamily.DIAGONAL_LINEAR:
            p = self.params
            if p is None or len(p) != 4:
                raise ValueError("diagonal-linear family needs 4 parameters")
            lo, hi = PARAM_RANGE
            bad = [v for v in p if not (lo <= v <= hi)]
            if bad:
                raise ValueError(
                    f"diagonal-linear parameters must lie in [{lo}, {hi}], got {bad}"
                )
        elif self.params is not None:
            raise ValueError(f"family {self.family.value} takes no parameters")

    @classmethod
    def identity(cls) -> "CoefficientMatrix":
        return cls(CoefficientFamily.IDENTITY)

    @classmethod
    def fixed(cls) -> "CoefficientMatrix":
        return cls(CoefficientFamily.FIXED)

    @classmethod
    def diagonal_linear(cls, m1, m2, m3, m4) -> "CoefficientMatrix":
        return cls(CoefficientFamily.DIAGONAL_LINEAR, (float(m1), float(m2), float(m3), float(m4)))

    def entries(self, x, y):
        """(a11, a12, a21, a22) at (x, y); constants stay scalars."""
        if self.family is CoefficientFamily.IDENTITY:
            return 1.0, 0.0, 0.0, 1.0
        if self.family is CoefficientFamily.FIXED:
            x = np.asarray(x, dtype=np.float64)
            y = np.asarray(y, dtype=np.float64)
            return x * x, np.sin(x * y), x + y, y
        m1, m2, m3, m4 = self.params
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return m1 * x + m2 * y, 0.0, 0.0, m3 * x + m4 * y

    def divergence_partials(self, x, y):
        """(da11/dx, da12/dx, da21/dy, da22/dy) at (x, y)."""
        if self.family is CoefficientFamily.IDENTITY:
            return 0.0, 0.0, 0.0, 0.0
        if self.family is CoefficientFamily.FIXED:
            x = np.asarray(x, dtype=np.float64)
            y = np.asarray(y, dtype=np.float64)
            return 2.0 * x, y * np.cos(x * y), 1.0, 1.0
        m1, _, _, m4 = self.params
        return m1, 0.0, 0.0, m4


class OperatorKind(enum.Enum):
    POISSON = "poisson"
    DIVERGENCE_FORM = "divergence-form"
    SEMILINEAR = "semilinear"


@dataclass(frozen=True)
class Operator:
    """An elliptic operator; divergence form carries its coefficient matrix."""

    kind: OperatorKind
    matrix: CoefficientMatrix | None = None

    def __post_init__(self):
        if self.kind is OperatorKind.DIVERGENCE_FORM:
            if self.matrix is None:
                raise ValueError("divergence-form operator needs a coefficient matrix")
        elif self.matrix is not None:
            raise ValueError(f"{self.kind.value} operator takes no coefficient matrix")

    @classmethod
    def poisson(cls) -> "Operator":
        return cls(OperatorKind.POISSON)

    @classmethod
    def divergence_form(cls, matrix: CoefficientMatrix) -> "Operator":
        return cls(OperatorKind.DIVERGENCE_FORM, matrix)

    @classmethod
    def semilinear(cls) -> "Operator":
        return cls(OperatorKind.SEMILINEAR)

    def apply(self, d: Derivatives, x=None, y=None):
        """Right-hand side f from precomputed derivative channels.

        This is the fast path for grid pipelines that already hold a
        :class:`Derivatives` bundle.  x and y are required for the
        divergence form (the matrix entries depend on position) and
        ignored otherwise.
        """
        if self.kind is OperatorKind.POISSON:
            return _poisson_rhs(d)
        if self.kind is OperatorKind.SEMILINEAR:
            return _semilinear_rhs(d)
        if x is None or y is None:
            raise ValueError("divergence-form apply needs point coordinates x, y")
        return _divergence_rhs(d, self.matrix, x, y)


def _poisson_rhs(d: Derivatives):
    return -(d.uxx + d.uyy)


def _divergence_rhs(d: Derivatives, matrix: CoefficientMatrix, x, y):
    a11, a12, a21, a22 = matrix.entries(x, y)
    p11x, p12x, p21y, p22y = matrix.divergence_partials(x, y)
    return -(
        a11 * d.uxx
        + (a12 + a21) * d.uxy
        + a22 * d.uyy
        + (p11x + p21y) * d.ux
        + (p12x + p22y) * d.uy
    )


def _semilinear_rhs(d: Derivatives):
    return -(d.uxx + d.uyy) + np.exp(2.0 * d.u)


def apply_poisson(field: RandomField, x, y):
    """f = -(uxx + uyy) at points (x, y), via the analytic derivatives."""
    return _poisson_rhs(eval_field(field, x, y))


def apply_divergence_form(field: RandomField, matrix: CoefficientMatrix, x, y):
    """f = -div(A grad u) at (x, y); A's entries and partials in closed form."""
    return _divergence_rhs(eval_field(field, x, y), matrix, x, y)


def apply_semilinear(field: RandomField, x, y):
    """f = -(uxx + uyy) + exp(2 u) at points (x, y)."""
    return _semilinear_rhs(eval_field(field, x, y))


def sample_coefficient_matrix(gen: np.random.Generator) -> CoefficientMatrix:
    """Draw a diagonal-linear matrix with m_i ~ Uniform[0.1, 5].

    Consumes exactly four doubles from the stream, so it can follow a field
    draw on the same per-sample generator.
    """
    lo, hi = PARAM_RANGE
    m = lo + (hi - lo) * gen.random(4)
    return CoefficientMatrix.diagonal_linear(*m)
