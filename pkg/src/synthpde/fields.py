"""Random solution fields built from truncated eigenfunction expansions.

A field is u = sum_{i,j=1..M} a_ij * e_ij where e_ij is the normalized
Dirichlet or Neumann mode from :mod:`synthpde.basis`, the truncation M is
drawn uniformly from {min_modes, ..., max_modes}, and the coefficients are
independent Gaussians with variance 1/(i + j) (heavier weight on smooth,
low-frequency content).

Each sample index gets its own counter-based stream (see
:mod:`synthpde.rng`), with a fixed draw order: one double for M, then the
M*M coefficient normals in row-major mode order.  Anything a caller draws
afterwards from the returned stream (e.g. per-sample operator parameters)
stays reproducible as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BoundaryCondition, Derivatives, cospi, sinpi
from .rng import sample_stream, standard_normals, uniform_int

__all__ = [
    "FieldSpec",
    "RandomField",
    "ModeTables",
    "sample_field",
    "sample_field_and_stream",
    "eval_field",
    "eval_field_grid",
]

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class FieldSpec:
    """Distribution of random fields: boundary family, mode range, seed."""

    bc: BoundaryCondition
    min_modes: int = 1
    max_modes: int = 20
    master_seed: int = 0

    def __post_init__(self):
        if not 1 <= self.min_modes <= self.max_modes:
            raise ValueError(
                f"need 1 <= min_modes <= max_modes, got "
                f"[{self.min_modes}, {self.max_modes}]"
            )
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")


@dataclass(frozen=True)
class RandomField:
    """One realized field: coefficient matrix a_ij, i, j = 1..n_modes."""

    bc: BoundaryCondition
    coeffs: np.ndarray  # (n_modes, n_modes) float64, row i-1 <-> x-mode i
    sample_index: int = 0

    def __post_init__(self):
        c = self.coeffs
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 1:
            raise ValueError(f"coeffs must be square and non-empty, got shape {c.shape}")

    @property
    def n_modes(self) -> int:
        return self.coeffs.shape[0]


def sample_field_and_stream(
    spec: FieldSpec, sample_index: int
) -> tuple[RandomField, np.random.Generator]:
    """Draw one field; also return its stream, positioned after the draws.

    The returned generator lets callers draw per-sample extras (operator
    parameters, noise) that remain tied to the same (seed, index) key.
    """
    gen = sample_stream(spec.master_seed, sample_index)
    n = uniform_int(gen, spec.min_modes, spec.max_modes)
    z = standard_normals(gen, n * n)
    idx = np.arange(1, n + 1, dtype=np.float64)
    stddev = 1.0 / np.sqrt(idx[:, None] + idx[None, :])
    coeffs = z.reshape(n, n) * stddev
    return RandomField(spec.bc, coeffs, sample_index), gen


def sample_field(spec: FieldSpec, sample_index: int) -> RandomField:
    """Draw the field for one sample index."""
    fld, _ = sample_field_and_stream(spec, sample_index)
    return fld


def _amplitudes(field: RandomField) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients divided by sqrt(lambda_ij), plus the vector (i*pi)."""
    n = field.n_modes
    kpi = np.arange(1, n + 1, dtype=np.float64) * np.pi
    lam = kpi[:, None] ** 2 + kpi[None, :] ** 2
    return field.coeffs / np.sqrt(lam), kpi


class ModeTables:
    """Cached sin/cos tables for modes 1..n_max along fixed coordinate axes.

    Row k-1 holds sin(k*pi*x) / cos(k*pi*x) over the axis points.  A table
    built for n_max serves any field with n_modes <= n_max by row slicing,
    so dataset generation builds the tables once per run.
    """

    def __init__(self, n_max: int, x_coords: np.ndarray, y_coords: np.ndarray):
        if n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {n_max}")
        self.n_max = n_max
        self.x_coords = np.asarray(x_coords, dtype=np.float64)
        self.y_coords = np.asarray(y_coords, dtype=np.float64)
        k = np.arange(1, n_max + 1, dtype=np.float64)[:, None]
        self.sin_x = sinpi(k * self.x_coords[None, :])
        self.cos_x = cospi(k * self.x_coords[None, :])
        self.sin_y = sinpi(k * self.y_coords[None, :])
        self.cos_y = cospi(k * self.y_coords[None, :])


def eval_field_grid(
    field: RandomField,
    x_coords,
    y_coords,
    tables: ModeTables | None = None,
) -> Derivatives:
    """Evaluate a field and its partials on a tensor-product grid.

    Returns arrays of shape (len(x_coords), len(y_coords)) with the x index
    first.  Cost is two (n x n)@(n x S) matrix products per derivative
    channel; pass a prebuilt ``tables`` covering max(n_modes) to amortize
    the trigonometric work across many fields on the same grid.
    """
    x_coords = np.asarray(x_coords, dtype=np.float64)
    y_coords = np.asarray(y_coords, dtype=np.float64)
    n = field.n_modes
    if tables is None:
        tables = ModeTables(n, x_coords, y_coords)
    elif (
        tables.n_max < n
        or tables.x_coords.shape != x_coords.shape
        or tables.y_coords.shape != y_coords.shape
        or not np.array_equal(tables.x_coords, x_coords)
        or not np.array_equal(tables.y_coords, y_coords)
    ):
        raise ValueError("tables do not cover the requested grid and mode count")
    sx, cx = tables.sin_x[:n], tables.cos_x[:n]
    sy, cy = tables.sin_y[:n], tables.cos_y[:n]
    amp, kpi = _amplitudes(field)

    def bilinear(w, left, right):
        # sum_ij w_ij * left_i(x) * right_j(y) via (left^T @ w) @ right
        return (left.T @ w) @ right

    ki = kpi[:, None]
    kj = kpi[None, :]
    if field.bc is BoundaryCondition.DIRICHLET:
        vx, vy, dx, dy, sgn = sx, sy, cx, cy, 1.0  # d/dx sin -> +cos
    else:
        vx, vy, dx, dy, sgn = cx, cy, sx, sy, -1.0  # d/dx cos -> -sin
    return Derivatives(
        u=bilinear(amp, vx, vy),
        ux=bilinear(sgn * amp * ki, dx, vy),
        uy=bilinear(sgn * amp * kj, vx, dy),
        uxx=bilinear(-amp * ki * ki, vx, vy),
        uyy=bilinear(-amp * kj * kj, vx, vy),
        uxy=bilinear(amp * ki * kj, dx, dy),
    )


def eval_field(field: RandomField, x, y) -> Derivatives:
    """Evaluate a field and its partials at broadcastable point arrays."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    shape = np.broadcast_shapes(x.shape, y.shape)
    xb = np.broadcast_to(x, shape).ravel()
    yb = np.broadcast_to(y, shape).ravel()
    n = field.n_modes
    k = np.arange(1, n + 1, dtype=np.float64)[:, None]
    sx, cx = sinpi(k * xb[None, :]), cospi(k * xb[None, :])
    sy, cy = sinpi(k * yb[None, :]), cospi(k * yb[None, :])
    amp, kpi = _amplitudes(field)
    ki = kpi[:, None]
    kj = kpi[None, :]

    def contract(w, left, right):
        # sum_ij w_ij * left_i(p) * right_j(p), pointwise over points p
        return np.einsum("ij,ip,jp->p", w, left, right, optimize=True)

    if field.bc is BoundaryCondition.DIRICHLET:
        vx, vy, dx, dy, sgn = sx, sy, cx, cy, 1.0
    else:
        vx, vy, dx, dy, sgn = cx, cy, sx, sy, -1.0
    return Derivatives(
        u=contract(amp, vx, vy).reshape(shape),
        ux=contract(sgn * amp * ki, dx, vy).reshape(shape),
        uy=contract(sgn * amp * kj, vx, dy).reshape(shape),
        uxx=contract(-amp * ki * ki, vx, vy).reshape(shape),
        uyy=contract(-amp * kj * kj, vx, vy).reshape(shape),
        uxy=contract(amp * ki * kj, dx, dy).reshape(shape),
    )
