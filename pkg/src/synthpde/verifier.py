"""Independent verification of generated datasets.

Three oracles, none of which reuse the analytic differentiation that
produced the data:

* ``fd_apply`` discretizes the operators with second-order centered
  stencils and compares against the stored analytic right-hand side.  A
  correct dataset shows the stencil's own O(h^2) truncation error, shrinking
  at order ~2 when the field is re-rendered on the half-spacing grid; a
  corrupted dataset does not.
* ``dst_poisson_inverse`` actually solves the discrete Poisson problem with
  a direct discrete-sine-transform inversion.  On sine-product data sampled
  at the interior nodes k/S the transform is exact up to rounding, so
  Dirichlet Poisson records must round-trip f -> u at ~1e-10 relative.
  This is the only solve in the project, and it lives here, not in the
  data path.
* ``h1_inner_product`` integrates grad(u) . grad(v) by composite trapezoid
  quadrature (with analytic gradients) for basis-geometry checks.

Verification regenerates fields analytically at finer grids from the
manifest's (master_seed, sample_index) metadata; it never interpolates the
stored grids, so the convergence measured is purely that of the check.

Float32 datasets carry ~1e-7 quantization noise into the stencils, where
division by h^2 amplifies it; run the verifier on float64 datasets
(``generate --precision 64``) for clean order estimates.  Order estimates
are asymptotic statements: they are meaningful only when the grid resolves
the field (max modes well below the Nyquist limit S-1; the default S = 64
with M <= 20 is comfortably inside that regime, a 9-point grid with M = 14
is not).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass

import numpy as np

from .basis import BoundaryCondition
from .dataset import (
    DatasetError,
    DatasetManifest,
    SampleRecord,
    load_arrays,
    operator_for,
    read_dataset,
    render_sample,
)
from .fields import RandomField, eval_field_grid, sample_field
from .grid import Grid
from .operators import Operator, OperatorKind

__all__ = [
    "RESIDUAL_BOUND_CONSTANT",
    "ORDER_WINDOW",
    "ResidualReport",
    "fd_apply",
    "residual_check",
    "verify_dataset",
    "dst_poisson_inverse",
    "h1_inner_product",
    "gram_matrix",
]

# Acceptance window for the observed convergence order of one record.
ORDER_WINDOW = (1.6, 2.4)

# Fine-grid residuals must stay below C * (M*pi)**4 * h**2.  C was calibrated
# against single-mode (M = 1) fields: over 4,000 calibration draws spanning
# every operator/boundary combination the largest observed ratio
# residual / ((M*pi)**4 h**2) was 0.47 (divergence form; ~0.08 for Poisson),
# and the ratio only falls as M grows because the 1/(i+j) coefficient
# variance damps the high modes that the (M*pi)**4 envelope charges for.
# C = 4.0 keeps ~8x headroom for coefficient tail draws while remaining far
# below what any corrupted or misattributed record produces.  The constant
# is echoed in every verification report.
RESIDUAL_BOUND_CONSTANT = 4.0


def fd_apply(u_grid, operator: Operator, spacing: float) -> np.ndarray:
    """Apply an operator to grid values with centered differences.

    Expects a square boundary-inclusive grid with x = 0 at index 0 along
    both axes and constant spacing ``spacing``.  Returns f on the interior
    (S-2) x (S-2) nodes.  Second derivatives use the 3-point stencil, first
    derivatives the 2-point centered stencil, and the mixed derivative the
    4-corner cross; coefficient entries are evaluated analytically at the
    nodes.  Everything here is O(h^2) and deliberately knows nothing about
    how the data was generated.
    """
    u = np.asarray(u_grid, dtype=np.float64)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"u_grid must be square, got shape {u.shape}")
    s = u.shape[0]
    if s < 3:
        raise ValueError(f"grid too small for interior stencils: S = {s} < 3")
    h = float(spacing)
    hh = h * h
    ui = u[1:-1, 1:-1]
    uxx = (u[2:, 1:-1] - 2.0 * ui + u[:-2, 1:-1]) / hh
    uyy = (u[1:-1, 2:] - 2.0 * ui + u[1:-1, :-2]) / hh
    if operator.kind is OperatorKind.POISSON:
        return -(uxx + uyy)
    if operator.kind is OperatorKind.SEMILINEAR:
        return -(uxx + uyy) + np.exp(2.0 * ui)
    ux = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * h)
    uy = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * h)
    uxy = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4.0 * hh)
    x = (np.arange(1, s - 1, dtype=np.float64) * h)[:, None]
    y = (np.arange(1, s - 1, dtype=np.float64) * h)[None, :]
    a11, a12, a21, a22 = operator.matrix.entries(x, y)
    p11x, p12x, p21y, p22y = operator.matrix.divergence_partials(x, y)
    return -(
        a11 * uxx
        + (a12 + a21) * uxy
        + a22 * uyy
        + (p11x + p21y) * ux
        + (p12x + p22y) * uy
    )


@dataclass
class ResidualReport:
    """Outcome of one record's finite-difference residual check."""

    sample_index: int
    n_modes: int
    coarse_points: int
    fine_points: int
    coarse_residual: float
    fine_residual: float
    order: float | None
    fine_bound: float
    passed: bool
    refined_order: float | None = None


def _order_estimate(coarse: float, fine: float) -> tuple[float | None, bool]:
    """Observed order and whether it clears the window.

    A field with identically zero residual at both levels (the zero field)
    has nothing to converge and passes trivially; a zero residual at
    exactly one level means the two sides disagree about the data and
    fails.
    """
    if coarse == 0.0 and fine == 0.0:
        return None, True
    if coarse == 0.0 or fine == 0.0:
        return None, False
    order = math.log2(coarse / fine)
    lo, hi = ORDER_WINDOW
    return order, lo <= order <= hi


def residual_check(
    record: SampleRecord, manifest: DatasetManifest, refine: bool = False
) -> ResidualReport:
    """Compare stored analytic f against fd_apply(u) at two resolutions.

    The coarse residual uses the stored grids exactly as written; the fine
    residual re-renders the field in float64 on the nested half-spacing
    grid.  Passing requires the observed order in ORDER_WINDOW and the
    fine residual under RESIDUAL_BOUND_CONSTANT * (M*pi)**4 * h_fine**2.
    With ``refine`` a third level (quarter spacing) is measured as well.
    """
    grid = manifest.grid
    op = operator_for(manifest.operator, record.matrix_params)
    fld = sample_field(manifest.field_spec, record.sample_index)
    if fld.n_modes != record.n_modes:
        raise DatasetError(
            f"record {record.sample_index}: stored mode count {record.n_modes} "
            f"disagrees with regeneration ({fld.n_modes}); wrong seed or stale metadata"
        )

    f_c = record.f_grid.astype(np.float64)
    u_c = record.u_grid.astype(np.float64)
    coarse = float(np.max(np.abs(f_c[1:-1, 1:-1] - fd_apply(u_c, op, grid.spacing))))

    fine_grid = grid.refined()
    f_f, u_f = render_sample(fld, op, fine_grid)
    fine = float(np.max(np.abs(f_f[1:-1, 1:-1] - fd_apply(u_f, op, fine_grid.spacing))))

    order, order_ok = _order_estimate(coarse, fine)
    h_fine = fine_grid.spacing
    bound = RESIDUAL_BOUND_CONSTANT * (record.n_modes * math.pi) ** 4 * h_fine * h_fine
    passed = order_ok and fine <= bound

    refined_order = None
    if refine:
        finer_grid = fine_grid.refined()
        f_r, u_r = render_sample(fld, op, finer_grid)
        finer = float(np.max(np.abs(f_r[1:-1, 1:-1] - fd_apply(u_r, op, finer_grid.spacing))))
        refined_order, _ = _order_estimate(fine, finer)

    return ResidualReport(
        sample_index=record.sample_index,
        n_modes=record.n_modes,
        coarse_points=grid.shape[0],
        fine_points=fine_grid.shape[0],
        coarse_residual=coarse,
        fine_residual=fine,
        order=order,
        fine_bound=bound,
        passed=passed,
        refined_order=refined_order,
    )


def verify_dataset(manifest_path, refine: bool = False, limit: int | None = None) -> dict:
    """Run residual checks over a dataset and assemble a JSON-able report."""
    manifest, _ = load_arrays(manifest_path)  # validates files up front
    reports = []
    for record in read_dataset(manifest_path):
        reports.append(residual_check(record, manifest, refine=refine))
        if limit is not None and len(reports) >= limit:
            break
    orders = [r.order for r in reports if r.order is not None]
    summary = {
        "records_checked": len(reports),
        "records_passed": sum(r.passed for r in reports),
        "all_passed": all(r.passed for r in reports),
        "median_order": statistics.median(orders) if orders else None,
        "max_fine_residual": max((r.fine_residual for r in reports), default=0.0),
        "bound_constant": RESIDUAL_BOUND_CONSTANT,
        "order_window": list(ORDER_WINDOW),
    }
    return {
        "manifest": str(manifest_path),
        "operator": manifest.operator,
        "bc": manifest.bc,
        "points_per_side": manifest.points_per_side,
        "dtype": manifest.dtype,
        "refined": refine,
        "summary": summary,
        "records": [asdict(r) for r in reports],
    }


def dst_poisson_inverse(f_interior, bc: BoundaryCondition = BoundaryCondition.DIRICHLET):
    """Solve -lap(u) = f on interior nodes k/S by discrete sine transform.

    ``f_interior`` holds f at the (S-1) x (S-1) interior nodes x_k = k/S.
    The forward transform is direct summation (an O(S^3) matrix product,
    fine at desk scale); each mode (i, j) is divided by the continuous
    eigenvalue (i*pi)**2 + (j*pi)**2; the inverse transform returns u on
    the same nodes.  For f that is a sine polynomial of degree < S this
    inversion is exact up to rounding, which is what makes it an oracle:
    it reconstructs u from f through an actual solve, with no knowledge of
    how f was produced.

    Only the Dirichlet problem diagonalizes in the sine basis; Neumann
    input is rejected.
    """
    if bc is not BoundaryCondition.DIRICHLET:
        raise ValueError("sine-transform inverse handles Dirichlet data only")
    f = np.asarray(f_interior, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] != f.shape[1] or f.shape[0] < 1:
        raise ValueError(f"f_interior must be square and non-empty, got shape {f.shape}")
    n = f.shape[0]
    intervals = n + 1
    k = np.arange(1, intervals, dtype=np.float64)
    t = np.sin(np.outer(k, k) * (np.pi / intervals))  # symmetric, t @ t = (intervals/2) I
    lam = (np.pi * k) ** 2
    f_hat = (2.0 / intervals) ** 2 * (t @ f @ t)
    u_hat = f_hat / (lam[:, None] + lam[None, :])
    return t @ u_hat @ t


def _trapezoid2d(values: np.ndarray, coords: np.ndarray) -> float:
    """Composite trapezoid rule over the tensor grid coords x coords."""
    return float(np.trapezoid(np.trapezoid(values, coords, axis=1), coords))


def h1_inner_product(field_a: RandomField, field_b: RandomField, grid: Grid) -> float:
    """Trapezoid quadrature of grad(u_a) . grad(u_b) with analytic gradients."""
    if field_a.bc is not field_b.bc:
        raise ValueError("fields must share one boundary family")
    if not grid.includes_boundary:
        raise ValueError("trapezoid quadrature needs the boundary-inclusive grid")
    coords = grid.coords()
    da = eval_field_grid(field_a, coords, coords)
    db = eval_field_grid(field_b, coords, coords)
    return _trapezoid2d(da.ux * db.ux + da.uy * db.uy, coords)


def _single_mode_field(i: int, j: int, bc: BoundaryCondition) -> RandomField:
    n = max(i, j)
    coeffs = np.zeros((n, n))
    coeffs[i - 1, j - 1] = 1.0
    return RandomField(bc, coeffs)


def gram_matrix(bc: BoundaryCondition, modes_per_axis: int, grid: Grid) -> np.ndarray:
    """Gram matrix of the first modes_per_axis^2 basis fields under the
    H^1 semi-inner product, rows/columns ordered (1,1), (1,2), ..., (m,m)."""
    if not grid.includes_boundary:
        raise ValueError("trapezoid quadrature needs the boundary-inclusive grid")
    coords = grid.coords()
    pairs = [(i, j) for i in range(1, modes_per_axis + 1) for j in range(1, modes_per_axis + 1)]
    grads = []
    for i, j in pairs:
        d = eval_field_grid(_single_mode_field(i, j, bc), coords, coords)
        grads.append((d.ux, d.uy))
    k = len(pairs)
    gram = np.empty((k, k))
    for p in range(k):
        for q in range(p, k):
            val = _trapezoid2d(grads[p][0] * grads[q][0] + grads[p][1] * grads[q][1], coords)
            gram[p, q] = gram[q, p] = val
    return gram
