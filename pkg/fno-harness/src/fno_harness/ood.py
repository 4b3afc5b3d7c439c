"""Out-of-distribution evaluation against closed-form right-hand sides.

Trained models only ever saw f built from finite trigonometric sums; the
two forcings here are not of that form.  ``linear_diff`` (f = x - y) is
smooth, ``corner_abs`` (f = |x - 0.5||y - 0.5|) has a kink.  Ground truth
comes from the generator's sine-transform Poisson inverse, used strictly
as a reference — so this evaluation only applies to models trained on
Dirichlet Poisson data (single input channel, zero boundary).
"""

import numpy as np
import torch
from synthpde import dst_poisson_inverse, ood_rhs

from .model import FNO2d

OOD_CHOICES = ("linear_diff", "corner_abs")


def reference_solution(name: str, grid):
    """(f, u) grids for an OOD forcing, u from the sine-transform oracle."""
    if not grid.includes_boundary:
        raise ValueError("OOD evaluation expects a boundary-inclusive grid")
    f = ood_rhs(name, grid)
    u = np.zeros_like(f)
    u[1:-1, 1:-1] = dst_poisson_inverse(f[1:-1, 1:-1])
    return f, u


def evaluate_ood(model: FNO2d, name: str, grid, device: str = "cpu") -> dict:
    """Predict u for a closed-form f and score against the DST reference.

    Returns the metrics plus the grids themselves (prediction, reference,
    forcing) so callers can dump them.
    """
    if model.in_channels != 1:
        raise ValueError(
            "OOD evaluation needs a single-input-channel (Poisson) model, "
            f"got {model.in_channels} channels"
        )
    f, u_ref = reference_solution(name, grid)
    x = torch.from_numpy(f.astype(np.float32))[None, ..., None]
    model.eval()
    with torch.no_grad():
        u_pred = model(x.to(device)).cpu().numpy()[0, ..., 0].astype(np.float64)
    rel_l2 = float(
        np.linalg.norm(u_pred - u_ref) / np.linalg.norm(u_ref)
    )
    boundary_max = float(
        max(
            np.abs(u_pred[0, :]).max(),
            np.abs(u_pred[-1, :]).max(),
            np.abs(u_pred[:, 0]).max(),
            np.abs(u_pred[:, -1]).max(),
        )
    )
    return {
        "name": name,
        "rel_l2_vs_reference": rel_l2,
        "boundary_max_abs": boundary_max,
        "u_pred": u_pred,
        "u_ref": u_ref,
        "f": f,
    }
