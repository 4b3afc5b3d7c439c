"""Closed-form Laplacian eigenpairs on the unit square.

Dirichlet modes are products of sines, Neumann modes products of cosines,
both indexed by integer pairs (i, j) >= 1 and sharing the eigenvalue
lambda_ij = (i*pi)**2 + (j*pi)**2.  The basis functions carry a 1/sqrt(lambda)
amplitude so that mode amplitudes translate into derivative magnitudes of
order sqrt(lambda) rather than lambda.

Values and all partials up to second order come from the closed forms;
nothing here is differentiated numerically.  Trigonometric evaluation goes
through an argument reduction (``sinpi``/``cospi``) that returns exact zeros
at integer arguments, which is what makes Dirichlet traces and Neumann
normal derivatives vanish exactly on the boundary instead of to ~1e-16.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundaryCondition",
    "Derivatives",
    "eigenvalue",
    "eval_basis",
    "sinpi",
    "cospi",
]


class BoundaryCondition(enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


def sinpi(t):
    """sin(pi*t), exact zero when t is an integer.

    Reduces t to r = t - rint(t) in [-1/2, 1/2] and applies
    sin(pi*t) = (-1)**rint(t) * sin(pi*r).  At integer t the reduced
    argument is exactly 0.0, so the result is an exact signed zero.
    """
    t = np.asarray(t, dtype=np.float64)
    n = np.rint(t)
    sign = 1.0 - 2.0 * np.mod(n, 2.0)
    return np.sin(np.pi * (t - n)) * sign


def cospi(t):
    """cos(pi*t), exact zero at half-integers and exact +-1 at integers.

    Uses cos(pi*t) = sin(pi*(1/2 - t)) so both exactness properties are
    inherited from ``sinpi``'s argument reduction.
    """
    return sinpi(0.5 - np.asarray(t, dtype=np.float64))


@dataclass(frozen=True)
class Derivatives:
    """Value and partials of a scalar field at one or many points.

    Arrays share a common shape; scalar inputs give 0-d arrays.
    """

    u: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    uxx: np.ndarray
    uyy: np.ndarray
    uxy: np.ndarray


def eigenvalue(i: int, j: int) -> float:
    """Laplacian eigenvalue (i*pi)**2 + (j*pi)**2 for mode (i, j)."""
    if i < 1 or j < 1:
        raise ValueError(f"mode indices must be >= 1, got ({i}, {j})")
    return (i * math.pi) ** 2 + (j * math.pi) ** 2


def eval_basis(i: int, j: int, bc: BoundaryCondition, x, y) -> Derivatives:
    """Evaluate normalized mode (i, j) and its partials at points (x, y).

    x and y broadcast against each other.  Dirichlet modes are
    sin(i*pi*x)*sin(j*pi*y)/sqrt(lambda); Neumann modes replace both sines
    with cosines.  Second partials satisfy uxx + uyy = -lambda*u exactly by
    construction (they are computed as -(k*pi)**2 * u).
    """
    lam = eigenvalue(i, j)
    amp = 1.0 / math.sqrt(lam)
    ip = i * math.pi
    jp = j * math.pi
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    six, cix = sinpi(i * x), cospi(i * x)
    sjy, cjy = sinpi(j * y), cospi(j * y)
    if bc is BoundaryCondition.DIRICHLET:
        u = amp * six * sjy
        ux = (amp * ip) * cix * sjy
        uy = (amp * jp) * six * cjy
        uxy = (amp * ip * jp) * cix * cjy
    elif bc is BoundaryCondition.NEUMANN:
        u = amp * cix * cjy
        ux = (-amp * ip) * six * cjy
        uy = (-amp * jp) * cix * sjy
        uxy = (amp * ip * jp) * six * sjy
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown boundary condition: {bc!r}")
    uxx = -(ip * ip) * u
    uyy = -(jp * jp) * u
    return Derivatives(u=u, ux=ux, uy=uy, uxx=uxx, uyy=uyy, uxy=uxy)
