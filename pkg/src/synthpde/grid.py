"""Uniform tensor-product grids on the unit square.

Two layouts share one dataclass: boundary-inclusive grids with S points per
side at x_k = k/(S-1) for k = 0..S-1 (spacing 1/(S-1)), and interior grids
with S-1 points per side at x_k = k/S for k = 1..S-1 (spacing 1/S).  Arrays
over a grid are indexed [ix, iy]: the first axis walks x, the second y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Grid"]


@dataclass(frozen=True)
class Grid:
    """Uniform grid: S points per side if boundary-inclusive, else S-1."""

    points_per_side: int
    includes_boundary: bool = True

    def __post_init__(self):
        if self.points_per_side < 3:
            raise ValueError(
                f"grid needs at least 3 points per side, got {self.points_per_side}"
            )

    @property
    def spacing(self) -> float:
        s = self.points_per_side
        return 1.0 / (s - 1) if self.includes_boundary else 1.0 / s

    @property
    def shape(self) -> tuple[int, int]:
        n = self.points_per_side if self.includes_boundary else self.points_per_side - 1
        return (n, n)

    def coords(self) -> np.ndarray:
        """1-D coordinates along either axis."""
        s = self.points_per_side
        if self.includes_boundary:
            return np.arange(s, dtype=np.float64) / (s - 1)
        return np.arange(1, s, dtype=np.float64) / s

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) with X varying along axis 0, matching array layout."""
        c = self.coords()
        return np.meshgrid(c, c, indexing="ij")

    def refined(self) -> "Grid":
        """The half-spacing grid whose nodes contain this grid's nodes.

        Boundary-inclusive S-point grids refine to 2S-1 points; interior
        grids (S-1 points at k/S) refine to the interior grid at k/(2S).
        The coarse coordinates reappear bitwise-equal among the fine ones.
        """
        s = self.points_per_side
        if self.includes_boundary:
            return Grid(2 * s - 1, True)
        return Grid(2 * s, False)
