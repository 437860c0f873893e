"""Uniform 1D lattice, boundary handling and the shared stencil operators.

Every model in the toolkit lives on a :class:`Grid1D`.  Fields are plain
1D float arrays with one entry per cell; the discrete Laplacian below is
the only spatial operator the models use.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError

__all__ = [
    "BoundaryMode",
    "Grid1D",
    "heaviside",
    "laplacian",
    "positive_part",
]


class BoundaryMode(enum.Enum):
    """Ghost-cell convention used by the stencil.

    ZERO_FLUX reflects the adjacent interior value (no-flux walls);
    ZERO_PADDED holds the ghost cells at zero, as in a lattice whose
    ends are clamped to the empty state.
    """

    ZERO_FLUX = "zero-flux"
    ZERO_PADDED = "zero-padded"


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centred lattice: cell i sits at ``x0 + i*dx``."""

    n_cells: int
    dx: float
    x0: float = 0.0

    def __post_init__(self):
        if self.n_cells < 2:
            raise ConfigError(f"grid needs at least 2 cells, got {self.n_cells}", key="grid.n_cells")
        if not self.dx > 0:
            raise ConfigError(f"grid spacing must be positive, got {self.dx}", key="grid.dx")

    @property
    def x(self) -> np.ndarray:
        """Cell-centre coordinates, length ``n_cells``."""
        return self.x0 + self.dx * np.arange(self.n_cells)

    @property
    def length(self) -> float:
        return self.dx * (self.n_cells - 1)

    def check_field(self, f: np.ndarray, name: str = "field") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n_cells,):
            raise DimensionError(
                f"{name} has shape {f.shape}, expected ({self.n_cells},) for this grid"
            )
        return f


def heaviside(x):
    """Step function with H(0) = 1.

    Works on scalars and arrays; returns floats in {0.0, 1.0} so the result
    can gate production terms by multiplication.
    """
    if np.isscalar(x):
        return 1.0 if x >= 0 else 0.0
    return np.where(np.asarray(x) >= 0, 1.0, 0.0)


def positive_part(x):
    """Ramp clip ``x * H(x)`` used to keep production terms non-negative."""
    return np.maximum(x, 0.0)


def laplacian(f: np.ndarray, grid: Grid1D, mode: BoundaryMode) -> np.ndarray:
    """Second-difference Laplacian ``(f[i-1] - 2 f[i] + f[i+1]) / dx**2``.

    Ghost values follow ``mode``: reflected interior value for ZERO_FLUX,
    literal zero for ZERO_PADDED.
    """
    f = grid.check_field(f)
    out = np.empty_like(f)
    inv_dx2 = 1.0 / (grid.dx * grid.dx)
    out[1:-1] = (f[:-2] - 2.0 * f[1:-1] + f[2:]) * inv_dx2
    if mode is BoundaryMode.ZERO_FLUX:
        ghost_left, ghost_right = f[0], f[-1]
    else:
        ghost_left, ghost_right = 0.0, 0.0
    out[0] = (ghost_left - 2.0 * f[0] + f[1]) * inv_dx2
    out[-1] = (f[-2] - 2.0 * f[-1] + ghost_right) * inv_dx2
    return out
