"""Sampled one-dimensional densities."""

from dataclasses import dataclass, field

import numpy as np

DIMENSIONAL = "dimensional"
DIMENSIONLESS = "dimensionless"
FRAMES = (DIMENSIONAL, DIMENSIONLESS)


@dataclass(frozen=True, eq=False)
class DensityField:
    """Density values on a strictly increasing grid.

    ``mass`` is always the trapezoid integral of ``values`` over ``grid``.
    ``length_scale`` is the length used to make the grid dimensionless (only
    meaningful when ``frame`` is dimensionless). ``meta`` holds free-form
    solver diagnostics.
    """

    grid: np.ndarray
    values: np.ndarray
    frame: str = DIMENSIONAL
    length_scale: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if grid.size < 2:
            raise ValueError("a density field needs at least two samples")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite and non-negative")
        if self.frame not in FRAMES:
            raise ValueError(f"frame must be one of {FRAMES}, got {self.frame!r}")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def mass(self):
        return float(np.trapezoid(self.values, self.grid))

    def __len__(self):
        return self.grid.size

    def __call__(self, x):
        """Piecewise-linear interpolation, zero outside the grid."""
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)

    def scaled(self, factor):
        return DensityField(self.grid, self.values * factor, self.frame,
                            self.length_scale, dict(self.meta))

    def with_meta(self, **items):
        meta = dict(self.meta)
        meta.update(items)
        return DensityField(self.grid, self.values, self.frame, self.length_scale, meta)
