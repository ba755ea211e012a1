"""Uniform square grid geometry and node-valued scalar fields.

Layout convention, fixed project-wide: node ``(i, j)`` sits at
``(x_i, y_j) = (i*h, j*h)`` and fields are stored row-major with ``i`` (the
x index) outermost, i.e. ``values[i, j]``.  All file formats state this
explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """N x N node grid over the square [0, L]^2 with spacing h = L/(N-1)."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 5:
            raise ValueError(
                f"grid needs at least 5 nodes per axis (one-sided boundary "
                f"stencils read 3 nodes), got n={self.n}"
            )
        if not (self.length > 0):
            raise ValueError(f"domain edge length must be positive, got {self.length}")

    @property
    def h(self) -> float:
        return self.length / (self.n - 1)

    @property
    def xs(self) -> np.ndarray:
        """Node coordinates along one axis, x_i = i*h."""
        return np.arange(self.n) * self.h

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """Full coordinate arrays X, Y of shape (n, n) with X[i, j] = x_i."""
        xs = self.xs
        return np.broadcast_to(xs[:, None], (self.n, self.n)), np.broadcast_to(
            xs[None, :], (self.n, self.n)
        )


def make_grid(n: int, length: float) -> GridSpec:
    return GridSpec(n=n, length=length)


@dataclass(frozen=True)
class ScalarField:
    """Real values at every node of a grid, shape (n, n), row-major in x."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"field shape {v.shape} does not match grid "
                f"({self.grid.n}, {self.grid.n})"
            )
        object.__setattr__(self, "values", v)

    def require_finite(self) -> "ScalarField":
        if not np.isfinite(self.values).all():
            bad = np.argwhere(~np.isfinite(self.values))[0]
            raise ValueError(f"non-finite field value at node ({bad[0]}, {bad[1]})")
        return self

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def field_from_function(grid: GridSpec, fn) -> ScalarField:
    """Sample ``fn(x, y)`` (vectorized) at every node."""
    x, y = grid.meshes()
    return ScalarField(grid, np.asarray(fn(x, y), dtype=np.float64))


def constant_field(grid: GridSpec, value: float) -> ScalarField:
    return ScalarField(grid, np.full((grid.n, grid.n), float(value)))
