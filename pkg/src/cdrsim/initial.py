"""Hill-sum initial conditions and their random sampler.

An initial condition is a sum of compactly supported, C^1 radial bumps
("hills").  The radial profile with height H and support radius a is

    g(r) = (2H / a^3) * (r - a)^2 * (r + a/2)   for 0 <= r < a,  else 0,

so g(0) = H, g(a) = g'(a) = 0.  A hill placed at (x_c, y_c) contributes
g(dist((x, y), (x_c, y_c))) to the field.

The sampler draws, per initial condition and in this fixed order: the hill
count n uniform in {5, ..., 15}; then per hill H in (0, 1), the center
coordinates uniform in [L/5, 4L/5]^2, and a unit draw R in [0, 1) from
which the support radius is reconstructed as

    a = L/10 + R * (min(x_c, L - x_c, y_c, L - y_c) - L/10).

The lower bound keeps derivatives bounded, the upper keeps the support
inside the closed domain so the rendered field is compatible with the
zero-Neumann boundary.
"""

from __future__ import annotations

import csv
import importlib.resources
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ScalarField
from .rng import SplitMix64

#: Hill count range used by the sampler (fixtures may exceed it).
HILL_COUNT_RANGE = (5, 15)


@dataclass(frozen=True)
class HillParams:
    height: float
    radius: float
    x_center: float
    y_center: float

    def __post_init__(self):
        if not (self.height > 0 and self.radius > 0):
            raise ValueError(f"hill height and radius must be positive, got {self}")


@dataclass(frozen=True)
class InitialCondition:
    hills: tuple[HillParams, ...]

    @property
    def n(self) -> int:
        return len(self.hills)

    def __add__(self, other: "InitialCondition") -> "InitialCondition":
        return InitialCondition(self.hills + other.hills)


def hill_profile(r, height: float, radius: float):
    """Radial profile g(r); accepts scalars or arrays, nonnegative everywhere."""
    r = np.asarray(r, dtype=np.float64)
    scale = 2.0 * height / radius**3
    inside = scale * (r - radius) ** 2 * (r + 0.5 * radius)
    out = np.where(r < radius, inside, 0.0)
    return float(out) if out.ndim == 0 else out


def hill_bump(x, y, p: HillParams):
    """Value of one hill at (x, y); zero outside the radius-a disk."""
    r = np.sqrt((np.asarray(x) - p.x_center) ** 2 + (np.asarray(y) - p.y_center) ** 2)
    return hill_profile(r, p.height, p.radius)


def support_radius(unit_draw: float, x_center: float, y_center: float, length: float) -> float:
    """Support radius from the unit draw R and the center's boundary distances."""
    lo = length / 10.0
    hi = min(x_center, length - x_center, y_center, length - y_center)
    return lo + unit_draw * (hi - lo)


def sample_ic(stream: SplitMix64, grid: GridSpec) -> InitialCondition:
    """Draw a random initial condition; one seed fully determines the result."""
    length = grid.length
    n = stream.randint(*HILL_COUNT_RANGE)
    hills = []
    for _ in range(n):
        height = stream.uniform_pos()
        x_center = stream.uniform_in(length / 5.0, 4.0 * length / 5.0)
        y_center = stream.uniform_in(length / 5.0, 4.0 * length / 5.0)
        unit_draw = stream.uniform()
        hills.append(
            HillParams(
                height=height,
                radius=support_radius(unit_draw, x_center, y_center, length),
                x_center=x_center,
                y_center=y_center,
            )
        )
    return InitialCondition(tuple(hills))


def render_ic(ic: InitialCondition, grid: GridSpec) -> ScalarField:
    """Sum all hills at every node."""
    xs = grid.xs
    values = np.zeros((grid.n, grid.n))
    for p in ic.hills:
        dx = xs[:, None] - p.x_center
        dy = xs[None, :] - p.y_center
        values += hill_profile(np.sqrt(dx * dx + dy * dy), p.height, p.radius)
    return ScalarField(grid, values)


def load_hill_csv(path_or_file, length: float) -> InitialCondition:
    """Load a hill fixture from CSV with columns i,H,x_max,y_max,R.

    The support radius is reconstructed from the stored unit draw R, so the
    file stays valid for any domain size convention.
    """
    if hasattr(path_or_file, "read"):
        rows = list(csv.DictReader(path_or_file))
    else:
        with open(path_or_file, newline="") as fh:
            rows = list(csv.DictReader(fh))
    hills = []
    for row in rows:
        x_center = float(row["x_max"])
        y_center = float(row["y_max"])
        hills.append(
            HillParams(
                height=float(row["H"]),
                radius=support_radius(float(row["R"]), x_center, y_center, length),
                x_center=x_center,
                y_center=y_center,
            )
        )
    if not hills:
        raise ValueError("hill fixture is empty")
    return InitialCondition(tuple(hills))


def reference_ic(length: float = 20.0) -> InitialCondition:
    """The packaged 15-hill fixture used by the convergence study."""
    ref = importlib.resources.files("cdrsim").joinpath("data/convergence_hills.csv")
    with ref.open("r", newline="") as fh:
        return load_hill_csv(fh, length)
