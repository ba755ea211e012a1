"""The parameterized coefficient family of the model.

The solver integrates

    du/dt = div(D grad u - v u) + f(u),    du/dn = 0 on the boundary,

with a symmetric positive definite diffusion matrix D = [[d11, d12],
[d12, d22]], velocity v = (v1, v2) and logistic reaction
f(u) = f0 * u * (f1 - u).  Two presets are exposed:

* the four-parameter conditioned family used for dataset generation,
  steered by ``Conditioning`` c = (c1, c2, c3, c4):

      v1  = 3 - c1*y/L              v2  = c2 - 2*x/L
      d11 = 0.5*c3 + 4*qx + 4*qy    d12 = 0.1 + qx + 2*qy
      d22 = 0.25 + 4*qx + 2*qy      f   = 0.5*u*(c4 - u)

  with qx = (x/L - 1/2)^2, qy = (y/L - 1/2)^2;

* the fixed reference preset of the convergence study (same quadratic
  diffusion profile with d11 constant 1/2, v = (3 - 6y/L, 3 - 2x/L),
  f = 0.5*u*(2 - u)).

Coefficients are sampled at the nodes once per (grid, c) pair; the
semi-discrete right-hand side differentiates these node samples with the
same finite-difference operators it applies to the solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ScalarField
from .rng import SplitMix64

#: Sampling box for the conditioning vector, one (lo, hi) pair per component.
CONDITIONING_BOX = ((0.0, 6.0), (-1.0, 3.0), (1.0, 9.0), (1.0, 3.0))


@dataclass(frozen=True)
class Conditioning:
    """The 4-vector c steering velocity, diffusion and reaction."""

    c1: float
    c2: float
    c3: float
    c4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c1, self.c2, self.c3, self.c4)

    def in_sampling_box(self) -> bool:
        return all(
            lo <= v <= hi for v, (lo, hi) in zip(self.as_tuple(), CONDITIONING_BOX)
        )


@dataclass(frozen=True)
class ReactionParams:
    """Logistic reaction f(u) = f0 * u * (f1 - u)."""

    f0: float
    f1: float

    def __post_init__(self):
        if not (self.f0 > 0 and self.f1 > 0):
            raise ValueError(f"reaction parameters must be positive, got {self}")


def reaction(u, params: ReactionParams):
    """f(u) = f0 * u * (f1 - u); vectorizes over array input."""
    return params.f0 * u * (params.f1 - u)


class SpdViolationError(ValueError):
    """Diffusion matrix not symmetric positive definite at some node."""


@dataclass(frozen=True)
class CoefficientFields:
    """Node-sampled coefficients; d12 stored once (D symmetric by construction).

    ``reaction=None`` switches the reaction term off entirely (used by
    manufactured-solution checks).
    """

    d11: ScalarField
    d12: ScalarField
    d22: ScalarField
    v1: ScalarField
    v2: ScalarField
    reaction: ReactionParams | None

    @property
    def grid(self) -> GridSpec:
        return self.d11.grid

    def validate_spd(self) -> "CoefficientFields":
        """Check d11 > 0, d22 > 0 and det D > 0 at every node.

        Raises SpdViolationError naming the first offending node (row-major
        scan order).
        """
        d11, d22, d12 = self.d11.values, self.d22.values, self.d12.values
        ok = (d11 > 0) & (d22 > 0) & (d11 * d22 - d12 * d12 > 0)
        if not ok.all():
            i, j = np.argwhere(~ok)[0]
            h = self.grid.h
            raise SpdViolationError(
                f"diffusion matrix not SPD at node ({i}, {j}), "
                f"(x, y) = ({i * h:.6g}, {j * h:.6g}): "
                f"d11={d11[i, j]:.6g}, d12={d12[i, j]:.6g}, d22={d22[i, j]:.6g}"
            )
        return self


def _quadratic_bowls(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    x, y = grid.meshes()
    length = grid.length
    qx = (x / length - 0.5) ** 2
    qy = (y / length - 0.5) ** 2
    return qx, qy


def eval_coefficients(
    grid: GridSpec, c: Conditioning, validate: bool = True
) -> CoefficientFields:
    """Sample the conditioned coefficient family at every node of ``grid``."""
    x, y = grid.meshes()
    length = grid.length
    qx, qy = _quadratic_bowls(grid)
    fields = CoefficientFields(
        d11=ScalarField(grid, 0.5 * c.c3 + 4.0 * qx + 4.0 * qy),
        d12=ScalarField(grid, 0.1 + qx + 2.0 * qy),
        d22=ScalarField(grid, 0.25 + 4.0 * qx + 2.0 * qy),
        v1=ScalarField(grid, 3.0 - c.c1 * (y / length)),
        v2=ScalarField(grid, c.c2 - 2.0 * (x / length)),
        reaction=ReactionParams(f0=0.5, f1=c.c4),
    )
    return fields.validate_spd() if validate else fields


def reference_coefficients(grid: GridSpec, validate: bool = True) -> CoefficientFields:
    """The fixed preset used by the mesh-convergence study."""
    x, y = grid.meshes()
    length = grid.length
    qx, qy = _quadratic_bowls(grid)
    fields = CoefficientFields(
        d11=ScalarField(grid, 0.5 + 4.0 * qx + 4.0 * qy),
        d12=ScalarField(grid, 0.1 + qx + 2.0 * qy),
        d22=ScalarField(grid, 0.25 + 4.0 * qx + 2.0 * qy),
        v1=ScalarField(grid, 3.0 - 6.0 * (y / length)),
        v2=ScalarField(grid, 3.0 - 2.0 * (x / length)),
        reaction=ReactionParams(f0=0.5, f1=2.0),
    )
    return fields.validate_spd() if validate else fields


def sample_conditioning(stream: SplitMix64) -> Conditioning:
    """Draw c uniformly from the sampling box (c1, c2, c3, c4 in that order)."""
    return Conditioning(*(stream.uniform_in(lo, hi) for lo, hi in CONDITIONING_BOX))


def resolve_preset(preset) -> "tuple[str, callable]":
    """Map a preset spelling to (name, grid -> CoefficientFields).

    Accepts the string ``"reference"``, a ``Conditioning`` instance, or a
    callable already of the right signature.
    """
    if preset == "reference":
        return "reference", reference_coefficients
    if isinstance(preset, Conditioning):
        return (
            f"conditioned{preset.as_tuple()}",
            lambda grid: eval_coefficients(grid, preset),
        )
    if callable(preset):
        return getattr(preset, "__name__", "custom"), preset
    raise ValueError(f"unknown coefficient preset: {preset!r}")
