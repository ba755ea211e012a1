"""Spatial semi-discretization: stencils, right-hand side, boundary closure.

Space is discretized with second-order central differences at interior
nodes.  Writing the divergence form out with the chain rule, the
semi-discrete time derivative at an interior node is

    F = -(Dx v1 + Dy v2) * u
        + (Dx d11 + Dy d12 - v1) * Dx u
        + (Dx d12 + Dy d22 - v2) * Dy u
        + d11 * Dxx u + 2*d12 * Dxy u + d22 * Dyy u
        + f(u)

where Dx, Dy, Dxx, Dyy, Dxy are the central-difference operators below and
the coefficient derivatives are discrete derivatives of the node-sampled
coefficient fields (pre-computed once per grid/coefficient pair, they are
time independent).

The zero-Neumann boundary is closed with the second-order one-sided stencil
(-1.5*u0 + 2*u1 - 0.5*u2)/h = 0, solved for the boundary node:
u0 = (4*u1 - u2)/3.  The sweep order is fixed: first the two y-edges
(j = 0 and j = N-1, corners excluded), then the two x-edges (i = 0 and
i = N-1, corners included), which makes the corner values functions of the
left/right interior columns.  Boundary nodes therefore carry no degrees of
freedom; stepping and error control act on interior nodes only.
"""

from __future__ import annotations

import numpy as np

from .coefficients import CoefficientFields
from .grid import ScalarField

# ---------------------------------------------------------------------------
# Central-difference operators.  Array forms return the interior block
# (n-2, n-2); fd_apply evaluates a single interior node for spot checks.
# ---------------------------------------------------------------------------


def fd_dx(values: np.ndarray, h: float) -> np.ndarray:
    return (values[2:, 1:-1] - values[:-2, 1:-1]) / (2.0 * h)


def fd_dy(values: np.ndarray, h: float) -> np.ndarray:
    return (values[1:-1, 2:] - values[1:-1, :-2]) / (2.0 * h)


def fd_dxx(values: np.ndarray, h: float) -> np.ndarray:
    return (values[2:, 1:-1] - 2.0 * values[1:-1, 1:-1] + values[:-2, 1:-1]) / (h * h)


def fd_dyy(values: np.ndarray, h: float) -> np.ndarray:
    return (values[1:-1, 2:] - 2.0 * values[1:-1, 1:-1] + values[1:-1, :-2]) / (h * h)


def fd_dxy(values: np.ndarray, h: float) -> np.ndarray:
    return (
        values[2:, 2:] - values[2:, :-2] - values[:-2, 2:] + values[:-2, :-2]
    ) / (4.0 * h * h)


_FD_OPERATORS = {
    "dx": fd_dx,
    "dy": fd_dy,
    "dxx": fd_dxx,
    "dyy": fd_dyy,
    "dxy": fd_dxy,
}


def fd_apply(field: ScalarField, which: str, i: int, j: int) -> float:
    """Evaluate one finite-difference operator at interior node (i, j)."""
    try:
        op = _FD_OPERATORS[which]
    except KeyError:
        raise ValueError(
            f"unknown operator {which!r}, expected one of {sorted(_FD_OPERATORS)}"
        ) from None
    n = field.grid.n
    if not (1 <= i <= n - 2 and 1 <= j <= n - 2):
        raise IndexError(
            f"({i}, {j}) is not an interior node of an {n}x{n} grid"
        )
    return float(op(field.values, field.grid.h)[i - 1, j - 1])


# ---------------------------------------------------------------------------
# Boundary closure.
# ---------------------------------------------------------------------------


def close_boundary(values: np.ndarray) -> np.ndarray:
    """Overwrite boundary rows/columns with the one-sided Neumann closure.

    In place on the array; returns it for convenience.  Idempotent: every
    formula's inputs are fixed after the first pass.

    The boundary value (4*u1 - u2)/3 is evaluated as u1 + (u1 - u2)/3 so
    constant states are reproduced bitwise; otherwise the one-ulp closure
    error gets amplified through the diffusion stencil once the controller
    has grown the step far beyond the stability limit (the error estimate
    is exactly zero on constants, so nothing holds the step size back).
    """
    # y-edges (bottom j=0, top j=N-1), corners excluded
    values[1:-1, 0] = values[1:-1, 1] + (values[1:-1, 1] - values[1:-1, 2]) / 3.0
    values[1:-1, -1] = values[1:-1, -2] + (values[1:-1, -2] - values[1:-1, -3]) / 3.0
    # x-edges (left i=0, right i=N-1), corners included
    values[0, :] = values[1, :] + (values[1, :] - values[2, :]) / 3.0
    values[-1, :] = values[-2, :] + (values[-2, :] - values[-3, :]) / 3.0
    return values


def apply_boundary_closure(field: ScalarField) -> ScalarField:
    """Closure on a field value; returns a new field, input untouched."""
    return ScalarField(field.grid, close_boundary(field.values.copy()))


# ---------------------------------------------------------------------------
# Right-hand side workspace and kernel.
# ---------------------------------------------------------------------------


class RhsWorkspace:
    """Pre-computed coefficient data and scratch storage for one (grid, c) pair.

    Immutable after construction apart from the private scratch array, so a
    workspace may be shared by sequential stage evaluations but not by
    concurrent ones; independent runs build independent workspaces.
    """

    def __init__(self, coeff: CoefficientFields):
        grid = coeff.grid
        h = grid.h
        self.grid = grid
        self.coeff = coeff

        d11 = coeff.d11.values
        d12 = coeff.d12.values
        d22 = coeff.d22.values
        v1 = coeff.v1.values
        v2 = coeff.v2.values

        # Discrete derivatives of the node-sampled coefficients (interior).
        self.div_v = fd_dx(v1, h) + fd_dy(v2, h)
        self.conv_x = fd_dx(d11, h) + fd_dy(d12, h) - v1[1:-1, 1:-1]
        self.conv_y = fd_dx(d12, h) + fd_dy(d22, h) - v2[1:-1, 1:-1]

        # Hot-path arrays with the stencil scale factors folded in.
        self._a = -self.div_v
        self._bx = self.conv_x / (2.0 * h)
        self._by = self.conv_y / (2.0 * h)
        self._d11h = d11[1:-1, 1:-1] / (h * h)
        self._d22h = d22[1:-1, 1:-1] / (h * h)
        self._dxyh = d12[1:-1, 1:-1] / (2.0 * h * h)
        if coeff.reaction is not None:
            self._f0 = coeff.reaction.f0
            self._f1 = coeff.reaction.f1
        else:
            self._f0 = 0.0
            self._f1 = 0.0

        self._t = np.empty((grid.n - 2, grid.n - 2))

    def rhs(self, u: np.ndarray, out: np.ndarray) -> None:
        """Write F into the interior of ``out``; boundary entries untouched.

        Non-finite inputs propagate silently (overflow during blow-up is
        expected); callers detect them via the step error estimate or
        ``rhs_interior``.
        """
        with np.errstate(invalid="ignore", over="ignore"):
            self._rhs(u, out)

    def _rhs(self, u: np.ndarray, out: np.ndarray) -> None:
        ui = u[1:-1, 1:-1]
        acc = out[1:-1, 1:-1]
        t = self._t

        np.multiply(self._a, ui, out=acc)

        np.subtract(u[2:, 1:-1], u[:-2, 1:-1], out=t)
        t *= self._bx
        acc += t

        np.subtract(u[1:-1, 2:], u[1:-1, :-2], out=t)
        t *= self._by
        acc += t

        np.add(u[2:, 1:-1], u[:-2, 1:-1], out=t)
        t -= ui
        t -= ui
        t *= self._d11h
        acc += t

        np.add(u[1:-1, 2:], u[1:-1, :-2], out=t)
        t -= ui
        t -= ui
        t *= self._d22h
        acc += t

        np.subtract(u[2:, 2:], u[2:, :-2], out=t)
        t -= u[:-2, 2:]
        t += u[:-2, :-2]
        t *= self._dxyh
        acc += t

        np.subtract(self._f1, ui, out=t)
        t *= ui
        t *= self._f0
        acc += t

    def close(self, u: np.ndarray) -> None:
        close_boundary(u)

    # interior slice over which the step error is measured
    err_slice = np.s_[1:-1, 1:-1]

    def diagnose_nonfinite(self, u: np.ndarray) -> str:
        """Locate the first non-finite term of F(u), term by term (slow path)."""
        h = self.grid.h
        with np.errstate(all="ignore"):
            return self._diagnose(u, h)

    def _diagnose(self, u: np.ndarray, h: float) -> str:
        terms = {
            "divergence": self._a * u[1:-1, 1:-1],
            "convection-x": self.conv_x * fd_dx(u, h),
            "convection-y": self.conv_y * fd_dy(u, h),
            "diffusion-xx": self.coeff.d11.values[1:-1, 1:-1] * fd_dxx(u, h),
            "diffusion-yy": self.coeff.d22.values[1:-1, 1:-1] * fd_dyy(u, h),
            "diffusion-xy": 2.0 * self.coeff.d12.values[1:-1, 1:-1] * fd_dxy(u, h),
            "reaction": self._f0 * u[1:-1, 1:-1] * (self._f1 - u[1:-1, 1:-1]),
        }
        for name, term in terms.items():
            if not np.isfinite(term).all():
                bi, bj = np.argwhere(~np.isfinite(term))[0]
                return (
                    f"non-finite {name} term at interior node "
                    f"({bi + 1}, {bj + 1})"
                )
        return "all right-hand-side terms finite"


def rhs_interior(
    u: ScalarField, coeff: CoefficientFields, ws: RhsWorkspace | None = None
) -> ScalarField:
    """Semi-discrete right-hand side as a field (boundary entries zero).

    Raises with a node/term diagnostic if the evaluation produces a
    non-finite value.
    """
    ws = ws if ws is not None else RhsWorkspace(coeff)
    out = np.zeros_like(u.values)
    ws.rhs(u.values, out)
    if not np.isfinite(out).all():
        raise ArithmeticError(ws.diagnose_nonfinite(u.values))
    return ScalarField(u.grid, out)
