"""Embedded 2(3) Runge-Kutta pair with proportional step-size control.

The three-stage pair (Fehlberg family) advances with the third-order
solution and estimates the local error from the embedded second-order one:

    stages   c = (0, 1, 1/2)
    coupling a21 = 1;  a31 = a32 = 1/4
    3rd order b  = (1/6, 1/6, 2/3)     -> U
    2nd order b* = (1/2, 1/2, 0)       -> U*

    k1 = F(u)
    k2 = F(u + dt*k1)
    k3 = F(u + dt*(k1 + k2)/4)
    U  = u + dt*(k1 + k2 + 4*k3)/6
    U* = u + dt*(k1 + k2)/2
    err = max over interior nodes |U* - U|

Stage arguments approximate the state at intermediate times, so the
Neumann boundary closure is re-applied to each of them (and to U) before
any right-hand-side evaluation; the error is measured over interior nodes
only since boundary values are linear combinations of interior ones.

The controller proposes dt_opt = 0.9 * dt * clip((tol/err)^(1/3), 0.3, 2)
and accepts a step when dt_opt >= dt; on rejection the step is recomputed
with dt_opt (iterated until acceptance, guarded by a minimum-step abort).
An accepted proposal is carried as the next step's initial guess and the
final step is clamped so the run ends at exactly t = T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientFields
from .discretize import RhsWorkspace
from .grid import ScalarField


@dataclass(frozen=True)
class StepperConfig:
    tol: float = 1e-6
    safety: float = 0.9
    growth_min: float = 0.3
    growth_max: float = 2.0
    exponent: float = 1.0 / 3.0
    dt_init0: float = 1e-4
    t_final: float = 1.5
    dt_min: float | None = None  # default 1e-12 * t_final, see resolved_dt_min

    def __post_init__(self):
        if not (0.0 < self.growth_min < 1.0 < self.growth_max):
            raise ValueError("growth factors must satisfy 0 < min < 1 < max")
        if not (self.tol > 0 and 0 < self.safety < 1):
            raise ValueError("tol must be positive and safety in (0, 1)")
        if not (self.t_final > 0 and self.dt_init0 > 0):
            raise ValueError("t_final and dt_init0 must be positive")

    @property
    def resolved_dt_min(self) -> float:
        return self.dt_min if self.dt_min is not None else 1e-12 * self.t_final


@dataclass
class StepResult:
    u3: ScalarField
    err_inf: float
    dt_used: float
    accepted: bool | None = None  # filled in by the controller


@dataclass
class RunStats:
    steps_accepted: int = 0
    steps_rejected: int = 0
    dt_sum: float = 0.0

    @property
    def avg_dt(self) -> float:
        return self.dt_sum / self.steps_accepted if self.steps_accepted else math.nan

    def accept(self, dt: float) -> None:
        self.steps_accepted += 1
        self.dt_sum += dt

    def reject(self) -> None:
        self.steps_rejected += 1


class SolverBlowupError(RuntimeError):
    """Step size underflowed the minimum; the solution is diverging."""


class ScalarSystem:
    """Single-value ODE u' = f(u); used for order checks of the stepper."""

    err_slice = np.s_[:]

    def __init__(self, f):
        self._f = f

    def rhs(self, u: np.ndarray, out: np.ndarray) -> None:
        out[...] = self._f(u)

    def close(self, u: np.ndarray) -> None:
        pass


def rkf23_stages(
    u: np.ndarray, dt: float, system
) -> tuple[np.ndarray, np.ndarray, float]:
    """One raw step on array state: returns (u3, u_star, err_inf).

    ``system`` provides rhs(u, out), close(u) and err_slice.  A non-finite
    stage propagates into err_inf (= inf), which the controller treats as a
    rejection.
    """
    with np.errstate(invalid="ignore", over="ignore"):
        k1 = np.zeros_like(u)
        system.rhs(u, k1)

        v = u + dt * k1
        system.close(v)
        k2 = np.zeros_like(u)
        system.rhs(v, k2)

        v = u + (0.25 * dt) * (k1 + k2)
        system.close(v)
        k3 = np.zeros_like(u)
        system.rhs(v, k3)

        u3 = u + (dt / 6.0) * (k1 + k2 + 4.0 * k3)
        system.close(u3)
        u_star = u + (0.5 * dt) * (k1 + k2)

        diff = u_star[system.err_slice] - u3[system.err_slice]
        err = float(np.max(np.abs(diff))) if diff.size else 0.0
    if not math.isfinite(err):
        err = math.inf
    return u3, u_star, err


def rkf23_step(
    u_m: ScalarField,
    dt: float,
    coeff: CoefficientFields,
    ws: RhsWorkspace | None = None,
) -> StepResult:
    """One embedded step of the PDE system from a boundary-closed state."""
    if dt < 0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    ws = ws if ws is not None else RhsWorkspace(coeff)
    if dt == 0.0:
        return StepResult(u3=u_m.copy(), err_inf=0.0, dt_used=0.0)
    u3, _, err = rkf23_stages(u_m.values, dt, ws)
    return StepResult(u3=ScalarField(u_m.grid, u3), err_inf=err, dt_used=dt)


def propose_dt(dt: float, err_inf: float, cfg: StepperConfig) -> float:
    """Controller proposal 0.9 * dt * clip((tol/err)^(1/3), 0.3, 2).

    A zero error estimate maps to the maximal growth factor, a non-finite
    one to the minimal.
    """
    if not (dt > 0):
        raise ValueError(f"dt must be positive, got {dt}")
    if not math.isfinite(err_inf):
        ratio = cfg.growth_min
    elif err_inf == 0.0:
        ratio = cfg.growth_max
    else:
        ratio = min(
            cfg.growth_max, max(cfg.growth_min, (cfg.tol / err_inf) ** cfg.exponent)
        )
    return cfg.safety * dt * ratio


@dataclass
class StepRecord:
    index: int
    t: float
    dt: float
    err_inf: float
    accepted: bool


def integrate_to(
    u0: ScalarField,
    coeff: CoefficientFields,
    cfg: StepperConfig,
    step_log: list[StepRecord] | None = None,
) -> tuple[ScalarField, RunStats]:
    """Advance the PDE from t=0 to exactly t=cfg.t_final.

    The working copy of the initial state is boundary-closed before the
    first step (a no-op for already-closed fields).  Returns the final
    field and the accept/reject statistics; appends one StepRecord per
    attempted step to ``step_log`` when given.
    """
    ws = RhsWorkspace(coeff)
    u = u0.values.copy()
    ws.close(u)

    t = 0.0
    dt_guess = cfg.dt_init0
    t_final = cfg.t_final
    dt_min = cfg.resolved_dt_min
    stats = RunStats()
    attempt = 0

    while t < t_final:
        remaining = t_final - t
        clamped = dt_guess >= remaining
        dt = remaining if clamped else dt_guess

        u3, _, err = rkf23_stages(u, dt, ws)
        dt_opt = propose_dt(dt, err, cfg)
        accepted = dt_opt >= dt
        if step_log is not None:
            step_log.append(StepRecord(attempt, t, dt, err, accepted))
        attempt += 1

        if accepted:
            u = u3
            t = t_final if clamped else t + dt
            stats.accept(dt)
            dt_guess = dt_opt
        else:
            stats.reject()
            dt_guess = dt_opt
            if dt_guess < dt_min:
                raise SolverBlowupError(
                    f"step size {dt_guess:.3e} fell below {dt_min:.3e} at "
                    f"t={t:.6g} (err_inf={err:.3e}); "
                    + ws.diagnose_nonfinite(u3)
                )

    return ScalarField(u0.grid, u), stats


def write_step_log(path, records: list[StepRecord]) -> None:
    """Step log as CSV: index, t, dt, err_inf, accepted."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "t", "dt", "err_inf", "accepted"])
        for rec in records:
            writer.writerow(
                [rec.index, repr(rec.t), repr(rec.dt), repr(rec.err_inf), int(rec.accepted)]
            )
