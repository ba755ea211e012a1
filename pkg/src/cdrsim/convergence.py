"""Mesh-refinement study: nested grids, discrete norms, observed order.

Successive grids share nodes (N -> 2N-1 keeps h exactly halving), so a
fine solution restricts to a coarse grid by index picking and the
discretization error can be measured without an exact solution:

    ||U^h - U^(h/2)||_2   = sqrt( mean over all nodes of the squared
                            difference at coincident nodes )
    ||U^h - U^(h/2)||_inf = max absolute difference

    EOC(h) = log2( ||U^h - U^(h/2)|| / ||U^(h/2) - U^(h/4)|| )

The study integrates one fixed initial condition on each level with a
shared stepper configuration, reports the successive-difference norms,
the observed orders, relative errors against the finest computed level,
the average accepted step size, and wall time (reported only; it is
hardware-dependent).
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .coefficients import resolve_preset
from .discretize import apply_boundary_closure
from .grid import GridSpec, ScalarField, make_grid
from .initial import InitialCondition, render_ic
from .integrate import RunStats, StepperConfig, integrate_to


def mesh_sequence(n0: int, length: float, levels: int) -> list[GridSpec]:
    """Nested grids N, 2N-1, 4N-3, ...; each level halves h exactly."""
    if levels < 1:
        raise ValueError("need at least one level")
    grids = []
    n = n0
    for _ in range(levels):
        grids.append(make_grid(n, length))
        n = 2 * n - 1
    return grids


def restrict_fine_to_coarse(fine: ScalarField, coarse_grid: GridSpec) -> ScalarField:
    """Pick the fine values at the coincident coarse nodes (2i, 2j)."""
    if fine.grid.n != 2 * coarse_grid.n - 1:
        raise ValueError(
            f"grids are not nested: fine n={fine.grid.n}, "
            f"coarse n={coarse_grid.n} (need fine = 2*coarse - 1)"
        )
    return ScalarField(coarse_grid, fine.values[::2, ::2].copy())


def grid_norms(a, b) -> tuple[float, float]:
    """(RMS, max-abs) of the difference of two same-shape fields.

    Accepts ScalarField or plain arrays; all nodes enter the norms.
    """
    av = a.values if isinstance(a, ScalarField) else np.asarray(a, dtype=np.float64)
    bv = b.values if isinstance(b, ScalarField) else np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise ValueError(f"shape mismatch: {av.shape} vs {bv.shape}")
    diff = av - bv
    l2 = float(np.sqrt(np.mean(diff * diff)))
    linf = float(np.max(np.abs(diff)))
    return l2, linf


def eoc(e_coarse: float, e_fine: float) -> float:
    """Observed convergence order log2(e_coarse / e_fine)."""
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError(f"errors must be positive, got {e_coarse}, {e_fine}")
    return math.log2(e_coarse / e_fine)


@dataclass
class StudyLevel:
    grid: GridSpec
    stats: RunStats
    wall_seconds: float
    # successive-difference norms against the next finer level (None on the
    # finest level), observed orders (need three consecutive levels), and
    # relative errors against the finest computed level
    diff_l2: float | None = None
    diff_linf: float | None = None
    eoc_l2: float | None = None
    eoc_linf: float | None = None
    rel_l2: float | None = None
    rel_linf: float | None = None

    @property
    def h_over_length(self) -> float:
        return self.grid.h / self.grid.length


@dataclass
class StudyReport:
    preset_name: str
    config: StepperConfig
    levels: list[StudyLevel] = field(default_factory=list)

    def rows(self) -> list[dict]:
        return [
            {
                "h_over_L": lv.h_over_length,
                "n": lv.grid.n,
                "diff_l2": lv.diff_l2,
                "diff_linf": lv.diff_linf,
                "eoc_l2": lv.eoc_l2,
                "eoc_linf": lv.eoc_linf,
                "rel_l2": lv.rel_l2,
                "rel_linf": lv.rel_linf,
                "avg_dt": lv.stats.avg_dt,
                "steps_accepted": lv.stats.steps_accepted,
                "steps_rejected": lv.stats.steps_rejected,
                "wall_seconds": lv.wall_seconds,
            }
            for lv in self.levels
        ]


def run_study(
    ic: InitialCondition,
    preset,
    levels: int = 4,
    n0: int = 51,
    length: float = 20.0,
    cfg: StepperConfig | None = None,
) -> StudyReport:
    """Integrate the same problem on ``levels`` nested grids and compare.

    Unrounded values are published; rounding is left to presentation.
    """
    if levels < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    cfg = cfg or StepperConfig()
    preset_name, coeff_fn = resolve_preset(preset)

    report = StudyReport(preset_name=preset_name, config=cfg)
    finals: list[ScalarField] = []
    for grid in mesh_sequence(n0, length, levels):
        coeff = coeff_fn(grid)
        u0 = apply_boundary_closure(render_ic(ic, grid))
        t0 = time.perf_counter()
        u_final, stats = integrate_to(u0, coeff, cfg)
        wall = time.perf_counter() - t0
        finals.append(u_final)
        report.levels.append(StudyLevel(grid=grid, stats=stats, wall_seconds=wall))

    # successive-difference norms on the coarse grid of each pair
    diffs = []
    for k, lv in enumerate(report.levels[:-1]):
        restricted = restrict_fine_to_coarse(finals[k + 1], lv.grid)
        lv.diff_l2, lv.diff_linf = grid_norms(finals[k], restricted)
        diffs.append((lv.diff_l2, lv.diff_linf))

    for lv, (e2, einf), (f2, finf) in zip(report.levels, diffs, diffs[1:]):
        lv.eoc_l2 = eoc(e2, f2)
        lv.eoc_linf = eoc(einf, finf)

    # relative errors against the finest level, restricted level by level;
    # numerator and denominator share the node set of the coarse grid
    restricted_ref = finals[-1]
    for lv, u in zip(reversed(report.levels[:-1]), reversed(finals[:-1])):
        restricted_ref = restrict_fine_to_coarse(restricted_ref, lv.grid)
        err_l2, err_linf = grid_norms(u, restricted_ref)
        rv = restricted_ref.values
        lv.rel_l2 = err_l2 / float(np.sqrt(np.mean(rv * rv)))
        lv.rel_linf = err_linf / float(np.max(np.abs(rv)))
    report.levels[-1].rel_l2 = 0.0
    report.levels[-1].rel_linf = 0.0
    return report


def write_report_csv(path, report: StudyReport) -> None:
    rows = report.rows()
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})


def write_loglog_csv(path, report: StudyReport) -> None:
    """(h, error) pairs for log-log plotting of the successive differences."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["h", "diff_l2", "diff_linf"])
        for lv in report.levels:
            if lv.diff_l2 is not None:
                writer.writerow([lv.grid.h, lv.diff_l2, lv.diff_linf])
