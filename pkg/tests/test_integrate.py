import csv
import math

import numpy as np
import pytest

from cdrsim.coefficients import Conditioning, eval_coefficients
from cdrsim.grid import constant_field, make_grid
from cdrsim.initial import render_ic, sample_ic
from cdrsim.integrate import (
    ScalarSystem,
    SolverBlowupError,
    StepperConfig,
    integrate_to,
    propose_dt,
    rkf23_stages,
    rkf23_step,
    write_step_log,
)
from cdrsim.rng import SplitMix64


# ---------------------------------------------------------------------------
# single step on the scalar reduction u' = -u
# ---------------------------------------------------------------------------


def decay_system():
    return ScalarSystem(lambda u: -u)


def test_hand_derived_stage_values():
    # u' = -u, u(0) = 1, dt = 0.1:
    #   k1 = -1
    #   k2 = -(1 + 0.1*(-1))            = -0.9
    #   k3 = -(1 + 0.1*(-1/4 - 0.9/4))  = -0.9525
    #   u3 = 1 + 0.1*(k1 + k2 + 4*k3)/6 = 0.9048333...
    #   u* = 1 + 0.1*(k1 + k2)/2        = 0.905
    #   err = |u* - u3| = 1/6000
    u = np.array([1.0])
    u3, ustar, err = rkf23_stages(u, 0.1, decay_system())
    assert u3[0] == pytest.approx(0.90483333333333333, abs=1e-12)
    assert ustar[0] == pytest.approx(0.905, abs=1e-12)
    assert err == pytest.approx(1.0 / 6000.0, abs=1e-12)


def test_local_error_orders_on_decay():
    # third-order solution: one-step error vs e^{-dt} scales like dt^4;
    # the embedded estimator scales like dt^3
    dts = np.logspace(-3, -1, 9)
    sol_err, est_err = [], []
    for dt in dts:
        u3, _, err = rkf23_stages(np.array([1.0]), dt, decay_system())
        sol_err.append(abs(u3[0] - math.exp(-dt)))
        est_err.append(err)
    sol_slope = np.polyfit(np.log(dts), np.log(sol_err), 1)[0]
    est_slope = np.polyfit(np.log(dts), np.log(est_err), 1)[0]
    assert sol_slope == pytest.approx(4.0, abs=0.2)
    assert est_slope == pytest.approx(3.0, abs=0.2)


def test_zero_dt_is_identity():
    grid = make_grid(11, 20.0)
    coeff = eval_coefficients(grid, Conditioning(1.0, 1.0, 2.0, 2.0))
    u = constant_field(grid, 0.5)
    res = rkf23_step(u, 0.0, coeff)
    assert np.array_equal(res.u3.values, u.values)
    assert res.err_inf == 0.0


def test_constant_equilibrium_step_is_exact():
    grid = make_grid(21, 20.0)
    coeff = eval_coefficients(grid, Conditioning(3.0, 1.0, 4.0, 2.0))
    u = constant_field(grid, 2.0)  # u = carrying capacity
    res = rkf23_step(u, 0.05, coeff)
    assert np.array_equal(res.u3.values, u.values)
    assert res.err_inf == 0.0


# ---------------------------------------------------------------------------
# controller
# ---------------------------------------------------------------------------


def test_propose_dt_at_tolerance():
    cfg = StepperConfig()
    assert propose_dt(0.01, cfg.tol, cfg) == pytest.approx(0.9 * 0.01)


def test_propose_dt_growth_clamp():
    cfg = StepperConfig()
    # (tol / (tol/1000))^(1/3) = 10 clamps to 2
    assert propose_dt(0.01, cfg.tol / 1000.0, cfg) == pytest.approx(1.8 * 0.01)


def test_propose_dt_shrink_clamp():
    cfg = StepperConfig()
    # (tol / (1000 tol))^(1/3) = 0.1 clamps to 0.3
    assert propose_dt(0.01, 1000.0 * cfg.tol, cfg) == pytest.approx(0.27 * 0.01)


def test_propose_dt_zero_error_maps_to_max_growth():
    cfg = StepperConfig()
    assert propose_dt(0.5, 0.0, cfg) == pytest.approx(0.9 * 2.0 * 0.5)


def test_propose_dt_nonfinite_error_maps_to_min_growth():
    cfg = StepperConfig()
    assert propose_dt(0.5, math.inf, cfg) == pytest.approx(0.9 * 0.3 * 0.5)
    assert propose_dt(0.5, math.nan, cfg) == pytest.approx(0.9 * 0.3 * 0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(growth_min=1.5)
    with pytest.raises(ValueError):
        StepperConfig(tol=-1.0)
    with pytest.raises(ValueError):
        StepperConfig(t_final=0.0)


# ---------------------------------------------------------------------------
# full integration
# ---------------------------------------------------------------------------


def test_zero_ic_stays_zero():
    grid = make_grid(21, 20.0)
    coeff = eval_coefficients(grid, Conditioning(5.0, 2.0, 7.0, 2.5))
    u0 = constant_field(grid, 0.0)
    uf, stats = integrate_to(u0, coeff, StepperConfig())
    assert (uf.values == 0.0).all()
    assert stats.steps_rejected == 0


def test_constant_capacity_is_fixed_point():
    grid = make_grid(21, 20.0)
    coeff = eval_coefficients(grid, Conditioning(0.0, -1.0, 1.0, 2.0))
    u0 = constant_field(grid, 2.0)
    uf, stats = integrate_to(u0, coeff, StepperConfig())
    assert np.max(np.abs(uf.values - 2.0)) <= 1e-12


def test_final_time_hit_exactly():
    grid = make_grid(15, 20.0)
    coeff = eval_coefficients(grid, Conditioning(1.0, 0.5, 3.0, 1.5))
    u0 = render_ic(sample_ic(SplitMix64(3), grid), grid)
    log = []
    cfg = StepperConfig(t_final=0.37)
    _, stats = integrate_to(u0, coeff, cfg, step_log=log)
    accepted = [r for r in log if r.accepted]
    assert sum(r.dt for r in accepted) == pytest.approx(0.37, rel=1e-12)
    # the run advances t to exactly t_final; the last accepted step is clamped
    assert stats.steps_accepted == len(accepted)


def test_step_sequence_reproducible():
    grid = make_grid(31, 20.0)
    coeff = eval_coefficients(grid, Conditioning(4.0, 2.0, 6.0, 2.0))
    u0 = render_ic(sample_ic(SplitMix64(12), grid), grid)
    cfg = StepperConfig(t_final=0.2)
    log_a, log_b = [], []
    ua, _ = integrate_to(u0, coeff, cfg, step_log=log_a)
    ub, _ = integrate_to(u0, coeff, cfg, step_log=log_b)
    assert np.array_equal(ua.values, ub.values)
    assert [(r.t, r.dt, r.err_inf, r.accepted) for r in log_a] == [
        (r.t, r.dt, r.err_inf, r.accepted) for r in log_b
    ]


def test_accepted_proposal_carried_forward():
    grid = make_grid(15, 20.0)
    coeff = eval_coefficients(grid, Conditioning(1.0, 0.5, 3.0, 1.5))
    u0 = render_ic(sample_ic(SplitMix64(3), grid), grid)
    log = []
    integrate_to(u0, coeff, StepperConfig(t_final=0.1), step_log=log)
    cfg = StepperConfig()
    for prev, cur in zip(log, log[1:]):
        expected = propose_dt(prev.dt, prev.err_inf, cfg)
        # next attempt uses the proposal unless clamped by the final time
        assert cur.dt <= expected + 1e-15


def test_blowup_aborts_with_diagnostic():
    grid = make_grid(11, 20.0)
    coeff = eval_coefficients(grid, Conditioning(1.0, 1.0, 2.0, 2.0))
    values = np.full((11, 11), 1e60)  # reaction term overflows immediately
    u0 = constant_field(grid, 0.0).copy()
    u0.values[:] = values
    with pytest.raises(SolverBlowupError, match="step size"):
        integrate_to(u0, coeff, StepperConfig(t_final=1.0, dt_min=1e-6))


def test_step_log_csv_roundtrip(tmp_path):
    grid = make_grid(15, 20.0)
    coeff = eval_coefficients(grid, Conditioning(1.0, 0.5, 3.0, 1.5))
    u0 = render_ic(sample_ic(SplitMix64(3), grid), grid)
    log = []
    integrate_to(u0, coeff, StepperConfig(t_final=0.05), step_log=log)
    path = tmp_path / "steps.csv"
    write_step_log(path, log)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(log)
    assert rows[0]["step"] == "0"
    assert float(rows[0]["dt"]) == log[0].dt
    assert {"step", "t", "dt", "err_inf", "accepted"} <= set(rows[0])


def test_avg_dt_statistic():
    grid = make_grid(15, 20.0)
    coeff = eval_coefficients(grid, Conditioning(1.0, 0.5, 3.0, 1.5))
    u0 = render_ic(sample_ic(SplitMix64(3), grid), grid)
    log = []
    _, stats = integrate_to(u0, coeff, StepperConfig(t_final=0.25), step_log=log)
    accepted = [r.dt for r in log if r.accepted]
    assert stats.avg_dt == pytest.approx(sum(accepted) / len(accepted), rel=1e-12)
