import io

import numpy as np
import pytest

from cdrsim.discretize import close_boundary
from cdrsim.grid import make_grid
from cdrsim.initial import (
    HILL_COUNT_RANGE,
    HillParams,
    InitialCondition,
    hill_bump,
    hill_profile,
    load_hill_csv,
    reference_ic,
    render_ic,
    sample_ic,
    support_radius,
)
from cdrsim.rng import SplitMix64


def test_profile_center_height():
    assert hill_profile(0.0, height=0.7, radius=3.0) == pytest.approx(0.7)


def test_profile_vanishes_at_support_edge():
    assert hill_profile(3.0, height=0.7, radius=3.0) == 0.0
    assert hill_profile(4.5, height=0.7, radius=3.0) == 0.0


def test_profile_half_radius():
    # g(a/2) = (2H/a^3) * (a/2)^2 * a = H/2
    assert hill_profile(1.5, height=0.7, radius=3.0) == pytest.approx(0.35)


def test_profile_c1_at_edge():
    # continuous with zero slope where the support ends
    h = 1e-6
    H, a = 0.9, 2.0
    inside = hill_profile(a - h, H, a)
    assert inside == pytest.approx(0.0, abs=1e-9)
    slope = (hill_profile(a, H, a) - hill_profile(a - h, H, a)) / h
    assert slope == pytest.approx(0.0, abs=1e-5)


def test_profile_nonnegative_vectorized():
    r = np.linspace(0.0, 5.0, 400)
    g = hill_profile(r, height=0.8, radius=2.5)
    assert g.shape == r.shape
    assert (g >= 0.0).all()


def test_bump_center_and_support():
    p = HillParams(height=0.5, radius=2.0, x_center=10.0, y_center=8.0)
    assert hill_bump(10.0, 8.0, p) == pytest.approx(0.5)
    assert hill_bump(12.0, 8.0, p) == 0.0  # distance exactly a
    assert hill_bump(10.0, 8.0 + 1.0, p) == pytest.approx(
        hill_profile(1.0, 0.5, 2.0)
    )


def test_support_radius_endpoints():
    # R = 0 gives the lower bound L/10; R = 1 the center's boundary distance
    assert support_radius(0.0, 7.0, 9.0, 20.0) == pytest.approx(2.0)
    assert support_radius(1.0, 10.0, 10.0, 20.0) == pytest.approx(10.0)


def test_sampler_determinism():
    grid = make_grid(51, 20.0)
    a = sample_ic(SplitMix64(99), grid)
    b = sample_ic(SplitMix64(99), grid)
    assert a == b
    assert a != sample_ic(SplitMix64(100), grid)


def test_sampler_invariants_many_seeds():
    grid = make_grid(51, 20.0)
    length = grid.length
    lo, hi = HILL_COUNT_RANGE
    for seed in range(10000):
        ic = sample_ic(SplitMix64(seed), grid)
        assert lo <= ic.n <= hi
        for p in ic.hills:
            assert 0.0 < p.height < 1.0
            assert length / 5.0 <= p.x_center < 4.0 * length / 5.0
            assert length / 5.0 <= p.y_center < 4.0 * length / 5.0
            bound = min(
                p.x_center, length - p.x_center, p.y_center, length - p.y_center
            )
            assert length / 10.0 <= p.radius <= bound


def test_render_empty_is_zero():
    grid = make_grid(21, 20.0)
    f = render_ic(InitialCondition(()), grid)
    assert (f.values == 0.0).all()


def test_render_single_hill_max():
    grid = make_grid(41, 20.0)
    # center on a node: max equals the height
    p_on = HillParams(height=1.0, radius=3.0, x_center=10.0, y_center=10.0)
    f = render_ic(InitialCondition((p_on,)), grid)
    assert f.values.max() == pytest.approx(1.0)
    # center off the nodes: strictly below the height
    p_off = HillParams(height=1.0, radius=3.0, x_center=10.17, y_center=9.93)
    f = render_ic(InitialCondition((p_off,)), grid)
    assert 0.0 < f.values.max() < 1.0


def test_render_nonnegative_and_interior_support():
    grid = make_grid(64, 20.0)
    ic = sample_ic(SplitMix64(5), grid)
    f = render_ic(ic, grid)
    assert (f.values >= 0.0).all()
    # support bound keeps hills inside the closed domain
    assert f.values[0, :].max() == 0.0
    assert f.values[-1, :].max() == 0.0


def test_render_is_additive_over_hills():
    grid = make_grid(33, 20.0)
    ic1 = sample_ic(SplitMix64(1), grid)
    ic2 = sample_ic(SplitMix64(2), grid)
    combined = render_ic(ic1 + ic2, grid)
    separate = render_ic(ic1, grid).values + render_ic(ic2, grid).values
    assert np.allclose(combined.values, separate, rtol=1e-13, atol=1e-15)


def test_rendered_ic_closure_residual_second_order():
    # single hill whose support touches the edge midpoint: at that node the
    # stencil reads the smooth profile interior (away from the support
    # boundary curve) and its Neumann residual must shrink at second order
    def residual_at_tangent(n):
        grid = make_grid(n, 20.0)
        p = HillParams(height=1.0, radius=10.0, x_center=10.0, y_center=10.0)
        v = render_ic(InitialCondition((p,)), grid).values
        h = grid.h
        i = (n - 1) // 2  # node at x = L/2
        return abs((-1.5 * v[i, 0] + 2.0 * v[i, 1] - 0.5 * v[i, 2]) / h)

    r1, r2, r3 = (residual_at_tangent(n) for n in (51, 101, 201))
    assert np.log2(r1 / r2) >= 2.0 - 1e-6
    assert np.log2(r2 / r3) >= 2.0 - 1e-6


def test_closure_of_rendered_field_is_small_perturbation():
    grid = make_grid(51, 20.0)
    f = render_ic(reference_ic(), grid)
    closed = f.values.copy()
    close_boundary(closed)
    # interior untouched, boundary only re-derived
    assert np.array_equal(closed[1:-1, 1:-1], f.values[1:-1, 1:-1])


def test_fixture_loader_roundtrip():
    csv_text = "i,H,x_max,y_max,R\n1,0.5,10.0,10.0,0.0\n2,0.25,8.0,14.0,1.0\n"
    ic = load_hill_csv(io.StringIO(csv_text), length=20.0)
    assert ic.n == 2
    assert ic.hills[0].radius == pytest.approx(2.0)  # R=0 lower endpoint
    assert ic.hills[1].radius == pytest.approx(6.0)  # min(8,12,14,6) with R=1
    with pytest.raises(ValueError):
        load_hill_csv(io.StringIO("i,H,x_max,y_max,R\n"), length=20.0)


def test_packaged_study_fixture():
    ic = reference_ic()
    assert ic.n == 15
    assert ic.hills[0].height == pytest.approx(0.45)
    assert ic.hills[0].x_center == pytest.approx(10.18)
    # hill 2 has R = 0, so its radius is the lower bound L/10 = 2
    assert ic.hills[1].radius == pytest.approx(2.0)
    # every radius obeys the support bound
    for p in ic.hills:
        bound = min(p.x_center, 20.0 - p.x_center, p.y_center, 20.0 - p.y_center)
        assert 2.0 <= p.radius <= bound
