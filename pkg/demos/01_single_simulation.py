"""Integrate one problem end to end and look at the results.

Renders the packaged 15-hill initial condition on a 51 x 51 grid, evolves
it to T = 1.5 with the fixed reference coefficients, and saves three
figures: the initial state, the final state, and the step-size history of
the adaptive controller.

Run:  python3 demos/01_single_simulation.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import cdrsim as cs

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# problem setup: fixed coefficients, packaged initial condition
grid = cs.make_grid(51, 20.0)
ic = cs.reference_ic()
coeff = cs.reference_coefficients(grid)
u0 = cs.render_ic(ic, grid)

print(f"grid: {grid.n} x {grid.n}, h = {grid.h}")
print(f"initial condition: {ic.n} hills, max = {u0.values.max():.4f}")

# integrate with the default controller (tol = 1e-6) and keep a step log
log = []
u_final, stats = cs.integrate_to(u0, coeff, cs.StepperConfig(), step_log=log)
print(
    f"integrated to T = 1.5: {stats.steps_accepted} accepted / "
    f"{stats.steps_rejected} rejected steps, avg dt = {stats.avg_dt:.5f}"
)
print(f"final field range: [{u_final.values.min():.4f}, {u_final.values.max():.4f}]")

# the reaction term pushes the density toward the carrying capacity f1 = 2
# inside the populated region while convection shears it across the domain
extent = (0.0, grid.length, 0.0, grid.length)
for name, field in (("initial", u0), ("final", u_final)):
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(field.values.T, origin="lower", extent=extent, cmap="viridis")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"{name} state")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(OUT / f"01_{name}.png", dpi=120)
    plt.close(fig)

# step-size history: the controller ramps up from the 1e-4 first guess and
# then rides the stability limit of the explicit stages
accepted = [(r.t, r.dt) for r in log if r.accepted]
rejected = [(r.t, r.dt) for r in log if not r.accepted]
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.semilogy(*np.array(accepted).T, ".", ms=3, label="accepted")
if rejected:
    ax.semilogy(*np.array(rejected).T, "x", ms=4, label="rejected")
ax.set_xlabel("t")
ax.set_ylabel("dt")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "01_step_sizes.png", dpi=120)
plt.close(fig)

print(f"figures written to {OUT}/")
