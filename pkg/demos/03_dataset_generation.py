"""Generate a small dataset and look inside the container.

Produces a 2 x 3 factorial test set (every combination of two random
initial conditions with three random conditioning vectors) at reduced
resolution, prints the manifest summary, and plots one (X0, XM) pair.

The full-resolution equivalent of the published pipeline is
    cdrsim gen-train --n 10000 --seed 1 --out data/
    cdrsim gen-test  --nic 50 --nc 50 --seed 2 --out data/
which solves on 256 x 256 and stores 64 x 64 block means (float32).

Run:  python3 demos/03_dataset_generation.py
"""

import pathlib
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import cdrsim as cs

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# reduced resolution keeps this demo at a few seconds; the file layout and
# seed derivation are identical to the full 256 -> 64 pipeline
pipe = cs.PipelineConfig(fine_n=64, coarse_factor=4)

with tempfile.TemporaryDirectory() as tmp:
    path = pathlib.Path(tmp) / "demo.cdr"
    manifest = cs.gen_test_set(path, n_ic=2, n_c=3, seed=2024, pipe=pipe)
    print(f"wrote {len(manifest['records'])} records, {path.stat().st_size} bytes")

    with cs.DatasetFile(path) as ds:
        m = ds.manifest
        print(f"kind={m['kind']}  grid {m['grid']['fine_n']} -> {m['grid']['coarse_n']}")
        print(f"rng: {m['rng']['algorithm']} seed {m['rng']['master_seed']}")
        for rec in m["records"]:
            c = ", ".join(f"{v:.3f}" for v in rec["c"])
            print(
                f"  record {rec['index']} (k1={rec['k1']}, k2={rec['k2']}): "
                f"c=({c}), {rec['steps_accepted']} steps, avg dt {rec['avg_dt']:.5f}"
            )

        # a record regenerated from its manifest seeds is bit-identical to
        # the stored payload, so any sample can be audited standalone
        rec = ds.record_meta(0)
        pair = cs.regenerate_record(ds.manifest, rec)
        x0, xm, _ = ds.read_record(0)

fig, axes = plt.subplots(1, 2, figsize=(9, 4))
for ax, field, title in ((axes[0], x0, "X0"), (axes[1], xm, "XM")):
    im = ax.imshow(field.T, origin="lower", cmap="viridis")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
fig.tight_layout()
fig.savefig(OUT / "03_sample_pair.png", dpi=120)
plt.close(fig)
print(f"sample pair plotted to {OUT}/03_sample_pair.png")
