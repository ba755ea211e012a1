"""Train a small surrogate on freshly generated data and study it.

End-to-end round trip at demo scale: generate 96 training pairs and a
4 x 6 factorial test set with the solver CLI (reduced 64 -> 16 grids),
train for 8 epochs, then run the factorial error study and print the
rankings.  Takes a couple of minutes on CPU.

Run:  python3 demos/01_train_and_analyze.py
"""

import pathlib
import subprocess
import sys
import tempfile

import numpy as np

from cdrsurrogate import (
    CdrReader,
    SurrogateConfig,
    build_error_matrix,
    correlations,
    rank_conditionings,
    torch_predictor,
    train,
    write_study,
)

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)


def solver(*args):
    subprocess.run(
        [sys.executable, "-m", "cdrsim.cli", *map(str, args)],
        check=True,
        capture_output=True,
    )


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    print("generating data through the solver CLI ...")
    solver("gen-train", "--n", 96, "--seed", 11, "--out", tmp, "--fine-n", 64)
    solver("gen-test", "--nic", 4, "--nc", 6, "--seed", 12, "--out", tmp, "--fine-n", 64)

    # small width for the demo; the published configuration is the default
    cfg = SurrogateConfig(base_channels=16, epochs=8)
    model, history = train(tmp / "train.cdr", cfg=cfg, out_dir=OUT / "run")
    print(f"loss: {history[0]['train_loss']:.3e} -> {history[-1]['train_loss']:.3e}")

    reader = CdrReader(tmp / "test.cdr")
    matrix = build_error_matrix(torch_predictor(model), reader)
    n_ic, n_c = reader.factorial_shape()
    c_by_group = np.zeros((n_c, 4))
    for k in range(len(reader)):
        _, k2 = reader.factorial_index(k)
        c_by_group[k2] = reader.records[k]["c"]
    write_study(OUT / "study", matrix, c_by_group)

print("\nconditioning groups, worst to best (mean normalized Huber):")
for row in rank_conditionings(matrix, c_by_group):
    print(
        f"  rank {row['rank']:>2}  c=({row['c1']:.2f}, {row['c2']:+.2f}, "
        f"{row['c3']:.2f}, {row['c4']:.2f})  {row['mean_nhuber']:.3e}"
    )
print("\nper-dimension correlation with group error:")
for row in correlations(matrix, c_by_group):
    print(f"  c{row['dim']}: pearson {row['pearson_r']:+.3f}  spearman {row['spearman_rho']:+.3f}")
print(f"\nCSVs written to {OUT}/study; checkpoint and loss curve in {OUT}/run")
