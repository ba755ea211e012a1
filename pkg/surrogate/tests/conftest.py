"""Shared fixtures: small real datasets produced through the solver CLI.

The surrogate consumes the solver only through its public interfaces, so
fixtures shell out to ``cdrsim gen-train`` / ``gen-test`` (reduced fine
grids keep them to seconds) and tests read the resulting files.
"""

import subprocess
import sys

import pytest


def generate(kind: str, out_dir, *args) -> str:
    cmd = [
        sys.executable,
        "-m",
        "cdrsim.cli",
        kind,
        "--out",
        str(out_dir),
        "--jobs",
        "1",
        *map(str, args),
    ]
    subprocess.run(cmd, check=True, capture_output=True, text=True)
    name = "train.cdr" if kind == "gen-train" else "test.cdr"
    return str(out_dir / name)


@pytest.fixture(scope="session")
def train_file(tmp_path_factory):
    """24 training pairs, 64 -> 16 grid, full horizon."""
    out = tmp_path_factory.mktemp("train_data")
    return generate("gen-train", out, "--n", 24, "--seed", 5, "--fine-n", 64)


@pytest.fixture(scope="session")
def factorial_file(tmp_path_factory):
    """3 x 4 factorial test set, 64 -> 16 grid."""
    out = tmp_path_factory.mktemp("test_data")
    return generate("gen-test", out, "--nic", 3, "--nc", 4, "--seed", 6, "--fine-n", 64)
