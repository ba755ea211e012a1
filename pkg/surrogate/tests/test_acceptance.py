"""Acceptance suite for the surrogate component.

Trainability criteria run on real solver data at desk scale: a shared
1000-pair dataset is generated through the solver CLI at reduced fine
resolution (the criteria pin pair counts, step counts and loss ratios,
not the field resolution).  Expect roughly half an hour for the two slow
tests on a laptop-class CPU.
"""

import numpy as np
import pytest
import torch
from torch.utils.data import DataLoader

from cdrsurrogate.analysis import correlations, grouped_stats
from cdrsurrogate.config import SurrogateConfig
from cdrsurrogate.data import CdrReader, FieldPairs
from cdrsurrogate.model import ConditionedUNet
from cdrsurrogate.training import (
    cosine_lr,
    huber_loss,
    make_optimizer,
    train,
    train_step,
)

from conftest import generate


def ok(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


@pytest.fixture(scope="module")
def desk_scale_file(tmp_path_factory):
    """1000 training pairs through the real pipeline (fine 128 -> coarse 32).

    Generation takes a few minutes; set CDR_DESK_DATA to a directory to
    cache the file across test sessions (it is seed-determined, so reuse
    is exact).
    """
    import os
    import pathlib

    cache = os.environ.get("CDR_DESK_DATA")
    if cache:
        out = pathlib.Path(cache)
        out.mkdir(parents=True, exist_ok=True)
        cached = out / "train.cdr"
        if cached.exists():
            return str(cached)
    else:
        out = tmp_path_factory.mktemp("desk_scale")
    return generate(
        "gen-train", out, "--n", 1000, "--seed", 42, "--fine-n", 128, "--jobs", 2
    )


@pytest.mark.slow
def test_single_batch_overfit(desk_scale_file):
    torch.manual_seed(0)
    cfg = SurrogateConfig()
    reader = CdrReader(desk_scale_file)
    loader = DataLoader(FieldPairs(reader, range(16)), batch_size=16)
    batch = next(iter(loader))

    model = ConditionedUNet(cfg)
    optimizer = make_optimizer(model, cfg)
    loss = float("inf")
    for step in range(500):
        loss = train_step(model, optimizer, batch, cfg)
        if loss < 1e-3:
            break
    assert loss < 1e-3, f"single-batch loss stuck at {loss:.3e} after 500 steps"
    ok(f"single-batch overfit reached Huber loss {loss:.2e} in {step + 1} steps")


@pytest.mark.slow
def test_desk_scale_training_loss_drops(desk_scale_file, tmp_path):
    cfg = SurrogateConfig(epochs=25)  # annealing horizon matches the run
    _, history = train(desk_scale_file, cfg=cfg, out_dir=tmp_path, seed=1)
    first, last = history[0]["train_loss"], history[-1]["train_loss"]
    assert len(history) == 25
    assert last < 0.2 * first, f"loss only went {first:.3e} -> {last:.3e}"
    assert (tmp_path / "loss_curve.csv").exists()
    assert (tmp_path / "model.pt").exists()
    ok(
        f"desk-scale training (1000 pairs, 25 epochs): epoch-1 loss "
        f"{first:.3e} -> epoch-25 loss {last:.3e} ({last / first:.1%})"
    )


def test_architecture_invariants():
    torch.manual_seed(3)
    model = ConditionedUNet().eval()

    x = torch.randn(2, 1, 64, 64)
    a = model(x, torch.randn(2, 4))
    b = model(x, 37.0 + 5.0 * torch.randn(2, 4))
    assert torch.equal(a, b)  # FiLM zero-init: exact c-independence

    for batch in (1, 2, 4, 8, 16):
        out = model(torch.randn(batch, 1, 64, 64), torch.randn(batch, 4))
        assert out.shape == (batch, 1, 64, 64)

    x = torch.randn(5, 1, 64, 64)
    c = torch.randn(5, 4)
    batched = model(x, c)
    singint = torch.cat([model(x[i : i + 1], c[i : i + 1]) for i in range(5)])
    worst = (batched - singint).abs().max().item()
    assert worst <= 1e-5

    cfg = SurrogateConfig()
    assert cosine_lr(0, cfg) == cfg.lr
    assert cosine_lr(cfg.epochs, cfg) == cfg.lr_min
    ok(
        f"FiLM zero-init c-independence exact, shape contract holds for "
        f"batches 1..16, batched-vs-singleton diff {worst:.1e} <= 1e-5, "
        f"cosine endpoints exact"
    )


def test_analysis_pipeline_on_planted_structure():
    rng = np.random.default_rng(0)
    n = 50
    # error depends only on the conditioning group (plus slight jitter)
    per_k2 = np.exp(rng.uniform(-9.0, -5.0, size=n))
    matrix = np.tile(per_k2, (n, 1)) * (1.0 + 0.01 * rng.standard_normal((n, n)))

    groups = grouped_stats(matrix)
    ic_means = np.array([r["mean"] for r in groups["by_ic"]])
    cond_means = np.array([r["mean"] for r in groups["by_conditioning"]])
    ratio = cond_means.var() / ic_means.var()
    assert ratio > 10.0

    cs = rng.uniform(size=(n, 4))
    order = np.argsort(matrix.mean(axis=0))
    cs[order, 1] = np.linspace(-1.0, 3.0, n)  # dim 2 monotone in group error
    rows = correlations(matrix, cs)
    assert rows[1]["spearman_rho"] == pytest.approx(1.0)
    ok(
        f"planted factorial structure recovered: conditioning/IC variance "
        f"ratio {ratio:.1f} > 10, Spearman rho = 1 on the monotone dimension"
    )


def test_huber_reference_values():
    pred = torch.full((1, 1, 8, 8), 0.5)
    target = torch.zeros(1, 1, 8, 8)
    assert huber_loss(pred, target).item() == pytest.approx(0.125)
    pred = torch.full((1, 1, 8, 8), 3.0)
    assert huber_loss(pred, target).item() == pytest.approx(2.5)
    ok("Huber reference values match on both branches")
