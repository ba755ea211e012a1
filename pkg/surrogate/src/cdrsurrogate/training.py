"""Training loop: Huber objective, AdamW, cosine schedule, gradient clipping.

The learning rate at epoch t is set explicitly to

    lr(t) = lr_min + (lr0 - lr_min) * (1 + cos(t pi / T)) / 2

so lr(0) = lr0 and lr(T) = lr_min exactly.  Gradients are clipped to a
fixed norm before every optimizer step.  Per-epoch training and validation
losses are recorded and written as CSV; checkpoints embed the full
configuration so models reload standalone.
"""

from __future__ import annotations

import argparse
import csv
import math
import time

import torch
from torch import nn
from torch.nn import functional as F
from torch.utils.data import DataLoader

from .config import SurrogateConfig
from .data import CdrReader, FieldPairs, train_val_split
from .model import ConditionedUNet

CHECKPOINT_VERSION = 1


def huber_loss(pred: torch.Tensor, target: torch.Tensor, delta: float = 1.0) -> torch.Tensor:
    """Mean pixel-wise Huber loss: quadratic below delta, linear above."""
    return F.huber_loss(pred, target, delta=delta, reduction="mean")


def cosine_lr(epoch: int, cfg: SurrogateConfig) -> float:
    """Annealed learning rate at integer epoch ``epoch`` (0-based)."""
    t = min(max(epoch, 0), cfg.epochs)
    return cfg.lr_min + 0.5 * (cfg.lr - cfg.lr_min) * (
        1.0 + math.cos(t * math.pi / cfg.epochs)
    )


def make_optimizer(model: nn.Module, cfg: SurrogateConfig) -> torch.optim.AdamW:
    return torch.optim.AdamW(
        model.parameters(), lr=cfg.lr, betas=cfg.betas, weight_decay=cfg.weight_decay
    )


def train_step(
    model: nn.Module,
    optimizer: torch.optim.Optimizer,
    batch,
    cfg: SurrogateConfig,
) -> float:
    x0, c, xm = batch
    optimizer.zero_grad(set_to_none=True)
    loss = huber_loss(model(x0, c), xm, cfg.huber_delta)
    if not torch.isfinite(loss):
        raise RuntimeError(f"non-finite training loss {loss.item()}")
    loss.backward()
    nn.utils.clip_grad_norm_(model.parameters(), cfg.clip_norm)
    optimizer.step()
    return float(loss.detach())


@torch.no_grad()
def evaluate(model: nn.Module, loader: DataLoader, cfg: SurrogateConfig) -> float:
    model.eval()
    total = 0.0
    count = 0
    for x0, c, xm in loader:
        batch = x0.shape[0]
        total += float(huber_loss(model(x0, c), xm, cfg.huber_delta)) * batch
        count += batch
    return total / max(count, 1)


def train(
    dataset_path,
    cfg: SurrogateConfig | None = None,
    out_dir=None,
    epochs: int | None = None,
    seed: int = 0,
    log=print,
) -> tuple[ConditionedUNet, list[dict]]:
    """Train on a dataset file; returns the model and per-epoch loss rows.

    ``epochs`` overrides cfg.epochs for shortened runs while keeping the
    annealing horizon of the configuration.  When ``out_dir`` is given the
    loss curve (loss_curve.csv) and a final checkpoint (model.pt) are
    written there.
    """
    cfg = cfg or SurrogateConfig()
    n_epochs = cfg.epochs if epochs is None else epochs
    torch.manual_seed(seed)

    reader = CdrReader(dataset_path)
    train_set, val_set = train_val_split(reader, cfg.val_fraction, cfg.split_seed)
    loader = DataLoader(
        train_set,
        batch_size=cfg.batch_size,
        shuffle=True,
        generator=torch.Generator().manual_seed(seed),
        drop_last=False,
    )
    val_loader = DataLoader(val_set, batch_size=cfg.batch_size)

    model = ConditionedUNet(cfg)
    optimizer = make_optimizer(model, cfg)

    history: list[dict] = []
    for epoch in range(n_epochs):
        lr = cosine_lr(epoch, cfg)
        for group in optimizer.param_groups:
            group["lr"] = lr
        model.train()
        total = 0.0
        count = 0
        t0 = time.perf_counter()
        for batch in loader:
            batch_size = batch[0].shape[0]
            total += train_step(model, optimizer, batch, cfg) * batch_size
            count += batch_size
        row = {
            "epoch": epoch,
            "lr": lr,
            "train_loss": total / max(count, 1),
            "val_loss": evaluate(model, val_loader, cfg) if len(val_set) else math.nan,
            "seconds": time.perf_counter() - t0,
        }
        history.append(row)
        log(
            f"epoch {epoch + 1}/{n_epochs}: train {row['train_loss']:.3e} "
            f"val {row['val_loss']:.3e} lr {lr:.2e} ({row['seconds']:.1f}s)"
        )

    if out_dir is not None:
        import pathlib

        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_loss_csv(out / "loss_curve.csv", history)
        save_checkpoint(out / "model.pt", model, history)
    return model, history


def write_loss_csv(path, history: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["epoch", "lr", "train_loss", "val_loss", "seconds"],
            lineterminator="\n",
        )
        writer.writeheader()
        writer.writerows(history)


def save_checkpoint(path, model: ConditionedUNet, history: list[dict] | None = None) -> None:
    torch.save(
        {
            "version": CHECKPOINT_VERSION,
            "config": model.cfg.to_dict(),
            "state_dict": model.state_dict(),
            "history": history or [],
        },
        path,
    )


def load_checkpoint(path) -> ConditionedUNet:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
    model = ConditionedUNet(SurrogateConfig.from_dict(payload["config"]))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model


@torch.no_grad()
def predict_batch(
    model: ConditionedUNet, x0: torch.Tensor, c: torch.Tensor
) -> tuple[torch.Tensor, float]:
    """Predictions plus wall-clock seconds for the batch (reported only)."""
    model.eval()
    if x0.shape[0] == 0:
        return x0.clone(), 0.0
    t0 = time.perf_counter()
    pred = model(x0, c)
    return pred, time.perf_counter() - t0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Train the conditioned U-Net surrogate on a .cdr dataset"
    )
    parser.add_argument("--data", required=True, help="training dataset (.cdr)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--epochs", type=int, help="override the epoch count")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    train(args.data, out_dir=args.out, epochs=args.epochs, seed=args.seed)
    return 0
