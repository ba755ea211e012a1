"""Architecture and training hyperparameters.

Defaults reproduce the published configuration: a four-level U-Net with
channel multipliers (1, 2, 4, 8) on 32 base channels, two FiLM-conditioned
residual blocks per level, GroupNorm with 8 groups, LeakyReLU(0.01), a
16-dimensional conditioning embedding from a three-layer SiLU MLP, residual
scaling 0.2, dropout 0.05; trained with Huber loss (delta 1), AdamW
(lr 5e-4, weight decay 5e-3, betas (0.9, 0.999)), cosine-annealed to 1e-6
over 100 epochs, gradient-norm clipping at 1, batch size 16.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class SurrogateConfig:
    # architecture
    resolution: int = 64
    in_channels: int = 1
    base_channels: int = 32
    channel_multipliers: tuple[int, ...] = (1, 2, 4, 8)
    blocks_per_level: int = 2
    norm_groups: int = 8
    leaky_slope: float = 0.01
    cond_dim: int = 4
    embed_dim: int = 16
    mlp_multiplier: int = 2
    residual_scale: float = 0.2
    dropout: float = 0.05
    # training
    huber_delta: float = 1.0
    lr: float = 5e-4
    weight_decay: float = 5e-3
    betas: tuple[float, float] = (0.9, 0.999)
    lr_min: float = 1e-6
    epochs: int = 100
    clip_norm: float = 1.0
    batch_size: int = 16
    val_fraction: float = 0.1
    split_seed: int = 0

    def __post_init__(self):
        if self.base_channels % self.norm_groups:
            raise ValueError("base channel count must be divisible by the group count")
        for m in self.channel_multipliers:
            if (self.base_channels * m) % self.norm_groups:
                raise ValueError(f"multiplier {m} breaks GroupNorm divisibility")
        if not (0 < self.residual_scale <= 1):
            raise ValueError("residual scale must lie in (0, 1]")
        if not (0 <= self.dropout < 1):
            raise ValueError("dropout must lie in [0, 1)")

    @property
    def levels(self) -> int:
        return len(self.channel_multipliers)

    @property
    def hidden_dim(self) -> int:
        return self.mlp_multiplier * self.embed_dim

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channel_multipliers"] = list(self.channel_multipliers)
        d["betas"] = list(self.betas)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SurrogateConfig":
        d = dict(d)
        d["channel_multipliers"] = tuple(d["channel_multipliers"])
        d["betas"] = tuple(d["betas"])
        return cls(**d)
