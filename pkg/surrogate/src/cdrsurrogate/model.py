"""Parameter-conditioned U-Net mapping (X0, c) to the fixed-horizon field.

The network is an encoder-decoder with skip connections built from
FiLM-conditioned residual blocks:

* the input field is augmented with two normalized coordinate channels
  (xi along the first spatial axis, eta along the second, both spanning
  exactly [-1, 1]) so position-dependent dynamics are representable;
* the conditioning vector c is embedded by a three-layer SiLU MLP and
  injected into every residual block through feature-wise linear
  modulation, h * (1 + gamma(e)) + beta(e), whose projection starts at
  zero so the network is exactly conditioning-independent at
  initialization;
* each encoder level stacks residual blocks and halves the resolution with
  a strided convolution; the bottleneck interleaves two residual blocks
  with single-head spatial self-attention; the decoder upsamples
  (nearest-neighbor), concatenates the matching encoder skip, and applies
  the same block stack;
* the output head is GroupNorm followed by a 1x1 convolution, no final
  activation.

All normalization is GroupNorm, so statistics never mix samples in a
batch.  Spatial sizes must be divisible by 2**levels.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn import functional as F

from .config import SurrogateConfig


def _axis_coords(n: int, dtype, device) -> torch.Tensor:
    # 2i/(n-1) - 1, written so the endpoints and an odd grid's center are
    # exact: (i - (n-1)/2) / ((n-1)/2)
    half = (n - 1) / 2.0
    return (torch.arange(n, dtype=dtype, device=device) - half) / half


def coord_augment(x0: torch.Tensor) -> torch.Tensor:
    """Append normalized coordinate channels: (B, C, H, W) -> (B, C+2, H, W)."""
    b, _, h, w = x0.shape
    if h < 2 or w < 2:
        raise ValueError(f"spatial dims must be at least 2, got {h}x{w}")
    xi = _axis_coords(h, x0.dtype, x0.device).view(1, 1, h, 1).expand(b, 1, h, w)
    eta = _axis_coords(w, x0.dtype, x0.device).view(1, 1, 1, w).expand(b, 1, h, w)
    return torch.cat([x0, xi, eta], dim=1)


class ConditioningMLP(nn.Module):
    """Three-layer SiLU MLP embedding c into R^embed_dim."""

    def __init__(self, cfg: SurrogateConfig):
        super().__init__()
        d_h = cfg.hidden_dim
        self.net = nn.Sequential(
            nn.Linear(cfg.cond_dim, d_h),
            nn.SiLU(),
            nn.Linear(d_h, d_h),
            nn.SiLU(),
            nn.Linear(d_h, cfg.embed_dim),
        )

    def forward(self, c: torch.Tensor) -> torch.Tensor:
        return self.net(c)


class Film(nn.Module):
    """Per-channel affine modulation h * (1 + gamma(e)) + beta(e).

    The projection is zero-initialized, making the transform the identity
    at the start of training.
    """

    def __init__(self, embed_dim: int, channels: int):
        super().__init__()
        self.proj = nn.Linear(embed_dim, 2 * channels)
        nn.init.zeros_(self.proj.weight)
        nn.init.zeros_(self.proj.bias)

    def forward(self, h: torch.Tensor, e: torch.Tensor) -> torch.Tensor:
        gamma, beta = self.proj(e).chunk(2, dim=-1)
        gamma = gamma[:, :, None, None]
        beta = beta[:, :, None, None]
        return h * (1.0 + gamma) + beta


class ResBlock(nn.Module):
    """Two GroupNorm/LeakyReLU/3x3-conv passes with FiLM in between.

    Output is residual_scale * branch + skip, where the skip is a 1x1
    projection when the channel counts differ and identity otherwise.
    """

    def __init__(self, cfg: SurrogateConfig, c_in: int, c_out: int):
        super().__init__()
        self.norm1 = nn.GroupNorm(cfg.norm_groups, c_in)
        self.conv1 = nn.Conv2d(c_in, c_out, 3, padding=1)
        self.film = Film(cfg.embed_dim, c_out)
        self.norm2 = nn.GroupNorm(cfg.norm_groups, c_out)
        self.conv2 = nn.Conv2d(c_out, c_out, 3, padding=1)
        self.dropout = nn.Dropout(cfg.dropout)
        self.skip = nn.Conv2d(c_in, c_out, 1) if c_in != c_out else nn.Identity()
        self.scale = cfg.residual_scale
        self.act = nn.LeakyReLU(cfg.leaky_slope)

    def forward(self, h: torch.Tensor, e: torch.Tensor) -> torch.Tensor:
        branch = self.conv1(self.act(self.norm1(h)))
        branch = self.film(branch, e)
        branch = self.dropout(self.conv2(self.act(self.norm2(branch))))
        return self.scale * branch + self.skip(h)


class SpatialAttention(nn.Module):
    """Single-head self-attention over the spatial positions, residual add."""

    def __init__(self, cfg: SurrogateConfig, channels: int):
        super().__init__()
        self.norm = nn.GroupNorm(cfg.norm_groups, channels)
        self.qkv = nn.Conv2d(channels, 3 * channels, 1)
        self.proj = nn.Conv2d(channels, channels, 1)
        self.scale = channels**-0.5

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        b, c, height, width = h.shape
        q, k, v = self.qkv(self.norm(h)).chunk(3, dim=1)
        q = q.reshape(b, c, height * width).transpose(1, 2)  # (B, HW, C)
        k = k.reshape(b, c, height * width)
        v = v.reshape(b, c, height * width).transpose(1, 2)
        attn = torch.softmax(torch.bmm(q, k) * self.scale, dim=-1)
        out = torch.bmm(attn, v).transpose(1, 2).reshape(b, c, height, width)
        return h + self.proj(out)


class _BlockStack(nn.Module):
    def __init__(self, cfg: SurrogateConfig, c_in: int, c_out: int):
        super().__init__()
        blocks = [ResBlock(cfg, c_in, c_out)]
        blocks += [
            ResBlock(cfg, c_out, c_out) for _ in range(cfg.blocks_per_level - 1)
        ]
        self.blocks = nn.ModuleList(blocks)

    def forward(self, h: torch.Tensor, e: torch.Tensor) -> torch.Tensor:
        for block in self.blocks:
            h = block(h, e)
        return h


class ConditionedUNet(nn.Module):
    def __init__(self, cfg: SurrogateConfig | None = None):
        super().__init__()
        self.cfg = cfg = cfg or SurrogateConfig()
        widths = [cfg.base_channels * m for m in cfg.channel_multipliers]

        self.embed = ConditioningMLP(cfg)
        self.conv_init = nn.Conv2d(cfg.in_channels + 2, widths[0], 3, padding=1)

        self.enc_stacks = nn.ModuleList()
        self.downs = nn.ModuleList()
        prev = widths[0]
        for width in widths:
            self.enc_stacks.append(_BlockStack(cfg, prev, width))
            self.downs.append(nn.Conv2d(width, width, 3, stride=2, padding=1))
            prev = width

        mid = widths[-1]
        self.mid_block1 = ResBlock(cfg, mid, mid)
        self.mid_attn1 = SpatialAttention(cfg, mid)
        self.mid_block2 = ResBlock(cfg, mid, mid)
        self.mid_attn2 = SpatialAttention(cfg, mid)

        self.dec_stacks = nn.ModuleList()
        up_in = mid
        for width in reversed(widths):
            self.dec_stacks.append(_BlockStack(cfg, up_in + width, width))
            up_in = width

        self.out_norm = nn.GroupNorm(cfg.norm_groups, widths[0])
        self.out_conv = nn.Conv2d(widths[0], cfg.in_channels, 1)

    def forward(self, x0: torch.Tensor, c: torch.Tensor) -> torch.Tensor:
        factor = 2 ** self.cfg.levels
        if x0.shape[-2] % factor or x0.shape[-1] % factor:
            raise ValueError(
                f"spatial size {tuple(x0.shape[-2:])} must be divisible by {factor}"
            )
        e = self.embed(c)
        h = self.conv_init(coord_augment(x0))

        skips = []
        for stack, down in zip(self.enc_stacks, self.downs):
            h = stack(h, e)
            skips.append(h)
            h = down(h)

        h = self.mid_attn1(self.mid_block1(h, e))
        h = self.mid_attn2(self.mid_block2(h, e))

        for stack, skip in zip(self.dec_stacks, reversed(skips)):
            h = F.interpolate(h, scale_factor=2, mode="nearest")
            h = stack(torch.cat([h, skip], dim=1), e)

        return self.out_conv(self.out_norm(h))
