import pytest
import torch

from cdrsurrogate.config import SurrogateConfig
from cdrsurrogate.model import (
    ConditionedUNet,
    Film,
    ResBlock,
    SpatialAttention,
    coord_augment,
)

TINY = SurrogateConfig(base_channels=16, embed_dim=8, dropout=0.0)


def test_coord_augment_corner_and_center():
    x = torch.zeros(1, 1, 5, 7)
    aug = coord_augment(x)
    assert aug.shape == (1, 3, 5, 7)
    xi, eta = aug[0, 1], aug[0, 2]
    assert xi[0, 0] == -1.0 and eta[0, 0] == -1.0
    assert xi[-1, -1] == 1.0 and eta[-1, -1] == 1.0
    assert xi[2, 3] == 0.0 and eta[2, 3] == 0.0  # odd grid center


def test_coord_augment_step():
    aug = coord_augment(torch.zeros(1, 1, 64, 64))
    xi = aug[0, 1]
    steps = xi[1:, 0] - xi[:-1, 0]
    assert torch.allclose(steps, torch.full_like(steps, 2.0 / 63.0))


def test_coord_augment_rejects_degenerate():
    with pytest.raises(ValueError):
        coord_augment(torch.zeros(1, 1, 1, 8))


def test_film_zero_init_is_identity():
    film = Film(embed_dim=8, channels=6)
    h = torch.randn(2, 6, 4, 4)
    assert torch.equal(film(h, torch.randn(2, 8)), h)


def test_film_affine_behavior():
    film = Film(embed_dim=8, channels=6)
    h = torch.randn(2, 6, 4, 4)
    e = torch.zeros(2, 8)
    # gamma = -1 zeroes the features
    with torch.no_grad():
        film.proj.bias[:6] = -1.0
    assert torch.allclose(film(h, e), torch.zeros_like(h))
    # gamma = 0, beta = b shifts per channel
    with torch.no_grad():
        film.proj.bias[:6] = 0.0
        film.proj.bias[6:] = 2.5
    assert torch.allclose(film(h, e), h + 2.5)


def test_resblock_skip_only_when_branch_zeroed():
    block = ResBlock(TINY, 16, 16)
    with torch.no_grad():
        block.conv2.weight.zero_()
        block.conv2.bias.zero_()
    h = torch.randn(2, 16, 8, 8)
    out = block(h, torch.randn(2, TINY.embed_dim))
    assert torch.equal(out, h)  # alpha * 0 + identity skip


def test_resblock_projects_when_channels_change():
    same = ResBlock(TINY, 16, 16)
    changed = ResBlock(TINY, 16, 32)
    assert isinstance(same.skip, torch.nn.Identity)
    assert isinstance(changed.skip, torch.nn.Conv2d)
    assert changed.skip.kernel_size == (1, 1)
    out = changed(torch.randn(2, 16, 8, 8), torch.randn(2, TINY.embed_dim))
    assert out.shape == (2, 32, 8, 8)


def test_resblock_eval_deterministic():
    block = ResBlock(SurrogateConfig(base_channels=16, embed_dim=8, dropout=0.5), 16, 16)
    block.eval()
    h = torch.randn(1, 16, 8, 8)
    e = torch.randn(1, 8)
    assert torch.equal(block(h, e), block(h, e))


def test_attention_shape_and_residual_path():
    attn = SpatialAttention(TINY, 32)
    with torch.no_grad():
        attn.proj.weight.zero_()
        attn.proj.bias.zero_()
    h = torch.randn(2, 32, 4, 4)
    assert torch.equal(attn(h), h)  # zeroed projection leaves the input


@pytest.mark.parametrize("batch", [1, 2, 4, 8, 16])
def test_shape_contract(batch):
    model = ConditionedUNet().eval()
    out = model(torch.randn(batch, 1, 64, 64), torch.randn(batch, 4))
    assert out.shape == (batch, 1, 64, 64)


def test_conditioning_independence_at_init():
    torch.manual_seed(11)
    model = ConditionedUNet().eval()
    x = torch.randn(3, 1, 64, 64)
    a = model(x, torch.randn(3, 4))
    b = model(x, 100.0 * torch.randn(3, 4))
    assert torch.equal(a, b)


def test_conditioning_matters_after_film_perturbation():
    torch.manual_seed(11)
    model = ConditionedUNet().eval()
    with torch.no_grad():
        model.enc_stacks[0].blocks[0].film.proj.weight.normal_(std=0.5)
    x = torch.randn(2, 1, 64, 64)
    a = model(x, torch.zeros(2, 4))
    b = model(x, torch.ones(2, 4))
    assert not torch.allclose(a, b)


def test_batched_equals_singleton():
    torch.manual_seed(4)
    model = ConditionedUNet().eval()
    x = torch.randn(6, 1, 64, 64)
    c = torch.randn(6, 4)
    batched = model(x, c)
    single = torch.cat([model(x[i : i + 1], c[i : i + 1]) for i in range(6)])
    assert (batched - single).abs().max().item() <= 1e-5


def test_smaller_resolutions_supported():
    model = ConditionedUNet(TINY).eval()
    out = model(torch.randn(2, 1, 32, 32), torch.randn(2, 4))
    assert out.shape == (2, 1, 32, 32)
    out = model(torch.randn(1, 1, 16, 16), torch.randn(1, 4))
    assert out.shape == (1, 1, 16, 16)


def test_indivisible_resolution_rejected():
    model = ConditionedUNet(TINY)
    with pytest.raises(ValueError, match="divisible"):
        model(torch.randn(1, 1, 60, 60), torch.randn(1, 4))


def test_channel_progression_follows_multipliers():
    model = ConditionedUNet()
    widths = [stack.blocks[0].conv1.out_channels for stack in model.enc_stacks]
    assert widths == [32, 64, 128, 256]
    assert model.mid_block1.conv1.out_channels == 256
    assert model.out_conv.out_channels == 1


def test_config_validation():
    with pytest.raises(ValueError):
        SurrogateConfig(base_channels=12)  # not divisible by 8 groups
    with pytest.raises(ValueError):
        SurrogateConfig(residual_scale=0.0)
