"""Denoising U-Net over the latent grid.

Input is the latent concatenated with three condition channels; output has
the latent's channel count. One down/up level with residual blocks is enough
at desk scale; widths come from the model config.
"""

from __future__ import annotations

import torch
from torch import nn

from ..config import ModelConfig
from ..nets import sinusoidal_positions


def _norm(channels: int) -> nn.GroupNorm:
    groups = 8
    while channels % groups:
        groups //= 2
    return nn.GroupNorm(groups, channels)


class ResBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, time_dim: int):
        super().__init__()
        self.norm1 = _norm(in_ch)
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, padding=1)
        self.time_proj = nn.Linear(time_dim, out_ch)
        self.norm2 = _norm(out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1)
        self.skip = nn.Conv2d(in_ch, out_ch, 1) if in_ch != out_ch else nn.Identity()

    def forward(self, x: torch.Tensor, temb: torch.Tensor) -> torch.Tensor:
        h = self.conv1(torch.nn.functional.silu(self.norm1(x)))
        h = h + self.time_proj(temb)[:, :, None, None]
        h = self.conv2(torch.nn.functional.silu(self.norm2(h)))
        return h + self.skip(x)


class Denoiser(nn.Module):
    """Predicts the noise component of a conditioned latent at timestep t."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        w = cfg.unet_width
        c_in = cfg.latent_channels + 3
        c_out = cfg.latent_channels
        self.time_dim = 4 * w
        self.time_mlp = nn.Sequential(
            nn.Linear(w, self.time_dim), nn.SiLU(),
            nn.Linear(self.time_dim, self.time_dim))
        self.time_base = w

        self.stem = nn.Conv2d(c_in, w, 3, padding=1)
        self.enc1 = ResBlock(w, w, self.time_dim)
        self.down = nn.Conv2d(w, w, 3, stride=2, padding=1)
        self.enc2 = ResBlock(w, 2 * w, self.time_dim)
        self.mid = ResBlock(2 * w, 2 * w, self.time_dim)
        self.up = nn.ConvTranspose2d(2 * w, w, 4, stride=2, padding=1)
        self.dec1 = ResBlock(2 * w, w, self.time_dim)
        self.out_norm = _norm(w)
        self.out_conv = nn.Conv2d(w, c_out, 3, padding=1)

    def forward(self, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        """x (B, C+3, H, W), integer timesteps t (B,) -> noise estimate (B, C, H, W)."""
        if t.dim() == 0:
            t = t[None]
        table = sinusoidal_positions(int(t.max().item()) + 1, self.time_base,
                                     device=x.device, dtype=x.dtype)
        temb = self.time_mlp(table[t.long()])

        h, w_dim = x.shape[-2], x.shape[-1]
        pad_h, pad_w = h % 2, w_dim % 2
        if pad_h or pad_w:
            x = torch.nn.functional.pad(x, (0, pad_w, 0, pad_h))

        s = self.stem(x)
        e1 = self.enc1(s, temb)
        e2 = self.enc2(self.down(e1), temb)
        m = self.mid(e2, temb)
        u = self.up(m)
        d = self.dec1(torch.cat([u, e1], dim=1), temb)
        out = self.out_conv(torch.nn.functional.silu(self.out_norm(d)))
        if pad_h or pad_w:
            out = out[..., :h, :w_dim]
        return out
