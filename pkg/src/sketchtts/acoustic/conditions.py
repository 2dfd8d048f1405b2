"""Condition assembly: frame-rate maps summed, pooled and concatenated.

The text condition is the sum of expanded text, pitch-contour and
energy-contour embeddings; the two sketch embeddings stay separate. Each
T x F map is average-pooled by the compression rate into one channel on the
latent grid, then concatenated with the latent along channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from ..errors import AlignmentError, ValidationError


@dataclass
class ConditionBundle:
    """Frame-rate condition maps sharing the same T and F."""

    text_frame: torch.Tensor          # expanded text + pitch + energy embeddings
    pitch_sketch_frame: torch.Tensor
    energy_sketch_frame: torch.Tensor

    def __post_init__(self):
        shapes = {tuple(self.text_frame.shape),
                  tuple(self.pitch_sketch_frame.shape),
                  tuple(self.energy_sketch_frame.shape)}
        if len(shapes) != 1:
            raise AlignmentError(f"condition maps disagree in shape: {shapes}")

    @property
    def frames(self) -> int:
        return self.text_frame.shape[-2]


def combine_text_conditions(text: torch.Tensor, pitch_emb: torch.Tensor,
                            energy_emb: torch.Tensor) -> torch.Tensor:
    """Elementwise sum of the three frame-rate text-side embeddings."""
    if text.shape != pitch_emb.shape or text.shape != energy_emb.shape:
        raise AlignmentError("text/pitch/energy embedding shapes differ")
    return text + pitch_emb + energy_emb


def pad_to_multiple(x: torch.Tensor, r: int, value: float = 0.0) -> torch.Tensor:
    """Pad the frame axis (dim -2) up to a multiple of r."""
    t = x.shape[-2]
    remainder = t % r
    if remainder == 0:
        return x
    pad = r - remainder
    return torch.nn.functional.pad(x, (0, 0, 0, pad), value=value)


def pool_to_latent_grid(bundle: ConditionBundle, r: int) -> torch.Tensor:
    """Average-pool each condition map by r x r into one latent-grid channel.

    Accepts maps shaped (T, F) or (B, T, F); returns (B, 3, T/r, F/r).
    """
    maps = [bundle.pitch_sketch_frame, bundle.energy_sketch_frame,
            bundle.text_frame]
    stacked = []
    for m in maps:
        if m.dim() == 2:
            m = m[None]
        if m.shape[-2] % r or m.shape[-1] % r:
            raise ValidationError(
                f"condition map {tuple(m.shape)} not divisible by r={r}")
        stacked.append(torch.nn.functional.avg_pool2d(m[:, None], r))
    return torch.cat(stacked, dim=1)


def build_denoiser_input(z: torch.Tensor, cond_channels: torch.Tensor) -> torch.Tensor:
    """Concatenate latent and condition channels: (B, C, h, w) + (B, 3, h, w).

    The channel order matches the conditioning definition: latent first, then
    pitch sketch, energy sketch, and the combined text map.
    """
    if z.dim() == 3:
        z = z[None]
    if cond_channels.dim() == 3:
        cond_channels = cond_channels[None]
    if z.shape[-2:] != cond_channels.shape[-2:]:
        raise AlignmentError(
            f"latent grid {tuple(z.shape[-2:])} != condition grid "
            f"{tuple(cond_channels.shape[-2:])}")
    if z.shape[0] != cond_channels.shape[0]:
        raise AlignmentError("batch sizes differ between latent and conditions")
    return torch.cat([z, cond_channels], dim=1)
