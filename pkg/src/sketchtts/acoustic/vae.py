"""Convolutional VAE compressing log-mel spectrograms into a latent grid.

Two stride-2 stages give a fixed compression rate of 4 per spatial axis:
(1, T, F) maps to (C, T/4, F/4). Inputs must arrive padded to multiples
of 4 frames.
"""

from __future__ import annotations

import torch
from torch import nn

from ..config import ModelConfig
from ..errors import ValidationError

LOGVAR_MIN, LOGVAR_MAX = -30.0, 20.0


def _norm(channels: int) -> nn.GroupNorm:
    groups = 8
    while channels % groups:
        groups //= 2
    return nn.GroupNorm(groups, channels)


class SpectrogramVAE(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        w = cfg.vae_width
        c = cfg.latent_channels
        self.latent_channels = c
        self.compression = cfg.compression
        self.encoder = nn.Sequential(
            nn.Conv2d(1, w, 3, padding=1), _norm(w), nn.SiLU(),
            nn.Conv2d(w, w, 3, stride=2, padding=1), _norm(w), nn.SiLU(),
            nn.Conv2d(w, 2 * w, 3, stride=2, padding=1), _norm(2 * w), nn.SiLU(),
            nn.Conv2d(2 * w, 2 * w, 3, padding=1), _norm(2 * w), nn.SiLU(),
            nn.Conv2d(2 * w, 2 * c, 3, padding=1),
        )
        self.decoder = nn.Sequential(
            nn.Conv2d(c, 2 * w, 3, padding=1), _norm(2 * w), nn.SiLU(),
            nn.Conv2d(2 * w, 2 * w, 3, padding=1), _norm(2 * w), nn.SiLU(),
            nn.ConvTranspose2d(2 * w, w, 4, stride=2, padding=1), _norm(w), nn.SiLU(),
            nn.ConvTranspose2d(w, w, 4, stride=2, padding=1), _norm(w), nn.SiLU(),
            nn.Conv2d(w, 1, 3, padding=1),
        )

    def encode(self, mel: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """(B, 1, T, F) -> posterior mean and log-variance, each (B, C, T/4, F/4)."""
        if not torch.isfinite(mel).all():
            raise ValidationError("mel input contains non-finite values")
        if mel.shape[-2] % self.compression or mel.shape[-1] % self.compression:
            raise ValidationError(
                f"mel dims {tuple(mel.shape[-2:])} not divisible by r={self.compression}")
        mu, logvar = self.encoder(mel).chunk(2, dim=1)
        return mu, torch.clamp(logvar, LOGVAR_MIN, LOGVAR_MAX)

    def reparameterize(self, mu: torch.Tensor, logvar: torch.Tensor,
                       generator: torch.Generator | None = None) -> torch.Tensor:
        noise = torch.randn(mu.shape, generator=generator, dtype=mu.dtype,
                            device=mu.device)
        return mu + noise * torch.exp(0.5 * logvar)

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        """(B, C, T/4, F/4) -> reconstructed mel (B, 1, T, F)."""
        if z.shape[1] != self.latent_channels:
            raise ValidationError(
                f"latent has {z.shape[1]} channels, expected {self.latent_channels}")
        return self.decoder(z)

    @staticmethod
    def kl_divergence(mu: torch.Tensor, logvar: torch.Tensor,
                      mask: torch.Tensor | None = None) -> torch.Tensor:
        """Mean per-element KL against the unit Gaussian; always >= 0."""
        kl = 0.5 * (mu.pow(2) + logvar.exp() - 1.0 - logvar)
        if mask is not None:
            kl = kl * mask
            return kl.sum() / mask.sum().clamp(min=1.0) / mu.shape[1]
        return kl.mean()
