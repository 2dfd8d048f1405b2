"""Noise schedule and the reverse-process update.

The reverse step is the generalized update used throughout the diffusion
literature: predict the clean latent from the noise estimate, then move to
the previous (possibly strided) timestep. eta = 0 is the deterministic
sampler used by default; eta = 1 recovers the ancestral update.
"""

from __future__ import annotations

import torch

from ..config import DiffusionConfig
from ..errors import ConfigError, ValidationError


class NoiseSchedule:
    """Linear-beta schedule with precomputed cumulative products."""

    def __init__(self, cfg: DiffusionConfig | None = None):
        self.cfg = cfg or DiffusionConfig()
        betas = torch.linspace(self.cfg.beta_start, self.cfg.beta_end,
                               self.cfg.train_steps, dtype=torch.float64)
        alphas = 1.0 - betas
        self.betas = betas
        self.alphas_cumprod = torch.cumprod(alphas, dim=0)

    @property
    def train_steps(self) -> int:
        return self.cfg.train_steps

    def check_t(self, t: int) -> None:
        if not 0 <= t < self.train_steps:
            raise ValidationError(
                f"timestep {t} outside schedule range [0, {self.train_steps})")

    def alpha_bar(self, t: int) -> float:
        """Cumulative alpha at t; t = -1 denotes the fully denoised endpoint."""
        if t < 0:
            return 1.0
        self.check_t(t)
        return float(self.alphas_cumprod[t])

    def q_sample(self, z0: torch.Tensor, t: torch.Tensor,
                 noise: torch.Tensor) -> torch.Tensor:
        """Forward process: corrupt z0 to timestep t with the given noise."""
        abar = self.alphas_cumprod.to(z0.dtype)[t].view(-1, *([1] * (z0.dim() - 1)))
        return torch.sqrt(abar) * z0 + torch.sqrt(1.0 - abar) * noise

    def timestep_pairs(self, steps: int) -> list[tuple[int, int]]:
        """(t, t_prev) pairs from noisiest to cleanest; last t_prev is -1."""
        if steps < 1:
            raise ConfigError("need at least one sampling step")
        steps = min(steps, self.train_steps)
        ts = torch.linspace(0, self.train_steps - 1, steps).round().long()
        ts = sorted(set(ts.tolist()), reverse=True)
        return [(t, ts[i + 1] if i + 1 < len(ts) else -1)
                for i, t in enumerate(ts)]


def noise_from_prediction(out: torch.Tensor, z_t: torch.Tensor, t: int,
                          schedule: NoiseSchedule,
                          prediction: str = "epsilon") -> torch.Tensor:
    """Convert the denoiser's raw output into a noise estimate.

    "epsilon" outputs pass through; "sample" outputs are the predicted clean
    latent and are solved for the noise via the forward-process identity.
    """
    if prediction == "epsilon":
        return out
    if prediction == "sample":
        abar_t = schedule.alpha_bar(t)
        return (z_t - abar_t ** 0.5 * out) / max(1.0 - abar_t, 1e-12) ** 0.5
    raise ConfigError(f"unknown prediction type: {prediction!r}")


def ldm_step(z_t: torch.Tensor, eps: torch.Tensor, t: int, t_prev: int,
             schedule: NoiseSchedule, eta: float = 0.0,
             generator: torch.Generator | None = None,
             clip_latent: float = 0.0) -> torch.Tensor:
    """One reverse update from timestep t to t_prev given the noise estimate.

    With eta = 0 the update is deterministic; a zero noise estimate then
    rescales the latent by sqrt(alpha_bar_prev / alpha_bar_t). A positive
    ``clip_latent`` clamps the implied clean latent, guarding the early
    trajectory against amplified prediction error.
    """
    schedule.check_t(t)
    abar_t = schedule.alpha_bar(t)
    abar_prev = schedule.alpha_bar(t_prev)
    sqrt_abar_t = abar_t ** 0.5
    z0_pred = (z_t - (1.0 - abar_t) ** 0.5 * eps) / sqrt_abar_t
    if clip_latent > 0.0:
        z0_pred = z0_pred.clamp(-clip_latent, clip_latent)
        eps = (z_t - sqrt_abar_t * z0_pred) / max(1.0 - abar_t, 1e-12) ** 0.5
    if eta > 0.0:
        sigma = eta * (((1.0 - abar_prev) / max(1.0 - abar_t, 1e-12)) ** 0.5
                       * (1.0 - abar_t / abar_prev) ** 0.5)
    else:
        sigma = 0.0
    direction = max(1.0 - abar_prev - sigma ** 2, 0.0) ** 0.5 * eps
    out = abar_prev ** 0.5 * z0_pred + direction
    if sigma > 0.0:
        noise = torch.randn(z_t.shape, generator=generator, dtype=z_t.dtype,
                            device=z_t.device)
        out = out + sigma * noise
    return out


def sample(denoise_fn, shape: tuple[int, ...], schedule: NoiseSchedule,
           steps: int, generator: torch.Generator,
           eta: float = 0.0, clip_latent: float = 0.0,
           dtype=torch.float32) -> torch.Tensor:
    """Run the full reverse process from Gaussian noise to z_0.

    ``denoise_fn(z_t, t)`` must return the noise estimate for the already
    conditioned latent. Deterministic given the generator's seed.
    """
    z = torch.randn(shape, generator=generator, dtype=dtype)
    for t, t_prev in schedule.timestep_pairs(steps):
        eps = denoise_fn(z, t)
        z = ldm_step(z, eps, t, t_prev, schedule, eta=eta, generator=generator,
                     clip_latent=clip_latent)
    return z
