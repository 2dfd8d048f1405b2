from .vae import SpectrogramVAE
from .unet import Denoiser
from .diffusion import NoiseSchedule, ldm_step, sample
from .conditions import (ConditionBundle, pad_to_multiple, pool_to_latent_grid,
                         build_denoiser_input)

__all__ = [
    "SpectrogramVAE", "Denoiser", "NoiseSchedule", "ldm_step", "sample",
    "ConditionBundle", "pad_to_multiple", "pool_to_latent_grid",
    "build_denoiser_input",
]
