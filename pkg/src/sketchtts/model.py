"""The full synthesis model: every trainable module plus frozen companions.

Holds the text encoder, duration predictor, sketch-to-contour predictor,
quantized contour/sketch encoders and the latent denoiser, together with the
frozen VAE, the noise schedule and the dataset statistics needed to move
between physical units and normalized/quantized space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .acoustic import (Denoiser, NoiseSchedule, SpectrogramVAE,
                       ConditionBundle, build_denoiser_input,
                       pad_to_multiple, pool_to_latent_grid)
from .acoustic.conditions import combine_text_conditions
from .acoustic.diffusion import noise_from_prediction
from .config import DiffusionConfig, ModelConfig
from .errors import ConfigError
from .nets import QuantizedEmbedding
from .prosody import ContourStats
from .sketch2contour import ContourPredictor
from .text_frontend import TextEncoder, DurationPredictor, length_regulate_torch


@dataclass
class QuantRanges:
    """Quantization intervals in normalized contour space and sketch space."""

    pitch: tuple[float, float]
    energy: tuple[float, float]
    sketch: tuple[float, float] = (0.0, 1.0)

    @classmethod
    def from_stats(cls, stats: dict[str, ContourStats]) -> "QuantRanges":
        return cls(pitch=stats["pitch"].normalized_range(),
                   energy=stats["energy"].normalized_range())

    def to_dict(self) -> dict:
        return {"pitch": list(self.pitch), "energy": list(self.energy),
                "sketch": list(self.sketch)}

    @classmethod
    def from_dict(cls, d: dict) -> "QuantRanges":
        return cls(pitch=tuple(d["pitch"]), energy=tuple(d["energy"]),
                   sketch=tuple(d.get("sketch", (0.0, 1.0))))


class SketchSpeechModel(nn.Module):
    """Trainable modules for stage 2 plus the frozen stage-1 VAE."""

    def __init__(self, cfg: ModelConfig, diff_cfg: DiffusionConfig,
                 stats: dict[str, ContourStats], ranges: QuantRanges):
        super().__init__()
        self.cfg = cfg
        self.diff_cfg = diff_cfg
        self.stats = stats
        self.ranges = ranges
        self.schedule = NoiseSchedule(diff_cfg)
        self.latent_scale = 1.0

        self.text_encoder = TextEncoder(cfg)
        self.duration_predictor = DurationPredictor(cfg)
        self.contour_predictor = ContourPredictor(cfg)
        f = cfg.mel_bins
        self.pitch_contour_embed = QuantizedEmbedding(cfg.quant_bins, f)
        self.energy_contour_embed = QuantizedEmbedding(cfg.quant_bins, f)
        self.pitch_sketch_embed = QuantizedEmbedding(cfg.quant_bins, f)
        self.energy_sketch_embed = QuantizedEmbedding(cfg.quant_bins, f)
        self.denoiser = Denoiser(cfg)
        self.vae = SpectrogramVAE(cfg)

    def freeze_vae(self) -> None:
        self.vae.requires_grad_(False)
        self.vae.eval()

    def trainable_parameters(self):
        for name, p in self.named_parameters():
            if not name.startswith("vae."):
                yield p

    def embed_conditions(self, text_proj: torch.Tensor,
                         pitch_norm: torch.Tensor, energy_norm: torch.Tensor,
                         pitch_sketch: torch.Tensor,
                         energy_sketch: torch.Tensor) -> dict[str, torch.Tensor]:
        """Phoneme-rate embeddings for every condition stream, each (B, M, F)."""
        p_lo, p_hi = self.ranges.pitch
        e_lo, e_hi = self.ranges.energy
        s_lo, s_hi = self.ranges.sketch
        return {
            "text": text_proj,
            "pitch": self.pitch_contour_embed(pitch_norm, p_lo, p_hi),
            "energy": self.energy_contour_embed(energy_norm, e_lo, e_hi),
            "pitch_sketch": self.pitch_sketch_embed(pitch_sketch, s_lo, s_hi),
            "energy_sketch": self.energy_sketch_embed(energy_sketch, s_lo, s_hi),
        }

    def expand_and_bundle(self, embeddings: dict[str, torch.Tensor],
                          durations: torch.Tensor,
                          pad_frames: int | None = None) -> ConditionBundle:
        """Length-regulate phoneme-rate embeddings and build the bundle.

        Single-utterance path: tensors are (M, F), durations (M,). The frame
        axis is padded with zeros to ``pad_frames`` (or up to a multiple of
        the compression rate).
        """
        r = self.cfg.compression
        expanded = {k: length_regulate_torch(v, durations)
                    for k, v in embeddings.items()}
        if pad_frames is not None:
            pad = pad_frames - expanded["text"].shape[0]
            if pad < 0:
                raise ConfigError("pad_frames smaller than expansion")
            expanded = {k: torch.nn.functional.pad(v, (0, 0, 0, pad))
                        for k, v in expanded.items()}
        expanded = {k: pad_to_multiple(v, r) for k, v in expanded.items()}
        text_frame = combine_text_conditions(
            expanded["text"], expanded["pitch"], expanded["energy"])
        return ConditionBundle(text_frame=text_frame,
                               pitch_sketch_frame=expanded["pitch_sketch"],
                               energy_sketch_frame=expanded["energy_sketch"])

    def condition_channels(self, bundle: ConditionBundle) -> torch.Tensor:
        return pool_to_latent_grid(bundle, self.cfg.compression)

    def denoise_with_conditions(self, z: torch.Tensor, t,
                                cond_channels: torch.Tensor) -> torch.Tensor:
        """Raw denoiser output (clean latent or noise, per the config)."""
        x = build_denoiser_input(z, cond_channels)
        t_tensor = torch.as_tensor(t if np.ndim(t) else [t], dtype=torch.long)
        if t_tensor.shape[0] == 1 and x.shape[0] > 1:
            t_tensor = t_tensor.expand(x.shape[0])
        return self.denoiser(x, t_tensor)

    def noise_estimate(self, z: torch.Tensor, t: int,
                       cond_channels: torch.Tensor) -> torch.Tensor:
        """Noise-estimate view of the denoiser, whatever it was trained to
        predict; this is what the reverse-process update consumes."""
        out = self.denoise_with_conditions(z, t, cond_channels)
        return noise_from_prediction(out, z, t, self.schedule,
                                     self.diff_cfg.prediction)
