"""Mel-to-waveform backends.

The default backend needs no downloads: mel filterbank pseudo-inversion
followed by iterative phase reconstruction. A pre-trained neural vocoder can
be plugged in as a TorchScript module (mel -> waveform) via config or the
SKETCHTTS_VOCODER environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .audio import griffin_lim, mel_to_magnitude
from .config import FrameConfig
from .errors import ConfigError

NEURAL_WEIGHTS_ENV = "SKETCHTTS_VOCODER"


@dataclass
class VocoderBackend:
    """Backend selector plus the mel configuration it expects."""

    kind: str = "phase_reconstruction"   # or "neural_pretrained"
    frame_cfg: FrameConfig = field(default_factory=FrameConfig)
    weights_path: str | None = None
    griffin_lim_iters: int = 32
    _module: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("phase_reconstruction", "neural_pretrained"):
            raise ConfigError(f"unknown vocoder kind: {self.kind!r}")
        if self.kind == "neural_pretrained":
            path = self.weights_path or os.environ.get(NEURAL_WEIGHTS_ENV)
            if not path or not Path(path).exists():
                raise ConfigError(
                    "neural vocoder weights not found; set "
                    f"{NEURAL_WEIGHTS_ENV} or weights_path, or use the "
                    "phase_reconstruction backend")
            self._module = torch.jit.load(path)
            self._module.eval()


def check_mel_config(backend: VocoderBackend, frame_cfg: FrameConfig) -> None:
    if backend.frame_cfg != frame_cfg:
        raise ConfigError(
            f"vocoder mel config {backend.frame_cfg} does not match the "
            f"acoustic model config {frame_cfg}")


def synthesize_waveform(log_mel: np.ndarray, backend: VocoderBackend,
                        frame_cfg: FrameConfig | None = None) -> np.ndarray:
    """(T, n_mels) log-mel -> float samples in [-1, 1], exactly T * hop long."""
    if frame_cfg is not None:
        check_mel_config(backend, frame_cfg)
    cfg = backend.frame_cfg
    log_mel = np.asarray(log_mel, dtype=np.float64)
    if log_mel.ndim != 2 or log_mel.shape[1] != cfg.n_mels:
        raise ConfigError(
            f"expected mel shaped (T, {cfg.n_mels}), got {log_mel.shape}")
    target_len = log_mel.shape[0] * cfg.hop_size

    if backend.kind == "neural_pretrained":
        with torch.no_grad():
            mel_t = torch.from_numpy(log_mel.T[None]).float()  # (1, n_mels, T)
            wave = backend._module(mel_t).squeeze().numpy().astype(np.float64)
        if wave.size < target_len:
            wave = np.pad(wave, (0, target_len - wave.size))
        wave = wave[:target_len]
    else:
        magnitude = mel_to_magnitude(log_mel, cfg)
        wave = griffin_lim(magnitude, cfg, n_iter=backend.griffin_lim_iters)

    peak = np.abs(wave).max()
    if peak > 1.0:
        wave = wave / peak
    return np.clip(wave, -1.0, 1.0)
