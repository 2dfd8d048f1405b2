"""Configuration dataclasses and presets.

Two presets matter in practice: ``micro`` (16-clip overfit experiments that
run on a laptop CPU) and ``paper`` (full-scale settings, kept for reference
and never exercised in CI).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

from .errors import ConfigError


@dataclass(frozen=True)
class FrameConfig:
    """Short-time analysis parameters shared by mel, F0 and energy."""

    sample_rate: int = 22050
    window_size: int = 1024
    hop_size: int = 256
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 8000.0

    def num_frames(self, num_samples: int) -> int:
        return 1 + num_samples // self.hop_size


@dataclass(frozen=True)
class ModelConfig:
    """Network dimensions for every trainable module."""

    phoneme_dim: int = 256          # D
    mel_bins: int = 80              # F
    text_blocks: int = 6
    predictor_blocks: int = 2
    attention_heads: int = 4
    ffn_hidden: int = 384
    ffn_kernel: int = 3
    dropout: float = 0.1
    duration_hidden: int = 256
    duration_kernel: int = 3
    quant_bins: int = 256
    latent_channels: int = 8        # C
    compression: int = 4            # r
    vae_width: int = 32
    unet_width: int = 48
    sg_window: int = 9
    sg_polyorder: int = 2

    def __post_init__(self):
        if self.mel_bins % self.compression != 0:
            raise ConfigError("mel_bins must be divisible by compression rate")
        if self.phoneme_dim % self.attention_heads != 0:
            raise ConfigError("phoneme_dim must divide by attention_heads")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass(frozen=True)
class DiffusionConfig:
    """Noise schedule and sampler defaults.

    ``prediction`` picks the denoiser's training target: "sample" (clean
    latent, converted to a noise estimate at the sampler boundary) or
    "epsilon" (direct noise prediction). Sample prediction trains far more
    effectively at tiny scale because it supervises exactly what the
    high-noise reverse steps need.
    """

    train_steps: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    sample_steps: int = 50
    sampler: str = "ddim"           # "ddim" (deterministic) or "ancestral"
    prediction: str = "sample"      # "sample" or "epsilon"
    clip_latent: float = 6.0        # clamp on the implied clean latent; 0 = off

    def __post_init__(self):
        if self.sampler not in ("ddim", "ancestral"):
            raise ConfigError(f"unknown sampler: {self.sampler!r}")
        if self.prediction not in ("sample", "epsilon"):
            raise ConfigError(f"unknown prediction type: {self.prediction!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DiffusionConfig":
        return cls(**d)


@dataclass
class TrainConfig:
    """One training stage. ``stage`` is "vae" or "ldm"."""

    stage: str = "vae"
    steps: int = 2000
    batch_size: int = 8
    learning_rate: float = 2e-3
    warmup_steps: int = 100
    min_lr_ratio: float = 0.1
    sketch_dropout_p: float = 0.2
    kl_weight: float = 1e-4
    grad_clip: float = 1.0
    seed: int = 0
    checkpoint_every: int = 500
    log_every: int = 100

    def __post_init__(self):
        if self.stage not in ("vae", "ldm"):
            raise ConfigError(f"unknown training stage: {self.stage!r}")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if not 0.0 <= self.sketch_dropout_p <= 1.0:
            raise ConfigError("sketch_dropout_p must be in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)

    def apply_file(self, path) -> "TrainConfig":
        """Overlay a versioned flat key-value config document (JSON)."""
        import json
        from pathlib import Path

        doc = json.loads(Path(path).read_text())
        if doc.pop("version", None) != 1:
            raise ConfigError(f"{path}: config file must declare version: 1")
        for key, value in doc.items():
            if not hasattr(self, key):
                raise ConfigError(f"{path}: unknown config key {key!r}")
            setattr(self, key, value)
        self.__post_init__()
        return self


def micro_model_config() -> ModelConfig:
    """Reduced widths for desk-scale overfit runs."""
    return ModelConfig(ffn_hidden=256, vae_width=16, unet_width=32)


def paper_model_config() -> ModelConfig:
    """Full-scale dimensions; not exercised in CI."""
    return ModelConfig(ffn_hidden=1024, vae_width=128, unet_width=192)


def micro_train_config(stage: str) -> TrainConfig:
    if stage == "vae":
        return TrainConfig(stage="vae", steps=2000, batch_size=8,
                           learning_rate=2e-3, warmup_steps=100)
    return TrainConfig(stage="ldm", steps=2000, batch_size=8,
                       learning_rate=2e-3, warmup_steps=100)


def paper_train_config(stage: str) -> TrainConfig:
    if stage == "vae":
        return TrainConfig(stage="vae", steps=80_000, batch_size=8,
                           learning_rate=1e-4, warmup_steps=1000)
    return TrainConfig(stage="ldm", steps=80_000, batch_size=32,
                       learning_rate=1e-4, warmup_steps=1000)
