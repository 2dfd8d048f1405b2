"""End-to-end synthesis: text plus an optional sketch in, waveform out.

The realized pitch/energy contours are re-extracted from the synthesized
audio and pooled with the durations the synthesis actually used, so callers
(CLI, service, UI) can overlay them against the sketch without a second
analysis pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .acoustic import sample
from .checkpoint import load_model_bundle
from .config import FrameConfig
from .errors import ValidationError
from .model import SketchSpeechModel
from .prosody import (ProsodyContour, ProsodySketch, denormalize_contour,
                      extract_energy, extract_f0, interpolate_unvoiced,
                      pool_to_phoneme)
from .sketch2contour import SketchPair, UserPolyline, resample_user_sketch
from .text_frontend import (PhonemeSequence, durations_from_log, phonemize,
                            symbols_to_ids)
from .vocoder import VocoderBackend, synthesize_waveform


@dataclass
class SynthesisResult:
    wave: np.ndarray
    sample_rate: int
    mel: np.ndarray
    sequence: PhonemeSequence
    durations: np.ndarray
    sketches: SketchPair
    realized_pitch: np.ndarray
    realized_energy: np.ndarray
    predicted_pitch_hz: np.ndarray
    predicted_energy_db: np.ndarray
    seed: int
    steps: int

    @property
    def M(self) -> int:
        return len(self.sequence)


def _coerce_sketch_values(values: np.ndarray, M: int, kind: str) -> ProsodySketch:
    """Fit arbitrary-length sketch values to M phonemes by midpoint resampling."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == M:
        return ProsodySketch(np.clip(values, 0.0, 1.0), kind)
    xs = (np.arange(values.size) + 0.5) / values.size
    targets = (np.arange(M) + 0.5) / M
    return ProsodySketch(np.clip(np.interp(targets, xs, values), 0.0, 1.0), kind)


class Synthesizer:
    """A loaded model bundle plus vocoder, ready for repeated synthesis."""

    def __init__(self, model: SketchSpeechModel, frame_cfg: FrameConfig,
                 mel_stats: dict, vocoder: VocoderBackend | None = None):
        self.model = model
        self.frame_cfg = frame_cfg
        self.mel_stats = mel_stats
        self.vocoder = vocoder or VocoderBackend(frame_cfg=frame_cfg)
        self.model.eval()
        self.model.freeze_vae()

    @classmethod
    def from_checkpoint(cls, path: str | Path,
                        vocoder: VocoderBackend | None = None) -> "Synthesizer":
        model, frame_cfg, mel_stats, _ = load_model_bundle(path)
        return cls(model, frame_cfg, mel_stats, vocoder)

    def resolve_sketches(self, sketch, M: int) -> SketchPair:
        """Normalize the many accepted sketch inputs into a SketchPair."""
        if sketch is None:
            return SketchPair.empty(M)
        if isinstance(sketch, SketchPair):
            return SketchPair(
                _coerce_sketch_values(sketch.pitch.values, M, "pitch"),
                _coerce_sketch_values(sketch.energy.values, M, "energy"))
        if isinstance(sketch, UserPolyline):
            return SketchPair.from_single(resample_user_sketch(sketch, M), M)
        if isinstance(sketch, ProsodySketch):
            return SketchPair.from_single(
                _coerce_sketch_values(sketch.values, M, sketch.kind), M)
        raise ValidationError(f"unsupported sketch input: {type(sketch).__name__}")

    def synthesize(self, text: str, sketch=None, seed: int = 0,
                   steps: int | None = None, eta: float | None = None,
                   durations: np.ndarray | None = None) -> SynthesisResult:
        model = self.model
        cfg = model.cfg
        steps = steps or model.diff_cfg.sample_steps
        if eta is None:
            eta = 0.0 if model.diff_cfg.sampler == "ddim" else 1.0

        sequence = phonemize(text)
        M = len(sequence)
        pair = self.resolve_sketches(sketch, M)

        ids = torch.tensor([symbols_to_ids(sequence.symbols)], dtype=torch.long)
        with torch.no_grad():
            h, proj = model.text_encoder(ids)
            if durations is None:
                log_d = model.duration_predictor(h)
                durations = durations_from_log(log_d[0].numpy())
            durations = np.asarray(durations, dtype=np.int64)
            if durations.size != M:
                raise ValidationError(
                    f"durations length {durations.size} != phoneme count {M}")

            p_ske = torch.from_numpy(pair.pitch.values).float()[None]
            e_ske = torch.from_numpy(pair.energy.values).float()[None]
            p_pred, e_pred = model.contour_predictor(proj, p_ske, e_ske)

            emb = model.embed_conditions(proj, p_pred, e_pred, p_ske, e_ske)
            item_emb = {k: v[0] for k, v in emb.items()}
            dur_t = torch.from_numpy(durations).long()
            bundle = model.expand_and_bundle(item_emb, dur_t)
            cond = model.condition_channels(bundle)

            r = cfg.compression
            shape = (1, cfg.latent_channels, bundle.frames // r, cfg.mel_bins // r)
            generator = torch.Generator().manual_seed(seed)
            z = sample(lambda z_t, t: model.noise_estimate(z_t, t, cond),
                       shape, model.schedule, steps, generator, eta=eta,
                       clip_latent=model.diff_cfg.clip_latent)
            mel_norm = model.vae.decode(z / model.latent_scale)[0, 0].numpy()

        total = int(durations.sum())
        mel = (mel_norm[:total] * self.mel_stats["std"] + self.mel_stats["mean"])
        wave = synthesize_waveform(mel, self.vocoder, self.frame_cfg)

        realized_f0 = extract_f0(wave, self.frame_cfg)[:total]
        realized_en = extract_energy(wave, self.frame_cfg)[:total]
        realized_pitch = interpolate_unvoiced(
            pool_to_phoneme(realized_f0, durations, voiced_only=True))
        realized_energy = pool_to_phoneme(realized_en, durations)

        stats = model.stats
        return SynthesisResult(
            wave=wave, sample_rate=self.frame_cfg.sample_rate, mel=mel,
            sequence=sequence, durations=durations, sketches=pair,
            realized_pitch=realized_pitch, realized_energy=realized_energy,
            predicted_pitch_hz=denormalize_contour(p_pred[0].numpy(), stats["pitch"]),
            predicted_energy_db=denormalize_contour(e_pred[0].numpy(), stats["energy"]),
            seed=seed, steps=steps)
