"""Single-archive checkpoints: weights, configs, statistics and schedule.

Everything is stored as plain dicts/tensors so archives load under torch's
weights-only mode. A version field is mandatory and checked on load.
"""

from __future__ import annotations

from pathlib import Path

import torch

from .config import DiffusionConfig, FrameConfig, ModelConfig
from .errors import CheckpointError
from .model import QuantRanges, SketchSpeechModel
from .prosody import ContourStats

FORMAT_VERSION = 1


def save_checkpoint(path: str | Path, kind: str, payload: dict) -> None:
    record = {"version": FORMAT_VERSION, "kind": kind}
    record.update(payload)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    torch.save(record, str(path))


def load_checkpoint(path: str | Path, expected_kind: str | None = None) -> dict:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        record = torch.load(str(path), map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(record, dict) or "version" not in record:
        raise CheckpointError(f"{path}: missing mandatory version field")
    if record["version"] != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: format version {record['version']} unsupported "
            f"(expected {FORMAT_VERSION})")
    if expected_kind and record.get("kind") != expected_kind:
        raise CheckpointError(
            f"{path}: kind {record.get('kind')!r}, expected {expected_kind!r}")
    return record


def stats_to_payload(stats: dict[str, ContourStats]) -> dict:
    return {k: s.to_dict() for k, s in stats.items()}


def stats_from_payload(payload: dict) -> dict[str, ContourStats]:
    return {k: ContourStats.from_dict(d, k) for k, d in payload.items()}


def save_model_bundle(path: str | Path, model: SketchSpeechModel,
                      frame_cfg: FrameConfig, mel_stats: dict,
                      extra: dict | None = None) -> None:
    """Persist everything synthesis needs in one archive."""
    payload = {
        "model_config": model.cfg.to_dict(),
        "diffusion_config": model.diff_cfg.to_dict(),
        "frame_config": {"sample_rate": frame_cfg.sample_rate,
                         "window_size": frame_cfg.window_size,
                         "hop_size": frame_cfg.hop_size,
                         "n_mels": frame_cfg.n_mels,
                         "fmin": frame_cfg.fmin, "fmax": frame_cfg.fmax},
        "contour_stats": stats_to_payload(model.stats),
        "quant_ranges": model.ranges.to_dict(),
        "mel_stats": dict(mel_stats),
        "latent_scale": float(model.latent_scale),
        "state_dict": model.state_dict(),
    }
    if extra:
        payload.update(extra)
    save_checkpoint(path, "ldm", payload)


def load_model_bundle(path: str | Path) -> tuple[SketchSpeechModel, FrameConfig, dict, dict]:
    """Rebuild the model from an archive; returns (model, frame_cfg, mel_stats, record)."""
    record = load_checkpoint(path, expected_kind="ldm")
    cfg = ModelConfig.from_dict(record["model_config"])
    diff_cfg = DiffusionConfig.from_dict(record["diffusion_config"])
    stats = stats_from_payload(record["contour_stats"])
    ranges = QuantRanges.from_dict(record["quant_ranges"])
    model = SketchSpeechModel(cfg, diff_cfg, stats, ranges)
    model.load_state_dict(record["state_dict"])
    model.latent_scale = float(record["latent_scale"])
    model.eval()
    model.freeze_vae()
    frame_cfg = FrameConfig(**record["frame_config"])
    return model, frame_cfg, dict(record["mel_stats"]), record
