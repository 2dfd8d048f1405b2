"""Two-stage training: spectrogram VAE first, then the conditioned LDM.

Stage 2 freezes the VAE (verified by parameter hashing) and jointly trains
the denoiser, text encoder, duration predictor, contour predictor and the
quantized embeddings. Runs are deterministic for a fixed seed and resumable:
batch selection is a pure function of (seed, step) and all torch randomness
flows through one generator whose state is checkpointed.
"""

from __future__ import annotations

import hashlib
import logging
import math
from pathlib import Path

import numpy as np
import torch

from .acoustic import ConditionBundle, SpectrogramVAE
from .checkpoint import load_checkpoint, save_checkpoint, save_model_bundle
from .config import DiffusionConfig, FrameConfig, ModelConfig, TrainConfig
from .data import FeatureCache
from .errors import ConfigError, SketchTTSError
from .model import QuantRanges, SketchSpeechModel
from .prosody import ProsodySketch, normalize_contour
from .sketch2contour import SketchPair, sketch_dropout

log = logging.getLogger(__name__)


def learning_rate_at(step: int, cfg: TrainConfig) -> float:
    """Linear warmup to the peak rate, then cosine decay to a floor."""
    if cfg.warmup_steps > 0 and step < cfg.warmup_steps:
        return cfg.learning_rate * (step + 1) / cfg.warmup_steps
    span = max(cfg.steps - cfg.warmup_steps, 1)
    progress = min(max(step - cfg.warmup_steps, 0) / span, 1.0)
    floor = cfg.learning_rate * cfg.min_lr_ratio
    return floor + 0.5 * (cfg.learning_rate - floor) * (1 + math.cos(math.pi * progress))


def batch_indices(n_items: int, batch_size: int, seed: int, step: int) -> np.ndarray:
    """Stateless per-step batch sampling so resume needs no sampler state."""
    rng = np.random.default_rng(np.uint64(seed) * np.uint64(1_000_003) + np.uint64(step))
    return rng.choice(n_items, size=batch_size, replace=n_items < batch_size)


def _set_lr(optimizer, lr: float) -> None:
    for group in optimizer.param_groups:
        group["lr"] = lr


def state_dict_hash(module: torch.nn.Module) -> str:
    h = hashlib.sha256()
    for name, tensor in sorted(module.state_dict().items()):
        h.update(name.encode())
        h.update(tensor.detach().cpu().numpy().tobytes())
    return h.hexdigest()


def _pad_mel_batch(mels: list[np.ndarray], r: int) -> tuple[torch.Tensor, torch.Tensor, list[int]]:
    """Normalized mels -> (B, 1, T_pad, F) batch, frame mask and lengths.

    Each mel is padded with its own minimum value, first up to a multiple of
    the compression rate, then to the batch maximum.
    """
    lengths = [m.shape[0] for m in mels]
    t_max = max(math.ceil(t / r) * r for t in lengths)
    f = mels[0].shape[1]
    batch = np.empty((len(mels), 1, t_max, f), dtype=np.float32)
    mask = np.zeros((len(mels), 1, t_max, f), dtype=np.float32)
    for i, m in enumerate(mels):
        batch[i, 0] = m.min()
        batch[i, 0, :m.shape[0]] = m
        mask[i, 0, :m.shape[0]] = 1.0
    return torch.from_numpy(batch), torch.from_numpy(mask), lengths


def _latent_mask(lengths: list[int], r: int, h: int, w: int) -> torch.Tensor:
    mask = torch.zeros(len(lengths), 1, h, w)
    for i, t in enumerate(lengths):
        mask[i, :, :math.ceil(t / r)] = 1.0
    return mask


def train_vae(cache_dir: str | Path, out_path: str | Path,
              model_cfg: ModelConfig, train_cfg: TrainConfig,
              resume: str | Path | None = None,
              frame_cfg: FrameConfig | None = None) -> list[dict]:
    """Stage 1: reconstruction + KL on the cached mels. Returns the history."""
    if train_cfg.stage != "vae":
        raise ConfigError("train_vae requires a config with stage='vae'")
    frame_cfg = frame_cfg or FrameConfig()
    cache = FeatureCache(cache_dir)
    entries = cache.entries("train")
    if not entries:
        raise SketchTTSError("no training entries in cache")
    mean, std = cache.mel_stats["mean"], cache.mel_stats["std"]
    mels = [((cache.record(e["key"])["mel"] - mean) / std).astype(np.float32)
            for e in entries]
    r = model_cfg.compression

    torch.manual_seed(train_cfg.seed)
    vae = SpectrogramVAE(model_cfg)
    optimizer = torch.optim.Adam(vae.parameters(), lr=train_cfg.learning_rate)
    generator = torch.Generator().manual_seed(train_cfg.seed)
    start_step = 0
    history: list[dict] = []
    if resume:
        record = load_checkpoint(resume, expected_kind="vae")
        vae.load_state_dict(record["state_dict"])
        train_state = record["train_state"]
        optimizer.load_state_dict(train_state["optimizer"])
        generator.set_state(train_state["generator"])
        torch.set_rng_state(train_state["torch_rng"])
        start_step = int(train_state["step"])
        history = list(record.get("history", []))

    def _save(step: int) -> None:
        save_checkpoint(out_path, "vae", {
            "model_config": model_cfg.to_dict(),
            "state_dict": vae.state_dict(),
            "mel_stats": cache.mel_stats,
            "history": history,
            "train_state": {"step": step,
                            "optimizer": optimizer.state_dict(),
                            "generator": generator.get_state(),
                            "torch_rng": torch.get_rng_state()},
        })

    vae.train()
    for step in range(start_step, train_cfg.steps):
        _set_lr(optimizer, learning_rate_at(step, train_cfg))
        idx = batch_indices(len(mels), train_cfg.batch_size, train_cfg.seed, step)
        x, mask, lengths = _pad_mel_batch([mels[i] for i in idx], r)
        mu, logvar = vae.encode(x)
        z = vae.reparameterize(mu, logvar, generator)
        recon = vae.decode(z)
        recon_l1 = (torch.abs(recon - x) * mask).sum() / mask.sum()
        lmask = _latent_mask(lengths, r, mu.shape[-2], mu.shape[-1])
        kl = vae.kl_divergence(mu, logvar, lmask)
        loss = recon_l1 + train_cfg.kl_weight * kl
        if not torch.isfinite(loss):
            raise SketchTTSError(f"non-finite VAE loss at step {step}: "
                                 f"recon={recon_l1.item()}, kl={kl.item()}")
        optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(vae.parameters(), train_cfg.grad_clip)
        optimizer.step()
        history.append({"step": step, "loss": float(loss.item()),
                        "recon_l1": float(recon_l1.item()), "kl": float(kl.item())})
        if (step + 1) % train_cfg.log_every == 0:
            log.info("vae step %d loss %.4f recon %.4f kl %.4f", step + 1,
                     loss.item(), recon_l1.item(), kl.item())
        if (step + 1) % train_cfg.checkpoint_every == 0:
            _save(step + 1)
    _save(train_cfg.steps)
    return history


def _load_vae(model_cfg: ModelConfig, vae_ckpt: str | Path) -> tuple[dict, dict]:
    record = load_checkpoint(vae_ckpt, expected_kind="vae")
    saved_cfg = record["model_config"]
    for key in ("vae_width", "latent_channels", "compression", "mel_bins"):
        if saved_cfg[key] != getattr(model_cfg, key):
            raise ConfigError(
                f"VAE checkpoint {key}={saved_cfg[key]} does not match "
                f"model config {key}={getattr(model_cfg, key)}")
    return record["state_dict"], record["mel_stats"]


class _LdmData:
    """Per-utterance tensors precomputed once: the VAE is frozen, so latents
    and normalized targets never change during stage 2."""

    def __init__(self, cache: FeatureCache, model_cfg: ModelConfig,
                 vae: SpectrogramVAE):
        self.items = []
        mean, std = cache.mel_stats["mean"], cache.mel_stats["std"]
        stats = cache.stats
        r = model_cfg.compression
        latents = []
        with torch.no_grad():
            for e in cache.entries("train"):
                rec = cache.record(e["key"])
                mel = ((rec["mel"] - mean) / std).astype(np.float32)
                x, _, _ = _pad_mel_batch([mel], r)
                mu, _ = vae.encode(x)
                latents.append(mu[0])
                self.items.append({
                    "ids": torch.from_numpy(rec["phoneme_ids"]).long(),
                    "durations": torch.from_numpy(rec["durations"]).long(),
                    "pitch_norm": torch.from_numpy(
                        normalize_contour(rec["pitch_contour"], stats["pitch"])
                    ).float(),
                    "energy_norm": torch.from_numpy(
                        normalize_contour(rec["energy_contour"], stats["energy"])
                    ).float(),
                    "pitch_sketch": rec["pitch_sketch"].astype(np.float64),
                    "energy_sketch": rec["energy_sketch"].astype(np.float64),
                    "frames": int(rec["durations"].sum()),
                })
        flat = torch.cat([z.flatten() for z in latents])
        self.latent_scale = float(1.0 / max(flat.std().item(), 1e-6))
        self.latents = [z * self.latent_scale for z in latents]

    def __len__(self) -> int:
        return len(self.items)


def _collate_ldm(data: _LdmData, idx: np.ndarray, dropout_p: float,
                 drop_rng: np.random.Generator) -> dict:
    items = [data.items[i] for i in idx]
    m_max = max(item["ids"].shape[0] for item in items)
    b = len(items)
    ids = torch.zeros(b, m_max, dtype=torch.long)
    valid = torch.zeros(b, m_max, dtype=torch.bool)
    durations = torch.zeros(b, m_max, dtype=torch.long)
    pitch_norm = torch.zeros(b, m_max)
    energy_norm = torch.zeros(b, m_max)
    pitch_ske = torch.zeros(b, m_max)
    energy_ske = torch.zeros(b, m_max)
    for i, item in enumerate(items):
        m = item["ids"].shape[0]
        ids[i, :m] = item["ids"]
        valid[i, :m] = True
        durations[i, :m] = item["durations"]
        pitch_norm[i, :m] = item["pitch_norm"]
        energy_norm[i, :m] = item["energy_norm"]
        pair = SketchPair(ProsodySketch(item["pitch_sketch"], "pitch"),
                          ProsodySketch(item["energy_sketch"], "energy"))
        pair = sketch_dropout(pair, dropout_p, drop_rng)
        pitch_ske[i, :m] = torch.from_numpy(pair.pitch.values).float()
        energy_ske[i, :m] = torch.from_numpy(pair.energy.values).float()

    h_max = max(data.latents[i].shape[-2] for i in idx)
    w = data.latents[idx[0]].shape[-1]
    c = data.latents[idx[0]].shape[0]
    z0 = torch.zeros(b, c, h_max, w)
    for i, j in enumerate(idx):
        z = data.latents[j]
        z0[i, :, :z.shape[-2]] = z
    return {"ids": ids, "valid": valid, "durations": durations,
            "pitch_norm": pitch_norm, "energy_norm": energy_norm,
            "pitch_sketch": pitch_ske, "energy_sketch": energy_ske,
            "z0": z0, "frames": [item["frames"] for item in items],
            "h_max": h_max}


def train_ldm(cache_dir: str | Path, vae_ckpt: str | Path, out_path: str | Path,
              model_cfg: ModelConfig, diff_cfg: DiffusionConfig,
              train_cfg: TrainConfig, resume: str | Path | None = None,
              frame_cfg: FrameConfig | None = None) -> list[dict]:
    """Stage 2: joint training of everything except the frozen VAE."""
    if train_cfg.stage != "ldm":
        raise ConfigError("train_ldm requires a config with stage='ldm'")
    frame_cfg = frame_cfg or FrameConfig()
    cache = FeatureCache(cache_dir)
    stats = cache.stats
    ranges = QuantRanges.from_stats(stats)
    vae_state, mel_stats = _load_vae(model_cfg, vae_ckpt)

    torch.manual_seed(train_cfg.seed)
    model = SketchSpeechModel(model_cfg, diff_cfg, stats, ranges)
    model.vae.load_state_dict(vae_state)
    model.freeze_vae()
    vae_hash_before = state_dict_hash(model.vae)

    data = _LdmData(cache, model_cfg, model.vae)
    model.latent_scale = data.latent_scale
    r = model_cfg.compression

    optimizer = torch.optim.AdamW(list(model.trainable_parameters()),
                                  lr=train_cfg.learning_rate)
    generator = torch.Generator().manual_seed(train_cfg.seed + 1)
    start_step = 0
    history: list[dict] = []
    if resume:
        record = load_checkpoint(resume, expected_kind="ldm")
        model.load_state_dict(record["state_dict"])
        model.latent_scale = float(record["latent_scale"])
        train_state = record["train_state"]
        optimizer.load_state_dict(train_state["optimizer"])
        generator.set_state(train_state["generator"])
        torch.set_rng_state(train_state["torch_rng"])
        start_step = int(train_state["step"])
        history = list(record.get("train_history", []))
        model.freeze_vae()

    def _save(step: int) -> None:
        save_model_bundle(out_path, model, frame_cfg, mel_stats, extra={
            "train_history": history,
            "train_state": {"step": step,
                            "optimizer": optimizer.state_dict(),
                            "generator": generator.get_state(),
                            "torch_rng": torch.get_rng_state()},
        })

    schedule = model.schedule
    for step in range(start_step, train_cfg.steps):
        model.train()
        model.vae.eval()
        _set_lr(optimizer, learning_rate_at(step, train_cfg))
        idx = batch_indices(len(data), train_cfg.batch_size, train_cfg.seed, step)
        drop_rng = np.random.default_rng(
            np.uint64(train_cfg.seed) * np.uint64(15_485_863) + np.uint64(step))
        batch = _collate_ldm(data, idx, train_cfg.sketch_dropout_p, drop_rng)

        h, proj = model.text_encoder(batch["ids"], batch["valid"])
        p_pred, e_pred = model.contour_predictor(
            proj, batch["pitch_sketch"], batch["energy_sketch"], batch["valid"])
        log_d = model.duration_predictor(h.detach(), batch["valid"])

        emb = model.embed_conditions(proj, batch["pitch_norm"], batch["energy_norm"],
                                     batch["pitch_sketch"], batch["energy_sketch"])
        pad_frames = batch["h_max"] * r
        bundles = []
        for i in range(len(idx)):
            m = int(batch["valid"][i].sum().item())
            item_emb = {k: v[i, :m] for k, v in emb.items()}
            bundles.append(model.expand_and_bundle(
                item_emb, batch["durations"][i, :m], pad_frames=pad_frames))
        bundle = ConditionBundle(
            text_frame=torch.stack([b.text_frame for b in bundles]),
            pitch_sketch_frame=torch.stack([b.pitch_sketch_frame for b in bundles]),
            energy_sketch_frame=torch.stack([b.energy_sketch_frame for b in bundles]))
        cond_channels = model.condition_channels(bundle)

        z0 = batch["z0"]
        t = torch.randint(0, schedule.train_steps, (z0.shape[0],), generator=generator)
        noise = torch.randn(z0.shape, generator=generator, dtype=z0.dtype)
        z_t = schedule.q_sample(z0, t, noise)
        out = model.denoise_with_conditions(z_t, t, cond_channels)
        target = z0 if diff_cfg.prediction == "sample" else noise

        lmask = _latent_mask(batch["frames"], r, z0.shape[-2], z0.shape[-1])
        diff_loss = ((out - target) ** 2 * lmask).sum() / (lmask.sum() * z0.shape[1])

        pmask = batch["valid"].float()
        denom = pmask.sum().clamp(min=1.0)
        contour_loss = (((p_pred - batch["pitch_norm"]) ** 2 * pmask).sum()
                        + ((e_pred - batch["energy_norm"]) ** 2 * pmask).sum()) / (2 * denom)
        log_d_target = torch.log(batch["durations"].float().clamp(min=1.0))
        duration_loss = ((log_d - log_d_target) ** 2 * pmask).sum() / denom

        loss = diff_loss + contour_loss + duration_loss
        if not torch.isfinite(loss):
            raise SketchTTSError(
                f"non-finite LDM loss at step {step}: diff={diff_loss.item()}, "
                f"contour={contour_loss.item()}, duration={duration_loss.item()}")
        optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(list(model.trainable_parameters()),
                                       train_cfg.grad_clip)
        optimizer.step()
        history.append({"step": step, "loss": float(loss.item()),
                        "diffusion": float(diff_loss.item()),
                        "contour": float(contour_loss.item()),
                        "duration": float(duration_loss.item())})
        if (step + 1) % train_cfg.log_every == 0:
            log.info("ldm step %d loss %.4f diff %.4f contour %.4f dur %.4f",
                     step + 1, loss.item(), diff_loss.item(),
                     contour_loss.item(), duration_loss.item())
        if (step + 1) % train_cfg.checkpoint_every == 0:
            _save(step + 1)

    if state_dict_hash(model.vae) != vae_hash_before:
        raise SketchTTSError("frozen VAE parameters changed during LDM training")
    _save(train_cfg.steps)
    return history
