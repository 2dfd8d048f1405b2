"""Short-run training behaviour: determinism, resume, frozen modules.

Real convergence is exercised by the acceptance suite; these runs are just
long enough to check the contracts.
"""

import numpy as np
import pytest
import torch

from sketchtts.checkpoint import load_checkpoint
from sketchtts.config import (DiffusionConfig, TrainConfig, micro_model_config,
                              micro_train_config)
from sketchtts.data import ingest_dataset, make_micro_corpus
from sketchtts.training import (batch_indices, learning_rate_at,
                                state_dict_hash, train_ldm, train_vae)

MODEL_CFG = micro_model_config()


@pytest.fixture(scope="module")
def cache_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("train_corpus")
    manifest = make_micro_corpus(root, n_clips=6, seed=0)
    cache = root / "cache"
    ingest_dataset(manifest, cache)
    return cache


def _vae_cfg(**kw):
    cfg = micro_train_config("vae")
    cfg.steps = kw.pop("steps", 4)
    cfg.checkpoint_every = kw.pop("checkpoint_every", 1000)
    cfg.batch_size = 4
    for k, v in kw.items():
        setattr(cfg, k, v)
    return cfg


def _ldm_cfg(**kw):
    cfg = micro_train_config("ldm")
    cfg.steps = kw.pop("steps", 3)
    cfg.checkpoint_every = kw.pop("checkpoint_every", 1000)
    cfg.batch_size = 4
    for k, v in kw.items():
        setattr(cfg, k, v)
    return cfg


def test_lr_schedule_shape():
    cfg = TrainConfig(stage="vae", steps=1000, warmup_steps=100,
                      learning_rate=1e-3, min_lr_ratio=0.1)
    assert learning_rate_at(0, cfg) == pytest.approx(1e-5)
    assert learning_rate_at(99, cfg) == pytest.approx(1e-3)
    assert learning_rate_at(999, cfg) == pytest.approx(1e-4, rel=1e-2)
    mid = learning_rate_at(550, cfg)
    assert 1e-4 < mid < 1e-3


def test_batch_indices_stateless():
    a = batch_indices(16, 8, seed=3, step=42)
    b = batch_indices(16, 8, seed=3, step=42)
    c = batch_indices(16, 8, seed=3, step=43)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_vae_training_deterministic(cache_dir, tmp_path):
    h1 = train_vae(cache_dir, tmp_path / "v1.pt", MODEL_CFG, _vae_cfg(seed=11))
    h2 = train_vae(cache_dir, tmp_path / "v2.pt", MODEL_CFG, _vae_cfg(seed=11))
    assert [h["loss"] for h in h1] == [h["loss"] for h in h2]


def test_vae_resume_reproduces_straight_run(cache_dir, tmp_path):
    straight = train_vae(cache_dir, tmp_path / "s.pt", MODEL_CFG,
                         _vae_cfg(steps=4, seed=7))
    train_vae(cache_dir, tmp_path / "r.pt", MODEL_CFG,
              _vae_cfg(steps=2, seed=7))
    resumed = train_vae(cache_dir, tmp_path / "r.pt", MODEL_CFG,
                        _vae_cfg(steps=4, seed=7), resume=tmp_path / "r.pt")
    assert [h["loss"] for h in resumed] == [h["loss"] for h in straight]
    s = load_checkpoint(tmp_path / "s.pt", "vae")
    r = load_checkpoint(tmp_path / "r.pt", "vae")
    for key in s["state_dict"]:
        assert torch.equal(s["state_dict"][key], r["state_dict"][key])


def test_vae_zero_kl_weight_gives_pure_reconstruction(cache_dir, tmp_path):
    history = train_vae(cache_dir, tmp_path / "k.pt", MODEL_CFG,
                        _vae_cfg(steps=2, kl_weight=0.0))
    for h in history:
        assert h["loss"] == pytest.approx(h["recon_l1"], abs=1e-12)


def test_ldm_trains_and_freezes_vae(cache_dir, tmp_path):
    train_vae(cache_dir, tmp_path / "vae.pt", MODEL_CFG, _vae_cfg(steps=2))
    history = train_ldm(cache_dir, tmp_path / "vae.pt", tmp_path / "ldm.pt",
                        MODEL_CFG, DiffusionConfig(), _ldm_cfg(steps=3))
    assert len(history) == 3
    assert all(np.isfinite(h["loss"]) for h in history)

    vae_record = load_checkpoint(tmp_path / "vae.pt", "vae")
    bundle = load_checkpoint(tmp_path / "ldm.pt", "ldm")
    for key, tensor in vae_record["state_dict"].items():
        assert torch.equal(bundle["state_dict"][f"vae.{key}"], tensor)
    assert bundle["latent_scale"] > 0
    assert {"pitch", "energy"} <= set(bundle["contour_stats"])
    assert {"pitch", "energy", "sketch"} <= set(bundle["quant_ranges"])


def test_ldm_training_deterministic(cache_dir, tmp_path):
    train_vae(cache_dir, tmp_path / "vae.pt", MODEL_CFG, _vae_cfg(steps=2))
    h1 = train_ldm(cache_dir, tmp_path / "vae.pt", tmp_path / "l1.pt",
                   MODEL_CFG, DiffusionConfig(), _ldm_cfg(seed=5))
    h2 = train_ldm(cache_dir, tmp_path / "vae.pt", tmp_path / "l2.pt",
                   MODEL_CFG, DiffusionConfig(), _ldm_cfg(seed=5))
    assert [h["loss"] for h in h1] == [h["loss"] for h in h2]


def test_ldm_resume_reproduces_straight_run(cache_dir, tmp_path):
    train_vae(cache_dir, tmp_path / "vae.pt", MODEL_CFG, _vae_cfg(steps=2))
    straight = train_ldm(cache_dir, tmp_path / "vae.pt", tmp_path / "s.pt",
                         MODEL_CFG, DiffusionConfig(), _ldm_cfg(steps=4, seed=9))
    train_ldm(cache_dir, tmp_path / "vae.pt", tmp_path / "r.pt",
              MODEL_CFG, DiffusionConfig(), _ldm_cfg(steps=2, seed=9))
    resumed = train_ldm(cache_dir, tmp_path / "vae.pt", tmp_path / "r.pt",
                        MODEL_CFG, DiffusionConfig(), _ldm_cfg(steps=4, seed=9),
                        resume=tmp_path / "r.pt")
    assert [h["loss"] for h in resumed] == [h["loss"] for h in straight]


def test_train_config_file_overlay(tmp_path):
    import json
    from sketchtts.config import TrainConfig
    from sketchtts.errors import ConfigError

    path = tmp_path / "train.json"
    path.write_text(json.dumps({"version": 1, "steps": 77, "kl_weight": 0.5}))
    cfg = TrainConfig(stage="vae").apply_file(path)
    assert cfg.steps == 77 and cfg.kl_weight == 0.5

    path.write_text(json.dumps({"steps": 10}))
    with pytest.raises(ConfigError, match="version"):
        TrainConfig(stage="vae").apply_file(path)

    path.write_text(json.dumps({"version": 1, "bogus_key": 1}))
    with pytest.raises(ConfigError, match="bogus_key"):
        TrainConfig(stage="vae").apply_file(path)
