"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The heavyweight criteria share one session-scoped overfit run (16-clip
corpus, 2k-step VAE, 2k-step LDM). Set SKETCHTTS_ACCEPTANCE_DIR to a
writable path to keep those artifacts between invocations; by default
everything trains from scratch in a session tmp directory (~35 minutes on a
single CPU core).
"""

import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import torch

from sketchtts.config import (DiffusionConfig, FrameConfig, micro_model_config,
                              micro_train_config)
from sketchtts.data import (EMPHASIS_WORDS, CORPUS_SENTENCES, FeatureCache,
                            ingest_dataset, make_micro_corpus)
from sketchtts.evaluation import (emphasis_probe, evaluate_manifest,
                                  make_emphasis_sketch, rmse_contour,
                                  sketch_adherence)
from sketchtts.pipeline import Synthesizer
from sketchtts.prosody import (ContourStats, ProsodyContour, denormalize_contour,
                               normalize_contour, quantize, savgol_smooth,
                               smooth_to_sketch)
from sketchtts.sketch2contour import SketchPair, sketch_dropout
from sketchtts.text_frontend import length_regulate, phonemize
from sketchtts.training import train_ldm, train_vae

FRAME_CFG = FrameConfig()


def _report(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    line = f"ACCEPTANCE {name}: {status}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    assert passed, line


# ---------------------------------------------------------------------------
# Shared overfit artifacts
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def overfit(tmp_path_factory):
    env_dir = os.environ.get("SKETCHTTS_ACCEPTANCE_DIR")
    root = Path(env_dir) if env_dir else tmp_path_factory.mktemp("overfit")
    root.mkdir(parents=True, exist_ok=True)
    manifest = root / "corpus" / "manifest.jsonl"
    cache = root / "cache"
    vae_ckpt = root / "vae.pt"
    ldm_ckpt = root / "ldm.pt"
    model_cfg = micro_model_config()

    if not manifest.exists():
        make_micro_corpus(root / "corpus", n_clips=16, seed=0)
    ingest_dataset(manifest, cache)

    vae_seconds = ldm_seconds = 0.0
    if not vae_ckpt.exists():
        started = time.time()
        train_vae(cache, vae_ckpt, model_cfg, micro_train_config("vae"))
        vae_seconds = time.time() - started
    if not ldm_ckpt.exists():
        started = time.time()
        train_ldm(cache, vae_ckpt, ldm_ckpt, model_cfg, DiffusionConfig(),
                  micro_train_config("ldm"))
        ldm_seconds = time.time() - started
    return {
        "root": root,
        "manifest": manifest,
        "cache": cache,
        "vae_ckpt": vae_ckpt,
        "ldm_ckpt": ldm_ckpt,
        "vae_seconds": vae_seconds,
        "ldm_seconds": ldm_seconds,
        "synthesizer": Synthesizer.from_checkpoint(ldm_ckpt),
    }


# ---------------------------------------------------------------------------
# Criterion: Savitzky-Golay correctness
# ---------------------------------------------------------------------------

def _windowed_polyfit(values, window, polyorder):
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    half = window // 2
    out = np.empty(n)
    for i in range(n):
        if i < half:
            start, pos = 0, i
        elif i >= n - half:
            start, pos = n - window, i - (n - window)
        else:
            start, pos = i - half, half
        coeffs = np.polyfit(np.arange(window), values[start:start + window],
                            polyorder)
        out[i] = np.polyval(coeffs, pos)
    return out


def test_criterion_savgol_correctness():
    started = time.time()
    rng = np.random.default_rng(0)
    polyorder = 2
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(polyorder + 2, 80))
        x = np.arange(m, dtype=np.float64)
        coeffs = rng.normal(scale=3.0, size=polyorder + 1)
        values = sum(c * x ** k for k, c in enumerate(coeffs))
        smoothed = savgol_smooth(values, window=9, polyorder=polyorder)
        worst = max(worst, float(np.max(np.abs(smoothed - values))))

    m = np.arange(41)
    noisy = np.sin(2 * np.pi * m / 20) + rng.normal(0, 0.1, 41)
    smoothed = savgol_smooth(noisy, window=9, polyorder=2)
    oracle = _windowed_polyfit(noisy, 9, 2)
    oracle_err = float(np.max(np.abs(smoothed - oracle)))
    elapsed = time.time() - started
    _report("savgol-correctness",
            worst < 1e-9 and oracle_err < 1e-9 and elapsed < 5.0,
            f"poly_err={worst:.2e} oracle_err={oracle_err:.2e} t={elapsed:.2f}s")


# ---------------------------------------------------------------------------
# Criterion: sketch fidelity on synthetic contours
# ---------------------------------------------------------------------------

def test_criterion_sketch_fidelity():
    started = time.time()
    rng = np.random.default_rng(1)
    scores = []
    for _ in range(50):
        m = int(rng.integers(20, 60))
        x = np.linspace(0, 1, m)
        trend = 200.0 + 40.0 * np.sin(2 * np.pi * rng.uniform(0.5, 1.5) * x
                                      + rng.uniform(0, 2 * np.pi))
        trend += 30.0 * rng.uniform(-1, 1) * x
        noise = rng.uniform(-12.0, 12.0, m)
        sketch = smooth_to_sketch(ProsodyContour(trend + noise, "pitch"))
        scores.append(sketch_adherence(sketch.values, trend, "pitch"))
    mean_score = float(np.mean(scores))
    elapsed = time.time() - started
    _report("sketch-fidelity", mean_score >= 0.9 and elapsed < 10.0,
            f"mean_adherence={mean_score:.3f} t={elapsed:.2f}s")


# ---------------------------------------------------------------------------
# Criterion: shape/invariant suite
# ---------------------------------------------------------------------------

def test_criterion_shape_invariants():
    started = time.time()
    rng = np.random.default_rng(2)
    checks = {}

    rows = rng.normal(size=(7, 5))
    durations = rng.integers(1, 6, 7)
    expanded = length_regulate(rows, durations)
    checks["length_regulator_sum"] = (
        expanded.shape[0] == durations.sum()
        and np.allclose(expanded.sum(axis=0),
                        (rows * durations[:, None]).sum(axis=0)))

    from sketchtts.acoustic import Denoiser, SpectrogramVAE, build_denoiser_input
    cfg = micro_model_config()
    torch.manual_seed(0)
    z = torch.randn(1, cfg.latent_channels, 8, 20)
    cn = build_denoiser_input(z, torch.zeros(1, 3, 8, 20))
    net = Denoiser(cfg).eval()
    checks["channel_arithmetic"] = (
        cn.shape[1] == cfg.latent_channels + 3
        and net(cn, torch.tensor([3])).shape[1] == cfg.latent_channels)

    vae = SpectrogramVAE(cfg).eval()
    ok = True
    for t in (4, 36, 100):
        mel = torch.randn(1, 1, t, 80)
        mu, _ = vae.encode(mel)
        ok &= mu.shape == (1, cfg.latent_channels, t // 4, 20)
        ok &= vae.decode(mu).shape == mel.shape
    checks["vae_shape_round_trip"] = ok

    q_vals = np.sort(rng.uniform(-0.5, 1.5, 500))
    q = quantize(q_vals, 0.0, 1.0)
    checks["quantizer"] = (
        quantize(np.array([0.0]), 0, 1)[0] == 0
        and quantize(np.array([1.0]), 0, 1)[0] == 255
        and quantize(np.array([2.0]), 0, 1)[0] == 255
        and np.all(np.diff(q) >= 0)
        and np.array_equal(q, quantize(np.clip(q_vals, 0, 1), 0, 1)))

    from sketchtts.prosody import ProsodySketch
    pair = SketchPair(ProsodySketch(rng.uniform(0, 1, 8), "pitch"),
                      ProsodySketch(rng.uniform(0, 1, 8), "energy"))
    drop_rng = np.random.default_rng(3)
    zeroed = sum(
        1 for _ in range(10_000)
        if (lambda p: p.pitch.is_absent or p.energy.is_absent)(
            sketch_dropout(pair, 0.2, drop_rng)))
    rate = zeroed / 10_000
    checks["dropout_rate"] = 0.18 <= rate <= 0.22

    stats = ContourStats(mean=210.0, std=45.0, min=80.0, max=380.0, kind="pitch")
    values = rng.uniform(60, 400, 200)
    back = denormalize_contour(normalize_contour(values, stats), stats)
    checks["normalization_round_trip"] = float(np.max(np.abs(back - values))) < 1e-6

    elapsed = time.time() - started
    failed = [k for k, v in checks.items() if not v]
    _report("shape-invariants", not failed and elapsed < 60.0,
            f"failed={failed or 'none'} rate={rate:.3f} t={elapsed:.1f}s")


# ---------------------------------------------------------------------------
# Criterion: micro-overfit VAE
# ---------------------------------------------------------------------------

def test_criterion_vae_overfit(overfit):
    from sketchtts.checkpoint import load_checkpoint
    record = load_checkpoint(overfit["vae_ckpt"], "vae")
    history = record["history"]
    first = float(np.mean([h["recon_l1"] for h in history[:20]]))
    last = float(np.mean([h["recon_l1"] for h in history[-20:]]))

    synth = overfit["synthesizer"]
    cache = FeatureCache(overfit["cache"])
    mean, std = cache.mel_stats["mean"], cache.mel_stats["std"]
    corrs = []
    l1s = []
    with torch.no_grad():
        for entry in cache.entries("train"):
            mel = (cache.record(entry["key"])["mel"] - mean) / std
            t = mel.shape[0]
            t_pad = -(-t // 4) * 4
            x = np.full((1, 1, t_pad, 80), mel.min(), dtype=np.float32)
            x[0, 0, :t] = mel
            mu, _ = synth.model.vae.encode(torch.from_numpy(x))
            rec = synth.model.vae.decode(mu)[0, 0, :t].numpy()
            corrs.append(float(np.corrcoef(mel.ravel(), rec.ravel())[0, 1]))
            l1s.append(float(np.abs(rec - mel).mean()))
    runtime_ok = overfit["vae_seconds"] < 30 * 60
    _report("vae-overfit",
            last < 0.5 * first and min(corrs) > 0.95 and max(l1s) < 0.2
            and runtime_ok,
            f"recon {first:.4f}->{last:.4f} ({last/first:.1%}), "
            f"min_corr={min(corrs):.4f}, max_l1={max(l1s):.4f}, "
            f"train={overfit['vae_seconds']:.0f}s")


# ---------------------------------------------------------------------------
# Criterion: conditioning direction (reference-RMSE, 3 seeds)
# ---------------------------------------------------------------------------

def test_ldm_overfit_loss_halves(overfit):
    from sketchtts.checkpoint import load_checkpoint
    history = load_checkpoint(overfit["ldm_ckpt"], "ldm")["train_history"]
    first = float(np.mean([h["diffusion"] for h in history[:20]]))
    last = float(np.mean([h["diffusion"] for h in history[-20:]]))
    assert last < 0.5 * first, f"diffusion loss {first:.4f} -> {last:.4f}"


def test_duration_predictor_overfit_within_one_frame(overfit):
    from sketchtts.text_frontend import durations_from_log
    model = overfit["synthesizer"].model
    cache = FeatureCache(overfit["cache"])
    seen = set()
    with torch.no_grad():
        for entry in cache.entries("train"):
            if entry["transcript"] in seen:
                continue
            seen.add(entry["transcript"])
            rec = cache.record(entry["key"])
            ids = torch.tensor([list(rec["phoneme_ids"])], dtype=torch.long)
            h, _ = model.text_encoder(ids)
            predicted = durations_from_log(model.duration_predictor(h)[0].numpy())
            diff = np.abs(predicted - rec["durations"])
            assert diff.max() <= 1, \
                f"{entry['id']}: duration off by {int(diff.max())} frames"


def test_contour_predictor_overfit_within_10hz(overfit):
    model = overfit["synthesizer"].model
    cache = FeatureCache(overfit["cache"])
    errors = []
    with torch.no_grad():
        for entry in cache.entries("train"):
            rec = cache.record(entry["key"])
            ids = torch.tensor([list(rec["phoneme_ids"])], dtype=torch.long)
            _, proj = model.text_encoder(ids)
            p_ske = torch.from_numpy(rec["pitch_sketch"])[None].float()
            e_ske = torch.from_numpy(rec["energy_sketch"])[None].float()
            p_pred, _ = model.contour_predictor(proj, p_ske, e_ske)
            p_hz = denormalize_contour(p_pred[0].numpy(), model.stats["pitch"])
            errors.append(rmse_contour(p_hz, rec["pitch_contour"].astype(np.float64)))
    assert max(errors) < 10.0, f"worst P_pred RMSE {max(errors):.2f} Hz"


def test_criterion_sketch_conditioning_direction(overfit):
    started = time.time()
    report = evaluate_manifest(overfit["synthesizer"], overfit["manifest"],
                               overfit["cache"], conditions=("sketch", "zero"),
                               seeds=(0, 1, 2))
    (overfit["root"] / "direction_report.json").write_text(json.dumps(report, indent=1))
    lines = []
    ok = True
    for seed in ("0", "1", "2"):
        with_sketch = report["conditions"]["sketch"][seed]
        without = report["conditions"]["zero"][seed]
        pitch_ok = with_sketch["pitch_rmse_hz"] < without["pitch_rmse_hz"]
        energy_ok = with_sketch["energy_rmse_db"] < without["energy_rmse_db"]
        ok &= pitch_ok and energy_ok
        lines.append(
            f"seed{seed}: pitch {with_sketch['pitch_rmse_hz']:.1f}<"
            f"{without['pitch_rmse_hz']:.1f}Hz:{pitch_ok} "
            f"energy {with_sketch['energy_rmse_db']:.2f}<"
            f"{without['energy_rmse_db']:.2f}dB:{energy_ok}")
    runtime = overfit["ldm_seconds"] + (time.time() - started)
    ok &= runtime < 2 * 3600
    lines.append(f"train+eval={runtime:.0f}s")
    _report("sketch-conditioning-direction", ok, "; ".join(lines))


# ---------------------------------------------------------------------------
# Criterion: emphasis probe
# ---------------------------------------------------------------------------

def test_criterion_emphasis_probe(overfit):
    synth = overfit["synthesizer"]
    text = CORPUS_SENTENCES[0]
    targets = EMPHASIS_WORDS[0]
    probes = [emphasis_probe(synth, text, w, seed=0) for w in targets]
    argmax_passes = sum(p.passed for p in probes)

    wins, total = 0, 0
    for j, probe_j in enumerate(probes):
        own = sketch_adherence(probe_j.sketch, probe_j.realized_pitch, "pitch")
        for k, probe_k in enumerate(probes):
            if j == k:
                continue
            total += 1
            cross = sketch_adherence(probe_k.sketch, probe_j.realized_pitch,
                                     "pitch")
            wins += own > cross
    _report("emphasis-probe", argmax_passes == 4 and wins >= 10,
            f"argmax {argmax_passes}/4, own>cross {wins}/{total}")


def test_emphasis_probe_flat_sketch_reports_no_peak(overfit):
    from sketchtts.prosody import ProsodySketch
    flat = ProsodySketch(np.full(22, 0.5), "pitch")
    result = emphasis_probe(overfit["synthesizer"], CORPUS_SENTENCES[0], 1,
                            sketch=flat)
    assert result.status == "no-peak"


# ---------------------------------------------------------------------------
# Criterion: determinism (CLI wav bytes, service realized_pitch)
# ---------------------------------------------------------------------------

def test_criterion_determinism(overfit, tmp_path):
    env = dict(os.environ)
    env["PYTHONHASHSEED"] = "0"
    blobs = []
    for name in ("a.wav", "b.wav"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "sketchtts.cli", "synthesize",
             "--model", str(overfit["ldm_ckpt"]),
             "--text", "We all know one way home.",
             "--seed", "7", "--steps", "12", "--out", str(out)],
            capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        blobs.append(out.read_bytes())
    wav_identical = blobs[0] == blobs[1]

    from fastapi.testclient import TestClient
    from sketchtts.service import create_app
    client = TestClient(create_app(overfit["synthesizer"]))
    payload = {"text": "My mother may mean no harm.",
               "sketch": {"kind": "pitch",
                          "points": [[0.0, 0.2], [0.4, 0.9], [1.0, 0.3]]},
               "seed": 3, "steps": 12}
    r1 = client.post("/v1/synthesize?format=json", json=payload)
    r2 = client.post("/v1/synthesize?format=json", json=payload)
    assert r1.status_code == 200 and r2.status_code == 200
    pitch_identical = r1.json()["realized_pitch"] == r2.json()["realized_pitch"]
    audio_identical = r1.json()["audio_base64"] == r2.json()["audio_base64"]
    _report("determinism",
            wav_identical and pitch_identical and audio_identical,
            f"wav_bytes={wav_identical} service_pitch={pitch_identical}")


def test_service_round_trip_with_model(overfit):
    from fastapi.testclient import TestClient
    from sketchtts.service import create_app
    client = TestClient(create_app(overfit["synthesizer"]))

    health = client.get("/v1/health")
    assert health.status_code == 200

    text = "A lone yellow lion lay low."
    ph = client.post("/v1/phonemize", json={"text": text})
    assert ph.status_code == 200
    m = ph.json()["M"]

    resp = client.post("/v1/synthesize?format=json", json={
        "text": text,
        "sketch": {"kind": "pitch", "points": [[0.0, 0.1], [1.0, 0.9]]},
        "seed": 1, "steps": 10})
    assert resp.status_code == 200
    body = resp.json()
    assert body["M"] == m
    assert len(body["realized_pitch"]) == m
    assert len(body["audio_base64"]) > 1000

    wav = client.post("/v1/synthesize", json={"text": text, "seed": 1,
                                              "steps": 10})
    assert wav.status_code == 200
    assert wav.headers["content-type"] == "audio/wav"
    assert len(json.loads(wav.headers["x-realized-pitch"])) == m


# ---------------------------------------------------------------------------
# Criterion: end-to-end CLI smoke
# ---------------------------------------------------------------------------

def test_criterion_cli_smoke(tmp_path):
    from sketchtts.cli import main

    corpus = tmp_path / "corpus"
    cache = tmp_path / "cache"
    vae = tmp_path / "vae.pt"
    ldm = tmp_path / "ldm.pt"
    wav = tmp_path / "out.wav"
    report = tmp_path / "report.json"
    steps = ["make-corpus --out {c} --clips 16 --seed 0",
             "ingest --manifest {c}/manifest.jsonl --cache {k}",
             "train-vae --cache {k} --out {v} --steps 30 --checkpoint-every 1000",
             "train-ldm --cache {k} --vae {v} --out {l} --steps 30 "
             "--checkpoint-every 1000",
             "synthesize --model {l} --text hello --seed 1 --steps 8 --out {w}",
             "evaluate --model {l} --manifest {c}/manifest.jsonl --cache {k} "
             "--steps 8 --out {r}"]
    codes = []
    for template in steps:
        argv = template.format(c=corpus, k=cache, v=vae, l=ldm, w=wav,
                               r=report).split()
        codes.append(main(argv))
    report_data = json.loads(report.read_text())
    _report("cli-smoke",
            all(code == 0 for code in codes) and wav.exists()
            and "pitch_rmse_hz" in json.dumps(report_data),
            f"exit_codes={codes}")
