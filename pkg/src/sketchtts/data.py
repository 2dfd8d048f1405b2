"""Dataset plumbing: the bundled micro corpus, manifests and feature ingest.

The micro corpus is fully synthetic: harmonic-source "speech" with known
alignments, smooth per-utterance pitch/energy trajectories and a word-level
emphasis bump per prosodic variant. It exists so the two-stage training can
be overfit and probed on a single desk machine.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import load_wav, mel_spectrogram, save_wav
from .config import FrameConfig, ModelConfig
from .errors import AlignmentError, SketchTTSError
from .prosody import (ContourStats, ProsodyContour, extract_energy, extract_f0,
                      interpolate_unvoiced, pool_to_phoneme, smooth_to_sketch)
from .text_frontend import PhonemeSequence, is_pause, phonemize, symbols_to_ids

log = logging.getLogger(__name__)

CACHE_VERSION = 1

SONORANTS = {"W", "Y", "R", "L", "M", "N", "NG"}
VOICED_OBSTRUENTS = {"B", "D", "G", "V", "Z", "DH", "JH", "ZH"}

CORPUS_SENTENCES = [
    "I didn't say you stole the money.",
    "We all know one way home.",
    "My mother may mean no harm.",
    "A lone yellow lion lay low.",
]
# Word indices eligible for emphasis, one set per sentence (variant v
# emphasizes EMPHASIS_WORDS[s][v]).
EMPHASIS_WORDS = [
    [1, 2, 4, 6],   # didn't / say / stole / money
    [1, 2, 3, 5],   # all / know / one / home
    [1, 2, 3, 5],   # mother / may / mean / harm
    [1, 2, 3, 4],   # lone / yellow / lion / lay
]


def _is_vowel(symbol: str) -> bool:
    return symbol[-1].isdigit()


def _symbol_seed(symbol: str) -> int:
    return int.from_bytes(hashlib.sha1(symbol.encode()).digest()[:4], "big")


def _phoneme_duration(symbol: str, rng: np.random.Generator) -> int:
    if is_pause(symbol):
        return int(rng.integers(6, 11))
    if _is_vowel(symbol):
        if symbol.endswith("1") or symbol.endswith("2"):
            return int(rng.integers(9, 16))
        return int(rng.integers(6, 11))
    if symbol in SONORANTS:
        return int(rng.integers(5, 9))
    return int(rng.integers(3, 7))


def _phoneme_amplitude(symbol: str) -> tuple[float, float]:
    """(harmonic, noise) source amplitudes for one phoneme class."""
    if is_pause(symbol):
        return 0.0, 0.0008
    if _is_vowel(symbol):
        return 0.28, 0.003
    if symbol in SONORANTS:
        return 0.20, 0.003
    if symbol in VOICED_OBSTRUENTS:
        return 0.12, 0.03
    return 0.0, 0.09


def _harmonic_weights(symbol: str, n_harmonics: int) -> np.ndarray:
    """Per-phoneme spectral colour: stable pseudo-random harmonic rolloff."""
    rng = np.random.default_rng(_symbol_seed(symbol))
    k = np.arange(1, n_harmonics + 1)
    weights = (0.5 + rng.random(n_harmonics)) / k
    return weights / np.sqrt((weights ** 2).sum())


@dataclass
class RenderedClip:
    wave: np.ndarray
    sequence: PhonemeSequence
    durations: np.ndarray
    emphasized_word: int


def render_clip(sentence_idx: int, variant: int, frame_cfg: FrameConfig,
                seed: int = 0) -> RenderedClip:
    """Synthesize one deterministic corpus clip.

    Durations depend only on the sentence (so the duration predictor can be
    overfit exactly); pitch/energy trajectories vary per variant and carry a
    raised-cosine emphasis bump over one word.
    """
    text = CORPUS_SENTENCES[sentence_idx]
    seq = phonemize(text)
    dur_rng = np.random.default_rng(900 + sentence_idx)
    durations = np.array([_phoneme_duration(s, dur_rng) for s in seq.symbols],
                         dtype=np.int64)
    total_frames = int(durations.sum())
    hop = frame_cfg.hop_size
    sr = frame_cfg.sample_rate
    length = (total_frames - 1) * hop

    rng = np.random.default_rng(seed * 7919 + sentence_idx * 17 + variant)
    emphasized_word = EMPHASIS_WORDS[sentence_idx][variant % 4]
    emph_span = seq.word_spans[emphasized_word]

    # Frame-level F0: base, slow wiggle, declination, emphasis bump.
    starts = np.concatenate([[0], np.cumsum(durations)])
    base_f0 = rng.uniform(150.0, 225.0)
    t_unit = np.arange(total_frames) / max(total_frames - 1, 1)
    wiggle = 1.0 + 0.05 * np.sin(2 * np.pi * (rng.uniform(0.8, 1.8) * t_unit
                                              + rng.random()))
    declination = np.linspace(1.04, 0.92, total_frames)
    bump = np.ones(total_frames)
    b0, b1 = starts[emph_span[0]], starts[emph_span[1]]
    width = b1 - b0
    lo = max(0, int(b0 - width * 0.5))
    hi = min(total_frames, int(b1 + width * 0.5))
    gain = rng.uniform(1.35, 1.55)
    bump[lo:hi] += (gain - 1.0) * 0.5 * (
        1.0 - np.cos(2 * np.pi * (np.arange(lo, hi) - lo) / max(hi - lo - 1, 1)))
    f0_frames = base_f0 * wiggle * declination * bump

    # Frame-level amplitude: per-phoneme source levels, emphasis boost, LFO.
    harm_amp = np.zeros(total_frames)
    noise_amp = np.zeros(total_frames)
    for m, symbol in enumerate(seq.symbols):
        h, n = _phoneme_amplitude(symbol)
        harm_amp[starts[m]:starts[m + 1]] = h
        noise_amp[starts[m]:starts[m + 1]] = n
    emph_frames = slice(b0, b1)
    harm_amp[emph_frames] *= 1.9
    noise_amp[emph_frames] *= 1.5
    lfo = 1.0 + 0.15 * np.sin(2 * np.pi * (rng.uniform(0.5, 1.5) * t_unit
                                           + rng.random()))
    harm_amp = harm_amp * lfo
    noise_amp = noise_amp * lfo

    # Interpolate frame tracks to sample rate (frame t is centered at t*hop).
    frame_centers = np.arange(total_frames) * hop
    sample_pos = np.arange(length)
    f0_samples = np.interp(sample_pos, frame_centers, f0_frames)
    harm_samples = np.interp(sample_pos, frame_centers, harm_amp)
    noise_samples = np.interp(sample_pos, frame_centers, noise_amp)

    phase = 2.0 * np.pi * np.cumsum(f0_samples) / sr
    wave = np.zeros(length)
    max_harmonics = 12
    for m, symbol in enumerate(seq.symbols):
        h_amp, _ = _phoneme_amplitude(symbol)
        if h_amp <= 0.0:
            continue
        s0 = starts[m] * hop
        s1 = min(starts[m + 1] * hop, length)
        if s1 <= s0:
            continue
        seg_f0 = f0_samples[s0:s1].max()
        n_h = int(min(max_harmonics, (frame_cfg.fmax - 200.0) / max(seg_f0, 1.0)))
        weights = _harmonic_weights(symbol, max(n_h, 1))
        seg = np.zeros(s1 - s0)
        for k in range(1, n_h + 1):
            seg += weights[k - 1] * np.sin(k * phase[s0:s1])
        edge = min(128, (s1 - s0) // 4)
        if edge > 0:
            ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(edge) / edge)
            seg[:edge] *= ramp
            seg[-edge:] *= ramp[::-1]
        wave[s0:s1] += seg * harm_samples[s0:s1]

    noise = rng.standard_normal(length)
    noise = np.concatenate([[0.0], np.diff(noise)])  # high-frequency emphasis
    wave = wave + noise * noise_samples

    peak = np.abs(wave).max()
    if peak > 0:
        wave = wave * (0.71 / peak)
    return RenderedClip(wave=wave, sequence=seq, durations=durations,
                        emphasized_word=emphasized_word)


def make_micro_corpus(out_dir: str | Path, n_clips: int = 16, seed: int = 0,
                      frame_cfg: FrameConfig | None = None) -> Path:
    """Write wavs, alignments and a manifest; returns the manifest path."""
    frame_cfg = frame_cfg or FrameConfig()
    out = Path(out_dir)
    (out / "wav").mkdir(parents=True, exist_ok=True)
    (out / "align").mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(n_clips):
        sentence_idx = i % len(CORPUS_SENTENCES)
        variant = i // len(CORPUS_SENTENCES)
        clip = render_clip(sentence_idx, variant, frame_cfg, seed=seed)
        wav_path = out / "wav" / f"clip_{i:03d}.wav"
        align_path = out / "align" / f"clip_{i:03d}.json"
        save_wav(wav_path, clip.wave, frame_cfg.sample_rate)
        align_path.write_text(json.dumps({
            "phonemes": clip.sequence.symbols,
            "frames": clip.durations.tolist(),
        }))
        entries.append({
            "id": f"clip_{i:03d}",
            "audio_path": str(wav_path.relative_to(out)),
            "transcript": CORPUS_SENTENCES[sentence_idx],
            "alignment_path": str(align_path.relative_to(out)),
            "split": "train",
            "emphasized_word": clip.emphasized_word,
        })
    manifest = out / "manifest.jsonl"
    with manifest.open("w") as fh:
        for entry in entries:
            fh.write(json.dumps(entry) + "\n")
    return manifest


@dataclass
class ManifestEntry:
    id: str
    audio_path: Path
    transcript: str
    alignment_path: Path
    split: str = "train"
    extra: dict = field(default_factory=dict)


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    base = path.parent
    entries = []
    for line_no, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        raw = json.loads(line)
        known = {"id", "audio_path", "transcript", "alignment_path", "split"}
        entries.append(ManifestEntry(
            id=raw.get("id", f"utt_{line_no:04d}"),
            audio_path=base / raw["audio_path"],
            transcript=raw["transcript"],
            alignment_path=base / raw["alignment_path"],
            split=raw.get("split", "train"),
            extra={k: v for k, v in raw.items() if k not in known},
        ))
    if not entries:
        raise SketchTTSError(f"manifest {path} is empty")
    return entries


def load_alignment(path: str | Path) -> tuple[list[str], np.ndarray]:
    data = json.loads(Path(path).read_text())
    phonemes = list(data["phonemes"])
    frames = np.asarray(data["frames"], dtype=np.int64)
    if len(phonemes) != frames.size:
        raise AlignmentError(f"{path}: phoneme/frame count mismatch")
    if frames.size and frames.min() < 1:
        raise AlignmentError(f"{path}: every phoneme needs >= 1 frame")
    return phonemes, frames


@dataclass
class IngestReport:
    processed: int = 0
    cached: int = 0
    skipped: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.processed + self.cached + len(self.skipped)


def _entry_key(entry: ManifestEntry, cfg_token: str) -> str:
    h = hashlib.sha1()
    h.update(entry.audio_path.read_bytes())
    h.update(entry.transcript.encode())
    h.update(entry.alignment_path.read_bytes())
    h.update(cfg_token.encode())
    return h.hexdigest()[:16]


def ingest_dataset(manifest_path: str | Path, cache_dir: str | Path,
                   frame_cfg: FrameConfig | None = None,
                   model_cfg: ModelConfig | None = None) -> IngestReport:
    """Extract and cache per-utterance features; content-hashed, idempotent.

    Entries with missing alignments or unreadable audio are skipped with a
    warning; the run aborts if more than 10% of entries are skipped.
    """
    frame_cfg = frame_cfg or FrameConfig()
    model_cfg = model_cfg or ModelConfig()
    cache = Path(cache_dir)
    features = cache / "features"
    features.mkdir(parents=True, exist_ok=True)
    cfg_token = (f"{frame_cfg}|sg={model_cfg.sg_window},{model_cfg.sg_polyorder}"
                 f"|cache_v{CACHE_VERSION}")

    entries = load_manifest(manifest_path)
    seen_splits: dict[str, str] = {}
    for entry in entries:
        key = str(entry.audio_path)
        if seen_splits.setdefault(key, entry.split) != entry.split:
            raise SketchTTSError(
                f"{entry.audio_path} appears in both "
                f"'{seen_splits[key]}' and '{entry.split}' splits")
    report = IngestReport()
    index_entries = []
    for entry in entries:
        try:
            if not entry.alignment_path.exists():
                raise AlignmentError(f"missing alignment {entry.alignment_path}")
            key = _entry_key(entry, cfg_token)
            npz_path = features / f"{key}.npz"
            if npz_path.exists():
                report.cached += 1
            else:
                _extract_entry(entry, npz_path, frame_cfg, model_cfg)
                report.processed += 1
            index_entries.append({"id": entry.id, "key": key,
                                  "split": entry.split,
                                  "transcript": entry.transcript,
                                  **entry.extra})
        except (SketchTTSError, OSError, ValueError) as exc:
            log.warning("skipping %s: %s", entry.id, exc)
            report.skipped.append((entry.id, str(exc)))
    if report.skipped and len(report.skipped) > 0.10 * report.total:
        raise SketchTTSError(
            f"{len(report.skipped)}/{report.total} entries skipped; aborting")

    index = {"version": CACHE_VERSION, "cfg_token": cfg_token,
             "entries": index_entries}
    (cache / "index.json").write_text(json.dumps(index, indent=1))
    _write_stats(cache, index_entries)
    return report


def _extract_entry(entry: ManifestEntry, npz_path: Path,
                   frame_cfg: FrameConfig, model_cfg: ModelConfig) -> None:
    wave = load_wav(entry.audio_path, frame_cfg.sample_rate)
    phonemes, durations = load_alignment(entry.alignment_path)
    seq = phonemize(entry.transcript)
    if seq.symbols != phonemes:
        raise AlignmentError(
            f"alignment phonemes disagree with phonemized transcript for {entry.id}")
    n_frames = frame_cfg.num_frames(wave.size)
    total = int(durations.sum())
    if total > n_frames:
        raise AlignmentError(
            f"{entry.id}: alignment covers {total} frames, audio has {n_frames}")

    mel = mel_spectrogram(wave, frame_cfg)[:total]
    f0 = extract_f0(wave, frame_cfg)[:total]
    energy = extract_energy(wave, frame_cfg)[:total]
    pitch_contour = interpolate_unvoiced(
        pool_to_phoneme(f0, durations, voiced_only=True))
    energy_contour = pool_to_phoneme(energy, durations)
    pitch_sketch = smooth_to_sketch(ProsodyContour(pitch_contour, "pitch"),
                                    model_cfg.sg_window, model_cfg.sg_polyorder)
    energy_sketch = smooth_to_sketch(ProsodyContour(energy_contour, "energy"),
                                     model_cfg.sg_window, model_cfg.sg_polyorder)
    np.savez(
        npz_path,
        mel=mel.astype(np.float32),
        f0_frames=f0.astype(np.float32),
        energy_frames=energy.astype(np.float32),
        pitch_contour=pitch_contour.astype(np.float32),
        energy_contour=energy_contour.astype(np.float32),
        pitch_sketch=pitch_sketch.values.astype(np.float32),
        energy_sketch=energy_sketch.values.astype(np.float32),
        durations=durations,
        phoneme_ids=np.asarray(symbols_to_ids(phonemes), dtype=np.int64),
        symbols=np.asarray(phonemes),
        transcript=np.asarray(entry.transcript),
    )


def _write_stats(cache: Path, index_entries: list[dict]) -> None:
    train_keys = [e["key"] for e in index_entries if e["split"] == "train"]
    if not train_keys:
        raise SketchTTSError("no train-split entries; cannot compute statistics")
    keys_hash = hashlib.sha1("|".join(sorted(train_keys)).encode()).hexdigest()
    stats_path = cache / "stats.json"
    if stats_path.exists():
        existing = json.loads(stats_path.read_text())
        if existing.get("keys_hash") == keys_hash:
            return
    pitch_vals, energy_vals, mel_vals = [], [], []
    for key in train_keys:
        rec = np.load(cache / "features" / f"{key}.npz")
        pitch_vals.append(rec["pitch_contour"])
        energy_vals.append(rec["energy_contour"])
        mel_vals.append(rec["mel"].ravel())
    pitch = np.concatenate(pitch_vals).astype(np.float64)
    energy = np.concatenate(energy_vals).astype(np.float64)
    mel = np.concatenate(mel_vals).astype(np.float64)
    payload = {
        "keys_hash": keys_hash,
        "pitch": ContourStats.from_values(pitch, "pitch").to_dict(),
        "energy": ContourStats.from_values(energy, "energy").to_dict(),
        "mel": {"mean": float(mel.mean()), "std": float(mel.std()),
                "min": float(mel.min()), "max": float(mel.max())},
    }
    stats_path.write_text(json.dumps(payload, indent=1))


class FeatureCache:
    """Read access to an ingested cache for training and evaluation."""

    def __init__(self, cache_dir: str | Path):
        self.root = Path(cache_dir)
        index_path = self.root / "index.json"
        if not index_path.exists():
            raise SketchTTSError(f"no ingest cache at {self.root}; run ingest first")
        self.index = json.loads(index_path.read_text())
        raw_stats = json.loads((self.root / "stats.json").read_text())
        self.stats = {
            "pitch": ContourStats.from_dict(raw_stats["pitch"], "pitch"),
            "energy": ContourStats.from_dict(raw_stats["energy"], "energy"),
        }
        self.mel_stats = raw_stats["mel"]
        self._records: dict[str, dict] = {}

    def entries(self, split: str | None = None) -> list[dict]:
        rows = self.index["entries"]
        if split:
            rows = [r for r in rows if r["split"] == split]
        return rows

    def record(self, key: str) -> dict:
        if key not in self._records:
            with np.load(self.root / "features" / f"{key}.npz") as rec:
                self._records[key] = {name: rec[name] for name in rec.files}
        return self._records[key]
