"""Pitch/energy extraction, phoneme pooling, sketch smoothing and quantization.

The pipeline from audio to a trainable prosody condition is:

    waveform -> frame-level F0 / energy
             -> phoneme-level contour (mean over each phoneme's frames)
             -> unvoiced gaps filled by linear interpolation (pitch only)
             -> Savitzky-Golay smoothing + per-utterance min-max -> sketch

Contours stay in physical units (Hz, dB); sketches live in [0, 1]. An
all-zero sketch is the designated "absent" sentinel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import savgol_filter

from .audio import frame_signal
from .config import FrameConfig
from .errors import AlignmentError, AudioError, ConfigError

ENERGY_EPS = 1e-9
F0_MIN = 60.0
F0_MAX = 500.0
VOICING_THRESHOLD = 0.30
SILENCE_RMS = 1e-4
SKETCH_RANGE = (0.0, 1.0)


@dataclass
class ProsodyContour:
    """Phoneme-level pitch (Hz) or energy (dB) series."""

    values: np.ndarray
    kind: str  # "pitch" | "energy"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.kind not in ("pitch", "energy"):
            raise ConfigError(f"unknown contour kind: {self.kind!r}")
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("contour values must be finite")

    def __len__(self) -> int:
        return self.values.size


@dataclass
class ProsodySketch:
    """Smoothed trend in [0, 1]; all zeros means "no sketch given"."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.kind not in ("pitch", "energy"):
            raise ConfigError(f"unknown sketch kind: {self.kind!r}")
        if self.values.size and (self.values.min() < -1e-9 or self.values.max() > 1 + 1e-9):
            raise ConfigError("sketch values must lie in [0, 1]")

    def __len__(self) -> int:
        return self.values.size

    @property
    def is_absent(self) -> bool:
        return bool(np.all(self.values == 0.0))

    @classmethod
    def absent(cls, length: int, kind: str) -> "ProsodySketch":
        return cls(np.zeros(length), kind)


@dataclass
class ContourStats:
    """Dataset-level normalization statistics for one contour kind."""

    mean: float
    std: float
    min: float
    max: float
    kind: str

    def __post_init__(self):
        if self.std <= 0:
            raise ConfigError("std must be positive")
        if self.max <= self.min:
            raise ConfigError("max must exceed min")

    def normalized_range(self) -> tuple[float, float]:
        return ((self.min - self.mean) / self.std,
                (self.max - self.mean) / self.std)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std,
                "min": self.min, "max": self.max}

    @classmethod
    def from_dict(cls, d: dict, kind: str) -> "ContourStats":
        return cls(mean=float(d["mean"]), std=float(d["std"]),
                   min=float(d["min"]), max=float(d["max"]), kind=kind)

    @classmethod
    def from_values(cls, values: np.ndarray, kind: str) -> "ContourStats":
        values = np.asarray(values, dtype=np.float64)
        std = float(values.std())
        if std <= 0:
            raise ConfigError(f"degenerate {kind} distribution (zero variance)")
        return cls(mean=float(values.mean()), std=std,
                   min=float(values.min()), max=float(values.max()), kind=kind)


def extract_f0(wave: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Frame-level F0 in Hz via autocorrelation; 0 marks unvoiced frames.

    Time-domain normalized autocorrelation per centered frame, peak search in
    [F0_MIN, F0_MAX], parabolic interpolation around the winning lag. A frame
    is voiced when its normalized ACF peak clears VOICING_THRESHOLD and its
    RMS clears the silence floor.
    """
    frames = frame_signal(wave, cfg)
    frames = frames - frames.mean(axis=1, keepdims=True)
    n = cfg.window_size
    lag_min = int(cfg.sample_rate / F0_MAX)
    lag_max = int(np.ceil(cfg.sample_rate / F0_MIN))
    if lag_max + 1 >= n:
        raise AudioError("window too short for the F0 search range")

    # Biased ACF of every frame at once through the FFT.
    nfft = 1
    while nfft < 2 * n:
        nfft *= 2
    spectrum = np.fft.rfft(frames, n=nfft, axis=1)
    acf = np.fft.irfft(spectrum.real ** 2 + spectrum.imag ** 2, n=nfft, axis=1)[:, :n]

    rms = np.sqrt((frames ** 2).mean(axis=1))
    r0 = acf[:, 0]
    f0 = np.zeros(frames.shape[0])
    for t in range(frames.shape[0]):
        if rms[t] < SILENCE_RMS or r0[t] <= 0:
            continue
        segment = acf[t, lag_min:lag_max + 1] / r0[t]
        k = int(np.argmax(segment)) + lag_min
        if acf[t, k] / r0[t] < VOICING_THRESHOLD:
            continue
        # Parabolic refinement needs both neighbours.
        if 1 <= k < n - 1:
            y0, y1, y2 = acf[t, k - 1], acf[t, k], acf[t, k + 1]
            denom = y0 - 2.0 * y1 + y2
            delta = 0.5 * (y0 - y2) / denom if abs(denom) > 1e-12 else 0.0
            delta = float(np.clip(delta, -0.5, 0.5))
        else:
            delta = 0.0
        candidate = cfg.sample_rate / (k + delta)
        if F0_MIN <= candidate <= F0_MAX:
            f0[t] = candidate
    return f0


def extract_energy(wave: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Frame-level energy: 20 * log10(frame RMS + 1e-9), in dB."""
    frames = frame_signal(wave, cfg)
    rms = np.sqrt((frames ** 2).mean(axis=1))
    return 20.0 * np.log10(rms + ENERGY_EPS)


def pool_to_phoneme(frames: np.ndarray, durations, voiced_only: bool = False) -> np.ndarray:
    """Average frame values over each phoneme's span.

    With ``voiced_only`` (pitch), zeros are treated as unvoiced and excluded
    from the mean; a phoneme with no voiced frames gets 0.
    """
    frames = np.asarray(frames, dtype=np.float64)
    durations = np.asarray(durations, dtype=np.int64)
    if durations.size and durations.min() < 1:
        raise AlignmentError("every phoneme needs at least one frame")
    if durations.sum() > frames.size:
        raise AlignmentError(
            f"durations cover {durations.sum()} frames but only {frames.size} exist")
    out = np.zeros(durations.size)
    start = 0
    for m, d in enumerate(durations):
        chunk = frames[start:start + d]
        if voiced_only:
            voiced = chunk[chunk > 0]
            out[m] = voiced.mean() if voiced.size else 0.0
        else:
            out[m] = chunk.mean()
        start += d
    return out


def interpolate_unvoiced(values: np.ndarray) -> np.ndarray:
    """Replace zero entries by linear interpolation between nonzero neighbours.

    Leading/trailing zeros take the nearest nonzero value; an all-zero input
    is returned unchanged.
    """
    values = np.asarray(values, dtype=np.float64)
    nonzero = np.flatnonzero(values != 0.0)
    if nonzero.size == 0 or nonzero.size == values.size:
        return values.copy()
    idx = np.arange(values.size)
    return np.interp(idx, nonzero, values[nonzero])


def savgol_smooth(values: np.ndarray, window: int = 9, polyorder: int = 2) -> np.ndarray:
    """Savitzky-Golay smoothing with the window clamped to the series length.

    Series too short to fit the polynomial (M < polyorder + 1) pass through
    untouched.
    """
    values = np.asarray(values, dtype=np.float64)
    m = values.size
    if m < polyorder + 1:
        return values.copy()
    w = min(window, m)
    if w % 2 == 0:
        w -= 1
    while w <= polyorder:
        w += 2
    if w > m:
        return values.copy()
    return savgol_filter(values, w, polyorder, mode="interp")


def minmax_normalize(values: np.ndarray) -> np.ndarray:
    """Map to [0, 1] by the per-utterance range; a constant series maps to 0.5."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi - lo < 1e-12:
        return np.full(values.size, 0.5)
    return (values - lo) / (hi - lo)


def smooth_to_sketch(contour: ProsodyContour, window: int = 9,
                     polyorder: int = 2) -> ProsodySketch:
    """Derive a [0, 1] trend sketch from a phoneme-level contour."""
    base = contour.values
    if contour.kind == "pitch":
        base = interpolate_unvoiced(base)
    smoothed = savgol_smooth(base, window, polyorder)
    return ProsodySketch(minmax_normalize(smoothed), contour.kind)


def normalize_contour(values: np.ndarray, stats: ContourStats) -> np.ndarray:
    """Z-normalize by dataset statistics."""
    if stats.std <= 0:
        raise ConfigError("std must be positive")
    return (np.asarray(values, dtype=np.float64) - stats.mean) / stats.std


def denormalize_contour(values: np.ndarray, stats: ContourStats) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) * stats.std + stats.mean


def quantize(values: np.ndarray, lo: float, hi: float, bins: int = 256) -> np.ndarray:
    """Linear binning of ``values`` over [lo, hi] into integer indices.

    Out-of-range inputs clamp to the end bins; the rule is
    floor(u * (bins - 1) + 0.5) on the unit-scaled value.
    """
    if hi <= lo:
        raise ConfigError("quantization range must have hi > lo")
    values = np.asarray(values, dtype=np.float64)
    unit = np.clip((values - lo) / (hi - lo), 0.0, 1.0)
    return np.floor(unit * (bins - 1) + 0.5).astype(np.int64)


def contour_to_json(contour: ProsodyContour | ProsodySketch,
                    phonemes: list[str]) -> dict:
    if len(phonemes) != len(contour):
        raise AlignmentError("phoneme and value counts differ")
    return {"kind": contour.kind, "phonemes": list(phonemes),
            "values": [float(v) for v in contour.values]}


def save_contour(path: str | Path, contour, phonemes: list[str]) -> None:
    Path(path).write_text(json.dumps(contour_to_json(contour, phonemes), indent=1))


def load_contour_file(path: str | Path) -> dict:
    """Read a contour/sketch JSON file and validate its shape."""
    data = json.loads(Path(path).read_text())
    if data.get("kind") not in ("pitch", "energy"):
        raise ConfigError(f"{path}: kind must be pitch or energy")
    if len(data.get("phonemes", [])) != len(data.get("values", ())):
        raise AlignmentError(f"{path}: phoneme and value counts differ")
    return data


def save_stats(path: str | Path, stats_by_kind: dict[str, ContourStats]) -> None:
    payload = {kind: s.to_dict() for kind, s in stats_by_kind.items()}
    Path(path).write_text(json.dumps(payload, indent=1))


def load_stats(path: str | Path) -> dict[str, ContourStats]:
    raw = json.loads(Path(path).read_text())
    return {kind: ContourStats.from_dict(d, kind) for kind, d in raw.items()}
