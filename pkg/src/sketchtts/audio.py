"""Waveform I/O, short-time framing, mel spectrograms and phase reconstruction.

Everything here is plain numpy/scipy so the full analysis-synthesis chain is
deterministic and dependency-light. One framing convention is used across the
package: centered frames with reflect padding, ``T = 1 + len(x) // hop``.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .config import FrameConfig
from .errors import AudioError

LOG_MEL_FLOOR = 1e-5


def load_wav(path: str | Path, expected_rate: int = 22050) -> np.ndarray:
    """Read a WAV file into float64 samples in [-1, 1]."""
    try:
        rate, data = wavfile.read(str(path))
    except Exception as exc:
        raise AudioError(f"cannot read wav file {path}: {exc}") from exc
    if rate != expected_rate:
        raise AudioError(f"{path}: sample rate {rate} != expected {expected_rate}")
    if data.ndim > 1:
        data = data.mean(axis=1)
    if data.dtype == np.int16:
        wave = np.clip(data.astype(np.float64) / 32767.0, -1.0, 1.0)
    elif data.dtype == np.int32:
        wave = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        wave = data.astype(np.float64)
    else:
        raise AudioError(f"{path}: unsupported sample format {data.dtype}")
    if wave.size == 0:
        raise AudioError(f"{path}: empty audio")
    return wave


def save_wav(path: str | Path, wave: np.ndarray, sample_rate: int = 22050) -> None:
    """Write mono 16-bit PCM."""
    clipped = np.clip(np.asarray(wave, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype(np.int16)
    wavfile.write(str(path), sample_rate, pcm)


def frame_signal(wave: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Slice a waveform into overlapping centered frames, shape (T, window).

    Frame t covers samples [t*hop - window/2, t*hop + window/2), with reflect
    padding at the edges so edge frames keep the signal's local statistics.
    """
    wave = np.asarray(wave, dtype=np.float64)
    if wave.ndim != 1:
        raise AudioError("expected a mono waveform")
    if wave.size < cfg.window_size:
        raise AudioError("audio too short")
    half = cfg.window_size // 2
    padded = np.pad(wave, half, mode="reflect")
    n_frames = cfg.num_frames(wave.size)
    idx = np.arange(cfg.window_size)[None, :] + cfg.hop_size * np.arange(n_frames)[:, None]
    return padded[idx]


@lru_cache(maxsize=8)
def _hann(window_size: int) -> np.ndarray:
    n = np.arange(window_size)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / window_size)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int,
                   fmin: float, fmax: float) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, n_fft//2 + 1)."""
    n_bins = n_fft // 2 + 1
    fft_freqs = np.linspace(0.0, sample_rate / 2.0, n_bins)
    mel_pts = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    bank = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        left, center, right = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        up = (fft_freqs - left) / max(center - left, 1e-9)
        down = (right - fft_freqs) / max(right - center, 1e-9)
        bank[m] = np.maximum(0.0, np.minimum(up, down))
    return bank


def stft(wave: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Complex STFT with hann window, shape (T, n_fft//2 + 1)."""
    frames = frame_signal(wave, cfg) * _hann(cfg.window_size)[None, :]
    return np.fft.rfft(frames, axis=1)


def istft(spec: np.ndarray, cfg: FrameConfig, length: int | None = None) -> np.ndarray:
    """Inverse STFT by windowed overlap-add, returning ``length`` samples.

    Defaults to T * hop samples, the canonical synthesis length for a
    spectrogram of T frames under the centered framing convention.
    """
    window = _hann(cfg.window_size)
    frames = np.fft.irfft(spec, n=cfg.window_size, axis=1) * window[None, :]
    n_frames = frames.shape[0]
    half = cfg.window_size // 2
    total = (n_frames - 1) * cfg.hop_size + cfg.window_size
    buf = np.zeros(total)
    norm = np.zeros(total)
    win_sq = window * window
    for t in range(n_frames):
        start = t * cfg.hop_size
        buf[start:start + cfg.window_size] += frames[t]
        norm[start:start + cfg.window_size] += win_sq
    buf = buf / np.maximum(norm, 1e-10)
    if length is None:
        length = n_frames * cfg.hop_size
    out = buf[half:half + length]
    if out.size < length:
        out = np.pad(out, (0, length - out.size))
    return out


def mel_spectrogram(wave: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Log-mel spectrogram, shape (T, n_mels). Natural log of floored power."""
    power = np.abs(stft(wave, cfg)) ** 2
    bank = mel_filterbank(cfg.n_mels, cfg.window_size, cfg.sample_rate,
                          cfg.fmin, cfg.fmax)
    mel = power @ bank.T
    return np.log(np.maximum(mel, LOG_MEL_FLOOR))


@lru_cache(maxsize=8)
def _mel_pinv(n_mels: int, n_fft: int, sample_rate: int,
              fmin: float, fmax: float) -> np.ndarray:
    return np.linalg.pinv(mel_filterbank(n_mels, n_fft, sample_rate, fmin, fmax))


def mel_to_magnitude(log_mel: np.ndarray, cfg: FrameConfig,
                     refine_iters: int = 30) -> np.ndarray:
    """Approximate linear-frequency magnitudes from a log-mel spectrogram.

    Pseudo-inverse initialization followed by multiplicative non-negative
    least-squares updates in the power domain; the plain pseudo-inverse
    clips negative energy and biases the reconstruction down.
    """
    power = np.exp(np.asarray(log_mel, dtype=np.float64))
    bank = mel_filterbank(cfg.n_mels, cfg.window_size, cfg.sample_rate,
                          cfg.fmin, cfg.fmax)
    pinv = _mel_pinv(cfg.n_mels, cfg.window_size, cfg.sample_rate,
                     cfg.fmin, cfg.fmax)
    lin_power = np.maximum(power @ pinv.T, 1e-12)
    gram = bank.T @ bank
    target = power @ bank
    for _ in range(refine_iters):
        lin_power *= target / (lin_power @ gram + 1e-12)
    return np.sqrt(lin_power)


def griffin_lim(magnitude: np.ndarray, cfg: FrameConfig,
                n_iter: int = 32) -> np.ndarray:
    """Iterative phase reconstruction from an STFT magnitude.

    Zero initial phase, so the output is a deterministic function of the
    input. Returns exactly T * hop samples.
    """
    magnitude = np.asarray(magnitude, dtype=np.float64)
    n_frames = magnitude.shape[0]
    length = n_frames * cfg.hop_size
    spec = magnitude.astype(np.complex128)
    wave = istft(spec, cfg, length)
    for _ in range(n_iter):
        rebuilt = stft(wave, cfg)[:n_frames]
        phase = rebuilt / np.maximum(np.abs(rebuilt), 1e-10)
        wave = istft(magnitude * phase, cfg, length)
    return wave
