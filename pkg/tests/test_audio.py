import numpy as np
import pytest

from sketchtts.audio import (frame_signal, griffin_lim, istft, load_wav,
                             mel_filterbank, mel_spectrogram, mel_to_magnitude,
                             save_wav, stft)
from sketchtts.config import FrameConfig
from sketchtts.errors import AudioError

CFG = FrameConfig()


def test_frame_count_convention():
    wave = np.zeros(CFG.hop_size * 10)
    frames = frame_signal(wave, CFG)
    assert frames.shape == (11, CFG.window_size)


def test_frame_signal_rejects_short_audio():
    with pytest.raises(AudioError, match="audio too short"):
        frame_signal(np.zeros(CFG.window_size - 1), CFG)


def test_stft_istft_round_trip():
    rng = np.random.default_rng(0)
    wave = rng.uniform(-0.5, 0.5, CFG.hop_size * 40)
    rebuilt = istft(stft(wave, CFG), CFG, length=wave.size)
    # Interior reconstruction is near-exact; edges depend on padding.
    margin = CFG.window_size
    assert np.max(np.abs(rebuilt[margin:-margin] - wave[margin:-margin])) < 1e-8


def test_mel_filterbank_shape_and_coverage():
    bank = mel_filterbank(CFG.n_mels, CFG.window_size, CFG.sample_rate,
                          CFG.fmin, CFG.fmax)
    assert bank.shape == (80, 513)
    assert np.all(bank >= 0)
    assert np.all(bank.max(axis=1) > 0)  # no empty filter


def test_mel_spectrogram_shape():
    wave = np.sin(2 * np.pi * 440 * np.arange(CFG.hop_size * 20) / CFG.sample_rate)
    mel = mel_spectrogram(wave, CFG)
    assert mel.shape == (21, 80)
    assert np.all(np.isfinite(mel))


def test_griffin_lim_deterministic_and_length():
    rng = np.random.default_rng(1)
    mel = rng.normal(-5, 2, (30, 80))
    mag = mel_to_magnitude(mel, CFG)
    wave1 = griffin_lim(mag, CFG, n_iter=4)
    wave2 = griffin_lim(mag, CFG, n_iter=4)
    assert wave1.shape == (30 * CFG.hop_size,)
    assert np.array_equal(wave1, wave2)


def test_wav_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    wave = rng.uniform(-0.8, 0.8, 4000)
    path = tmp_path / "clip.wav"
    save_wav(path, wave, CFG.sample_rate)
    loaded = load_wav(path, CFG.sample_rate)
    assert loaded.shape == wave.shape
    assert np.max(np.abs(loaded - wave)) < 1.0 / 32000


def test_load_wav_rejects_wrong_rate(tmp_path):
    path = tmp_path / "clip.wav"
    save_wav(path, np.zeros(100), 16000)
    with pytest.raises(AudioError, match="sample rate"):
        load_wav(path, 22050)


def test_load_wav_rejects_garbage(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"not a wav file at all")
    with pytest.raises(AudioError):
        load_wav(path)
