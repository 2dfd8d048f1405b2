"""Text to phonemes, phonemes to embeddings, durations and frame expansion."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from . import lexicon
from .config import ModelConfig
from .errors import AlignmentError, PhonemizeError, VocabularyError
from .nets import ConvFFNTransformerBlock, sinusoidal_positions

PAD = "PAD"
SILENCE = "SIL"
PAUSE = "SP"

_VOWELS = ["AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY",
           "IH", "IY", "OW", "OY", "UH", "UW"]
_CONSONANTS = ["B", "CH", "D", "DH", "F", "G", "HH", "JH", "K", "L", "M",
               "N", "NG", "P", "R", "S", "SH", "T", "TH", "V", "W", "Y",
               "Z", "ZH"]

SYMBOLS: list[str] = [PAD, SILENCE, PAUSE] + _CONSONANTS + [
    v + s for v in _VOWELS for s in ("0", "1", "2")]
SYMBOL_TO_ID: dict[str, int] = {s: i for i, s in enumerate(SYMBOLS)}

_TOKEN_RE = re.compile(r"[a-z']+|[,.!?;:]")
_PUNCTUATION = set(",.!?;:")


def is_pause(symbol: str) -> bool:
    return symbol in (PAUSE, SILENCE)


@dataclass
class PhonemeSequence:
    """Phoneme symbols for one utterance plus word bookkeeping.

    ``word_spans[k]`` is the half-open phoneme index range of ``words[k]``;
    pause tokens sit between spans and belong to no word.
    """

    symbols: list[str]
    source_text: str
    words: list[str] = field(default_factory=list)
    word_spans: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def ids(self) -> list[int]:
        return symbols_to_ids(self.symbols)

    def pause_mask(self) -> np.ndarray:
        return np.array([is_pause(s) for s in self.symbols], dtype=bool)

    def spans_json(self) -> list[dict]:
        return [{"word": w, "start": a, "end": b}
                for w, (a, b) in zip(self.words, self.word_spans)]


def symbols_to_ids(symbols: list[str]) -> list[int]:
    try:
        return [SYMBOL_TO_ID[s] for s in symbols]
    except KeyError as exc:
        raise VocabularyError(f"unknown phoneme symbol: {exc.args[0]!r}") from exc


def phonemize(text: str) -> PhonemeSequence:
    """Deterministic text-to-phoneme conversion.

    Words resolve through the built-in lexicon, then letter-to-sound rules;
    punctuation becomes a pause token. Raises if the text contains nothing
    pronounceable.
    """
    if not text or not text.strip():
        raise PhonemizeError("empty text")
    tokens = _TOKEN_RE.findall(text.lower())
    symbols: list[str] = []
    words: list[str] = []
    spans: list[tuple[int, int]] = []
    for token in tokens:
        if token in _PUNCTUATION:
            symbols.append(PAUSE)
            continue
        phones = lexicon.lookup(token) or lexicon.letter_to_sound(token)
        if not phones:
            continue
        start = len(symbols)
        symbols.extend(phones)
        words.append(token)
        spans.append((start, len(symbols)))
    if not words:
        raise PhonemizeError(f"no phonemizable content in {text!r}")
    return PhonemeSequence(symbols=symbols, source_text=text,
                           words=words, word_spans=spans)


class TextEncoder(nn.Module):
    """Phoneme ids -> contextual embeddings, plus the D-to-F projection.

    A stack of Transformer blocks whose feed-forward layers are 1D
    convolutions; a separate convolution projects the output down to the
    mel-bin width for frame-rate conditioning.
    """

    def __init__(self, cfg: ModelConfig, vocab_size: int = len(SYMBOLS)):
        super().__init__()
        self.cfg = cfg
        self.embed = nn.Embedding(vocab_size, cfg.phoneme_dim, padding_idx=0)
        self.blocks = nn.ModuleList(
            ConvFFNTransformerBlock(cfg.phoneme_dim, cfg.attention_heads,
                                    cfg.ffn_hidden, cfg.ffn_kernel, cfg.dropout)
            for _ in range(cfg.text_blocks))
        self.norm = nn.LayerNorm(cfg.phoneme_dim)
        self.project = nn.Conv1d(cfg.phoneme_dim, cfg.mel_bins,
                                 kernel_size=3, padding=1)
        self.scale = math.sqrt(cfg.phoneme_dim)

    def forward(self, ids: torch.Tensor,
                valid: torch.Tensor | None = None) -> tuple[torch.Tensor, torch.Tensor]:
        """ids (B, M) -> embedding (B, M, D) and projected (B, M, F)."""
        if ids.numel() == 0 or ids.shape[-1] == 0:
            raise PhonemizeError("cannot encode an empty phoneme sequence")
        if valid is None:
            valid = torch.ones_like(ids, dtype=torch.bool)
        x = self.embed(ids) * self.scale
        x = x + sinusoidal_positions(ids.shape[1], self.cfg.phoneme_dim,
                                     device=ids.device, dtype=x.dtype)
        keep = valid.unsqueeze(-1).to(x.dtype)
        x = x * keep
        for block in self.blocks:
            x = block(x, valid) * keep
        h = self.norm(x) * keep
        proj = self.project(h.transpose(1, 2)).transpose(1, 2) * keep
        return h, proj


class DurationPredictor(nn.Module):
    """Two convolutional layers with layer norm, then a scalar head.

    Outputs log-durations; see :func:`durations_from_log` for the integer
    decoding rule used at inference.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        k = cfg.duration_kernel
        h = cfg.duration_hidden
        self.conv1 = nn.Conv1d(cfg.phoneme_dim, h, k, padding=k // 2)
        self.norm1 = nn.LayerNorm(h)
        self.conv2 = nn.Conv1d(h, h, k, padding=k // 2)
        self.norm2 = nn.LayerNorm(h)
        self.dropout = nn.Dropout(cfg.dropout)
        self.head = nn.Linear(h, 1)

    def forward(self, h: torch.Tensor,
                valid: torch.Tensor | None = None) -> torch.Tensor:
        """h (B, M, D) -> log-durations (B, M)."""
        if valid is None:
            valid = torch.ones(h.shape[:2], dtype=torch.bool, device=h.device)
        keep = valid.unsqueeze(-1).to(h.dtype)
        x = h * keep
        x = self.conv1(x.transpose(1, 2)).transpose(1, 2)
        x = self.dropout(torch.relu(self.norm1(x))) * keep
        x = self.conv2(x.transpose(1, 2)).transpose(1, 2)
        x = self.dropout(torch.relu(self.norm2(x))) * keep
        return self.head(x).squeeze(-1) * valid.to(h.dtype)


def durations_from_log(log_durations: np.ndarray, max_frames: int = 200) -> np.ndarray:
    """Exponentiate and round log-durations; every token keeps >= 1 frame.

    The per-phoneme cap guards against untrained or diverged predictors
    requesting absurd expansions.
    """
    d = np.round(np.exp(np.asarray(log_durations, dtype=np.float64)))
    return np.clip(d, 1, max_frames).astype(np.int64)


def length_regulate(sequence: np.ndarray, durations) -> np.ndarray:
    """Repeat row m of ``sequence`` durations[m] times (numpy variant)."""
    durations = np.asarray(durations, dtype=np.int64)
    if durations.size != np.asarray(sequence).shape[0]:
        raise AlignmentError("durations length must match sequence rows")
    if durations.sum() == 0:
        raise AlignmentError("empty expansion")
    return np.repeat(np.asarray(sequence), durations, axis=0)


def length_regulate_torch(sequence: torch.Tensor, durations: torch.Tensor) -> torch.Tensor:
    """Repeat rows by duration counts; differentiable w.r.t. the sequence."""
    if int(durations.sum().item()) == 0:
        raise AlignmentError("empty expansion")
    return torch.repeat_interleave(sequence, durations, dim=0)
