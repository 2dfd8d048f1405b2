"""Shared neural building blocks: attention blocks with convolutional
feed-forward layers, positional encodings, and quantized-value embeddings."""

from __future__ import annotations

import torch
from torch import nn


def sinusoidal_positions(length: int, dim: int, device=None,
                         dtype=torch.float32) -> torch.Tensor:
    """Classic sin/cos position table, shape (length, dim)."""
    position = torch.arange(length, device=device, dtype=torch.float64)
    half = dim // 2
    freq = torch.exp(torch.arange(half, device=device, dtype=torch.float64)
                     * -(torch.log(torch.tensor(10000.0)) / max(half - 1, 1)))
    angles = position[:, None] * freq[None, :]
    table = torch.zeros(length, dim, device=device, dtype=torch.float64)
    table[:, 0::2] = torch.sin(angles)
    table[:, 1::2] = torch.cos(angles[:, : dim - half])
    return table.to(dtype)


class ConvFeedForward(nn.Module):
    """Position-wise feed-forward with 1D convolutions instead of linears."""

    def __init__(self, dim: int, hidden: int, kernel: int, dropout: float):
        super().__init__()
        self.conv1 = nn.Conv1d(dim, hidden, kernel, padding=kernel // 2)
        self.conv2 = nn.Conv1d(hidden, dim, kernel, padding=kernel // 2)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.conv1(x.transpose(1, 2))
        y = self.dropout(torch.relu(y))
        y = self.conv2(y).transpose(1, 2)
        return y


class ConvFFNTransformerBlock(nn.Module):
    """Pre-norm self-attention block with a convolutional feed-forward."""

    def __init__(self, dim: int, heads: int, ffn_hidden: int,
                 ffn_kernel: int, dropout: float):
        super().__init__()
        self.norm_attn = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, dropout=dropout,
                                          batch_first=True)
        self.norm_ffn = nn.LayerNorm(dim)
        self.ffn = ConvFeedForward(dim, ffn_hidden, ffn_kernel, dropout)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor,
                valid: torch.Tensor | None = None) -> torch.Tensor:
        pad_mask = None if valid is None else ~valid
        h = self.norm_attn(x)
        attn, _ = self.attn(h, h, h, key_padding_mask=pad_mask,
                            need_weights=False)
        x = x + self.dropout(attn)
        x = x + self.dropout(self.ffn(self.norm_ffn(x)))
        return x


class QuantizedEmbedding(nn.Module):
    """Embedding table over quantization bins, initialized smoothly.

    The sinusoidal initialization makes neighbouring bins map to nearby
    vectors, so inputs falling into bins rarely seen during tiny-corpus
    training still condition the model sensibly. Training updates the table
    like any embedding.
    """

    def __init__(self, bins: int, dim: int, init_scale: float = 0.5):
        super().__init__()
        self.bins = bins
        self.table = nn.Embedding(bins, dim)
        with torch.no_grad():
            self.table.weight.copy_(
                sinusoidal_positions(bins, dim, dtype=torch.float32) * init_scale)

    def forward(self, values: torch.Tensor, lo: float, hi: float) -> torch.Tensor:
        """Quantize float values over [lo, hi] and embed, (..., ) -> (..., dim)."""
        unit = torch.clamp((values - lo) / (hi - lo), 0.0, 1.0)
        idx = torch.floor(unit * (self.bins - 1) + 0.5).long()
        return self.table(idx)
