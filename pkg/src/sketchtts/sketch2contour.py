"""From free-hand drawings to valid sketches, and from sketches to contours.

A user draws a polyline over normalized axes; it is resampled to one value
per phoneme. The contour predictor then restores detailed pitch/energy
series (in normalized units) from the text encoding plus the sketches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .config import ModelConfig
from .errors import AlignmentError, ValidationError
from .nets import ConvFFNTransformerBlock, sinusoidal_positions
from .prosody import ProsodySketch


@dataclass
class UserPolyline:
    """Ordered (x, y) vertices with x strictly increasing, both axes in [0, 1]."""

    points: list[tuple[float, float]]
    kind: str = "pitch"

    def __post_init__(self):
        if self.kind not in ("pitch", "energy"):
            raise ValidationError(f"polyline kind must be pitch or energy, got {self.kind!r}")
        if len(self.points) < 2:
            raise ValidationError("polyline needs at least 2 points")
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValidationError("polyline x coordinates must be strictly increasing")
        if min(xs) < 0 or max(xs) > 1 or min(ys) < 0 or max(ys) > 1:
            raise ValidationError("polyline coordinates must lie in [0, 1]")

    @classmethod
    def from_json(cls, data: dict) -> "UserPolyline":
        try:
            points = [(float(x), float(y)) for x, y in data["points"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed polyline payload: {exc}") from exc
        return cls(points=points, kind=data.get("kind", "pitch"))

    def to_json(self) -> dict:
        return {"kind": self.kind, "points": [[x, y] for x, y in self.points]}


def resample_user_sketch(polyline: UserPolyline, M: int) -> ProsodySketch:
    """Sample the polyline at phoneme midpoints x = (m + 0.5) / M.

    Piecewise-linear between vertices, extended flat beyond the endpoints.
    """
    if M < 1:
        raise ValidationError("M must be >= 1")
    xs = np.array([p[0] for p in polyline.points])
    ys = np.array([p[1] for p in polyline.points])
    targets = (np.arange(M) + 0.5) / M
    values = np.interp(targets, xs, ys)  # np.interp extends flat by default
    return ProsodySketch(np.clip(values, 0.0, 1.0), polyline.kind)


@dataclass
class SketchPair:
    """Pitch and energy sketches for one utterance; all-zero means absent."""

    pitch: ProsodySketch
    energy: ProsodySketch

    def __post_init__(self):
        if len(self.pitch) != len(self.energy):
            raise AlignmentError("pitch and energy sketches must share length M")
        if self.pitch.kind != "pitch" or self.energy.kind != "energy":
            raise ValidationError("sketch kinds are swapped")

    def __len__(self) -> int:
        return len(self.pitch)

    @classmethod
    def empty(cls, M: int) -> "SketchPair":
        return cls(ProsodySketch.absent(M, "pitch"),
                   ProsodySketch.absent(M, "energy"))

    @classmethod
    def from_single(cls, sketch: ProsodySketch, M: int) -> "SketchPair":
        """Route one sketch into a pair; a lone sketch defaults to pitch."""
        if sketch.kind == "energy":
            return cls(ProsodySketch.absent(M, "pitch"), sketch)
        return cls(sketch, ProsodySketch.absent(M, "energy"))


def sketch_dropout(pair: SketchPair, p: float, rng: np.random.Generator) -> SketchPair:
    """Training-time augmentation: with probability p, zero out exactly one
    of the two sketches (fair coin), never both."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError("dropout probability must be in [0, 1]")
    if rng.random() >= p:
        return pair
    m = len(pair)
    if rng.random() < 0.5:
        return SketchPair(ProsodySketch.absent(m, "pitch"), pair.energy)
    return SketchPair(pair.pitch, ProsodySketch.absent(m, "energy"))


class ContourPredictor(nn.Module):
    """Restore detailed prosody contours from text plus trend sketches.

    Projected text embeddings and linearly embedded sketch scalars are
    summed, run through attention blocks with convolutional feed-forwards,
    and decoded by two scalar heads into normalized pitch/energy values per
    phoneme.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        dim = cfg.mel_bins
        self.embed_pitch = nn.Linear(1, dim)
        self.embed_energy = nn.Linear(1, dim)
        self.blocks = nn.ModuleList(
            ConvFFNTransformerBlock(dim, cfg.attention_heads, cfg.ffn_hidden,
                                    cfg.ffn_kernel, cfg.dropout)
            for _ in range(cfg.predictor_blocks))
        self.norm = nn.LayerNorm(dim)
        self.head = nn.Linear(dim, 2)
        self.dim = dim

    def forward(self, text_proj: torch.Tensor, pitch_sketch: torch.Tensor,
                energy_sketch: torch.Tensor,
                valid: torch.Tensor | None = None) -> tuple[torch.Tensor, torch.Tensor]:
        """(B, M, F), (B, M), (B, M) -> normalized contours (B, M) x 2."""
        if text_proj.shape[1] != pitch_sketch.shape[1] or \
                text_proj.shape[1] != energy_sketch.shape[1]:
            raise AlignmentError("sketch length does not match text length")
        if valid is None:
            valid = torch.ones(text_proj.shape[:2], dtype=torch.bool,
                               device=text_proj.device)
        keep = valid.unsqueeze(-1).to(text_proj.dtype)
        x = (text_proj
             + self.embed_pitch(pitch_sketch.unsqueeze(-1))
             + self.embed_energy(energy_sketch.unsqueeze(-1)))
        x = x + sinusoidal_positions(x.shape[1], self.dim, device=x.device,
                                     dtype=x.dtype)
        x = x * keep
        for block in self.blocks:
            x = block(x, valid) * keep
        out = self.head(self.norm(x))
        keep2 = valid.to(text_proj.dtype)
        return out[..., 0] * keep2, out[..., 1] * keep2
