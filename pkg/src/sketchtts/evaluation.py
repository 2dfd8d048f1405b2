"""Objective metrics: contour RMSE, sketch adherence and the emphasis probe.

Sketch adherence is the objective stand-in for listening-test alignment
scores: the realized contour is smoothed and normalized exactly like a
sketch, then correlated with the given sketch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import FeatureCache
from .errors import AlignmentError, ValidationError
from .prosody import (ProsodyContour, ProsodySketch, minmax_normalize,
                      savgol_smooth, smooth_to_sketch)
from .sketch2contour import SketchPair
from .pipeline import Synthesizer


def rmse_contour(synth: np.ndarray, ref: np.ndarray) -> float:
    """Root mean square error in physical units (Hz or dB)."""
    synth = np.asarray(synth, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if synth.shape != ref.shape:
        raise AlignmentError(
            f"contour lengths differ: {synth.shape} vs {ref.shape}")
    return float(np.sqrt(np.mean((synth - ref) ** 2)))


def sketch_adherence(sketch: np.ndarray, realized: np.ndarray,
                     kind: str = "pitch", window: int = 9,
                     polyorder: int = 2) -> float:
    """Pearson correlation between a sketch and the realized trend, in [-1, 1].

    Both sides go through the smooth-and-normalize path that produces
    sketches (the smoothing is linear, so a sketch compared with itself is
    exactly 1 and with its inversion exactly -1). Constant inputs return 0
    by convention.
    """
    sketch = np.asarray(sketch, dtype=np.float64)
    realized = np.asarray(realized, dtype=np.float64)
    if sketch.size != realized.size:
        raise AlignmentError(
            f"lengths differ: sketch {sketch.size} vs realized {realized.size}")
    trend = smooth_to_sketch(ProsodyContour(realized, kind), window, polyorder).values
    smoothed_sketch = minmax_normalize(savgol_smooth(sketch, window, polyorder))
    if np.std(smoothed_sketch) < 1e-12 or np.std(trend) < 1e-12:
        return 0.0
    return float(np.corrcoef(smoothed_sketch, trend)[0, 1])


def make_emphasis_sketch(M: int, span: tuple[int, int], base: float = 0.2,
                         peak: float = 1.0) -> ProsodySketch:
    """Single-peak sketch: ``peak`` over the word's phonemes, ``base`` elsewhere."""
    start, end = span
    if not (0 <= start < end <= M):
        raise ValidationError(f"span {span} out of range for M={M}")
    values = np.full(M, base)
    values[start:end] = peak
    return ProsodySketch(values, "pitch")


@dataclass
class EmphasisProbeResult:
    status: str                     # "pass" | "fail" | "no-peak"
    word_index: int
    span: tuple[int, int]
    argmax_index: int
    sketch: np.ndarray
    realized_pitch: np.ndarray
    adherence: float

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def emphasis_probe(synthesizer: Synthesizer, text: str, word_index: int,
                   seed: int = 0, steps: int | None = None,
                   sketch: ProsodySketch | None = None,
                   durations: np.ndarray | None = None) -> EmphasisProbeResult:
    """Does emphasizing one word move the pitch peak onto that word?

    Passes when the argmax of the realized phoneme-level pitch falls inside
    the emphasized word's phoneme span. A sketch without a distinct peak
    yields the "no-peak" status.
    """
    from .text_frontend import phonemize

    sequence = phonemize(text)
    if not 0 <= word_index < len(sequence.word_spans):
        raise ValidationError(
            f"word index {word_index} out of range ({len(sequence.word_spans)} words)")
    span = sequence.word_spans[word_index]
    if sketch is None:
        sketch = make_emphasis_sketch(len(sequence), span)
    if np.ptp(sketch.values) < 1e-9:
        return EmphasisProbeResult(
            status="no-peak", word_index=word_index, span=span, argmax_index=-1,
            sketch=sketch.values, realized_pitch=np.zeros(len(sequence)),
            adherence=0.0)

    result = synthesizer.synthesize(text, sketch=sketch, seed=seed,
                                    steps=steps, durations=durations)
    argmax = int(np.argmax(result.realized_pitch))
    status = "pass" if span[0] <= argmax < span[1] else "fail"
    return EmphasisProbeResult(
        status=status, word_index=word_index, span=span, argmax_index=argmax,
        sketch=sketch.values, realized_pitch=result.realized_pitch,
        adherence=sketch_adherence(sketch.values, result.realized_pitch, "pitch"))


def evaluate_cached_utterance(synthesizer: Synthesizer, record: dict,
                              transcript: str, use_sketches: bool,
                              seed: int = 0,
                              steps: int | None = None) -> dict:
    """Synthesize one cached utterance and compare against its references."""
    durations = record["durations"].astype(np.int64)
    if use_sketches:
        pair = SketchPair(
            ProsodySketch(record["pitch_sketch"].astype(np.float64), "pitch"),
            ProsodySketch(record["energy_sketch"].astype(np.float64), "energy"))
    else:
        pair = None
    result = synthesizer.synthesize(transcript, sketch=pair, seed=seed,
                                    steps=steps, durations=durations)
    ref_pitch = record["pitch_contour"].astype(np.float64)
    ref_energy = record["energy_contour"].astype(np.float64)
    metrics = {
        "pitch_rmse_hz": rmse_contour(result.realized_pitch, ref_pitch),
        "energy_rmse_db": rmse_contour(result.realized_energy, ref_energy),
    }
    if use_sketches:
        metrics["pitch_adherence"] = sketch_adherence(
            record["pitch_sketch"].astype(np.float64), result.realized_pitch, "pitch")
        metrics["energy_adherence"] = sketch_adherence(
            record["energy_sketch"].astype(np.float64), result.realized_energy,
            "energy")
    return metrics


def evaluate_manifest(synthesizer: Synthesizer, manifest_path: str | Path,
                      cache_dir: str | Path, split: str = "train",
                      conditions: tuple[str, ...] = ("sketch",),
                      seeds: tuple[int, ...] = (0,),
                      steps: int | None = None,
                      plot_dir: str | Path | None = None) -> dict:
    """Batch evaluation over an ingested manifest; returns the report dict.

    Conditions: "sketch" uses ground-truth sketches, "zero" uses the all-zero
    sentinels (text-only synthesis).
    """
    cache = FeatureCache(cache_dir)
    entries = cache.entries(split)
    report: dict = {"split": split, "seeds": list(seeds),
                    "conditions": {}, "utterances": []}
    for condition in conditions:
        if condition not in ("sketch", "zero"):
            raise ValidationError(f"unknown evaluation condition: {condition!r}")
        per_seed = {}
        for seed in seeds:
            rows = []
            for entry in entries:
                record = cache.record(entry["key"])
                metrics = evaluate_cached_utterance(
                    synthesizer, record, entry["transcript"],
                    use_sketches=(condition == "sketch"), seed=seed, steps=steps)
                rows.append({"id": entry["id"], "seed": seed,
                             "condition": condition, **metrics})
            report["utterances"].extend(rows)
            per_seed[str(seed)] = {
                "pitch_rmse_hz": float(np.mean([r["pitch_rmse_hz"] for r in rows])),
                "energy_rmse_db": float(np.mean([r["energy_rmse_db"] for r in rows])),
            }
            if condition == "sketch":
                per_seed[str(seed)]["pitch_adherence"] = float(
                    np.mean([r["pitch_adherence"] for r in rows]))
                per_seed[str(seed)]["energy_adherence"] = float(
                    np.mean([r["energy_adherence"] for r in rows]))
        report["conditions"][condition] = per_seed
    if plot_dir is not None:
        _emit_plots(synthesizer, cache, entries, Path(plot_dir), steps)
    return report


def _emit_plots(synthesizer: Synthesizer, cache: FeatureCache, entries: list,
                plot_dir: Path, steps: int | None) -> None:
    """Sketch-versus-realized overlay images, one per utterance."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plot_dir.mkdir(parents=True, exist_ok=True)
    for entry in entries:
        record = cache.record(entry["key"])
        pair = SketchPair(
            ProsodySketch(record["pitch_sketch"].astype(np.float64), "pitch"),
            ProsodySketch(record["energy_sketch"].astype(np.float64), "energy"))
        result = synthesizer.synthesize(entry["transcript"], sketch=pair,
                                        durations=record["durations"],
                                        steps=steps)
        trend = smooth_to_sketch(
            ProsodyContour(result.realized_pitch, "pitch")).values
        fig, ax = plt.subplots(figsize=(8, 3))
        m = np.arange(len(trend))
        ax.plot(m, record["pitch_sketch"], "-", label="drawn sketch")
        ax.plot(m, trend, "o", ms=3, label="realized trend")
        ax.set_xlabel("phoneme index")
        ax.set_ylabel("normalized pitch")
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(plot_dir / f"{entry['id']}.png", dpi=100)
        plt.close(fig)


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=1))
