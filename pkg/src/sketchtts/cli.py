"""Command-line entry points for every pipeline stage.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (DiffusionConfig, FrameConfig, ModelConfig, TrainConfig,
                     micro_model_config, micro_train_config,
                     paper_model_config, paper_train_config)
from .errors import SketchTTSError, ValidationError


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cache", required=True, help="ingested feature cache directory")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--preset", choices=["micro", "paper"], default="micro")
    p.add_argument("--config", help="versioned JSON config file; flags override it")
    p.add_argument("--steps", type=int, help="override training steps")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--kl-weight", type=float)
    p.add_argument("--checkpoint-every", type=int)
    p.add_argument("--resume", help="resume from an existing checkpoint")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchtts",
        description="Sketch-conditioned expressive speech synthesis")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-corpus", help="generate the synthetic micro corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--clips", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("ingest", help="extract features into a cache")
    p.add_argument("--manifest", required=True)
    p.add_argument("--cache", required=True)

    p = sub.add_parser("train-vae", help="stage 1: train the mel VAE")
    _add_training_flags(p)

    p = sub.add_parser("train-ldm", help="stage 2: train the conditioned LDM")
    _add_training_flags(p)
    p.add_argument("--vae", required=True, help="stage-1 checkpoint")
    p.add_argument("--dropout", type=float, help="sketch dropout probability")

    p = sub.add_parser("extract-sketch", help="audio -> sketch JSON")
    p.add_argument("--audio", required=True)
    p.add_argument("--alignment", required=True)
    p.add_argument("--kind", choices=["pitch", "energy"], default="pitch")
    p.add_argument("--out", required=True)

    p = sub.add_parser("synthesize", help="text (+ sketch) -> wav + report")
    p.add_argument("--model", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--sketch", help="sketch or polyline JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int)
    p.add_argument("--out", default="out.wav")

    p = sub.add_parser("evaluate", help="manifest -> metrics report")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--cache", required=True)
    p.add_argument("--out", default="report.json")
    p.add_argument("--split", default="train")
    p.add_argument("--conditions", default="sketch",
                   help="comma list from {sketch,zero}")
    p.add_argument("--seeds", default="0", help="comma list of sampling seeds")
    p.add_argument("--steps", type=int)
    p.add_argument("--plots", help="directory for overlay plots")

    p = sub.add_parser("serve", help="run the synthesis HTTP service")
    p.add_argument("--model", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-concurrent", type=int, default=1)

    return parser


def _train_cfg(args, stage: str) -> TrainConfig:
    cfg = (micro_train_config(stage) if args.preset == "micro"
           else paper_train_config(stage))
    if args.config:
        cfg.apply_file(args.config)
    if args.steps is not None:
        cfg.steps = args.steps
    if args.batch_size is not None:
        cfg.batch_size = args.batch_size
    if args.lr is not None:
        cfg.learning_rate = args.lr
    if args.seed is not None:
        cfg.seed = args.seed
    if args.kl_weight is not None:
        cfg.kl_weight = args.kl_weight
    if args.checkpoint_every is not None:
        cfg.checkpoint_every = args.checkpoint_every
    if stage == "ldm" and getattr(args, "dropout", None) is not None:
        cfg.sketch_dropout_p = args.dropout
    return cfg


def _model_cfg(args) -> ModelConfig:
    return micro_model_config() if args.preset == "micro" else paper_model_config()


def _load_sketch_file(path: str):
    from .prosody import ProsodySketch
    from .sketch2contour import UserPolyline

    data = json.loads(Path(path).read_text())
    if "points" in data:
        return UserPolyline.from_json(data)
    if "values" in data:
        kind = data.get("kind", "pitch")
        return ProsodySketch(np.asarray(data["values"], dtype=np.float64), kind)
    raise ValidationError(f"{path}: neither a polyline nor a sketch file")


def _cmd_make_corpus(args) -> int:
    from .data import make_micro_corpus

    manifest = make_micro_corpus(args.out, n_clips=args.clips, seed=args.seed)
    print(f"wrote {args.clips} clips; manifest at {manifest}")
    return 0


def _cmd_ingest(args) -> int:
    from .data import ingest_dataset

    report = ingest_dataset(args.manifest, args.cache)
    print(f"ingested {report.processed} new, {report.cached} cached, "
          f"{len(report.skipped)} skipped")
    for entry_id, reason in report.skipped:
        print(f"  skipped {entry_id}: {reason}", file=sys.stderr)
    return 0


def _cmd_train_vae(args) -> int:
    from .training import train_vae

    history = train_vae(args.cache, args.out, _model_cfg(args),
                        _train_cfg(args, "vae"), resume=args.resume)
    print(f"vae training done: first loss {history[0]['loss']:.4f}, "
          f"last loss {history[-1]['loss']:.4f}; checkpoint at {args.out}")
    return 0


def _cmd_train_ldm(args) -> int:
    from .training import train_ldm

    history = train_ldm(args.cache, args.vae, args.out, _model_cfg(args),
                        DiffusionConfig(), _train_cfg(args, "ldm"),
                        resume=args.resume)
    print(f"ldm training done: first loss {history[0]['loss']:.4f}, "
          f"last loss {history[-1]['loss']:.4f}; checkpoint at {args.out}")
    return 0


def _cmd_extract_sketch(args) -> int:
    from .audio import load_wav
    from .data import load_alignment
    from .prosody import (ProsodyContour, extract_energy, extract_f0,
                          interpolate_unvoiced, pool_to_phoneme,
                          save_contour, smooth_to_sketch)

    frame_cfg = FrameConfig()
    wave = load_wav(args.audio, frame_cfg.sample_rate)
    phonemes, durations = load_alignment(args.alignment)
    total = int(durations.sum())
    if args.kind == "pitch":
        frames = extract_f0(wave, frame_cfg)[:total]
        contour = interpolate_unvoiced(
            pool_to_phoneme(frames, durations, voiced_only=True))
    else:
        frames = extract_energy(wave, frame_cfg)[:total]
        contour = pool_to_phoneme(frames, durations)
    sketch = smooth_to_sketch(ProsodyContour(contour, args.kind))
    save_contour(args.out, sketch, phonemes)
    print(f"wrote {args.kind} sketch ({len(phonemes)} phonemes) to {args.out}")
    return 0


def _cmd_synthesize(args) -> int:
    from .audio import save_wav
    from .evaluation import sketch_adherence
    from .pipeline import Synthesizer

    synthesizer = Synthesizer.from_checkpoint(args.model)
    sketch = _load_sketch_file(args.sketch) if args.sketch else None
    result = synthesizer.synthesize(args.text, sketch=sketch, seed=args.seed,
                                    steps=args.steps)
    out = Path(args.out)
    save_wav(out, result.wave, result.sample_rate)
    report = {
        "text": args.text,
        "phonemes": result.sequence.symbols,
        "word_spans": result.sequence.spans_json(),
        "durations": result.durations.tolist(),
        "realized_pitch": result.realized_pitch.tolist(),
        "realized_energy": result.realized_energy.tolist(),
        "predicted_pitch_hz": result.predicted_pitch_hz.tolist(),
        "predicted_energy_db": result.predicted_energy_db.tolist(),
        "seed": result.seed,
        "steps": result.steps,
    }
    if not result.sketches.pitch.is_absent:
        report["pitch_adherence"] = sketch_adherence(
            result.sketches.pitch.values, result.realized_pitch, "pitch")
    if not result.sketches.energy.is_absent:
        report["energy_adherence"] = sketch_adherence(
            result.sketches.energy.values, result.realized_energy, "energy")
    report_path = out.with_suffix(".report.json")
    report_path.write_text(json.dumps(report, indent=1))
    print(f"wrote {out} ({result.wave.size} samples) and {report_path}")
    return 0


def _cmd_evaluate(args) -> int:
    from .evaluation import evaluate_manifest, write_report
    from .pipeline import Synthesizer

    synthesizer = Synthesizer.from_checkpoint(args.model)
    conditions = tuple(c.strip() for c in args.conditions.split(",") if c.strip())
    seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())
    report = evaluate_manifest(synthesizer, args.manifest, args.cache,
                               split=args.split, conditions=conditions,
                               seeds=seeds, steps=args.steps,
                               plot_dir=args.plots)
    write_report(report, args.out)
    for condition, per_seed in report["conditions"].items():
        for seed, metrics in per_seed.items():
            print(f"{condition} seed={seed}: "
                  f"pitch {metrics['pitch_rmse_hz']:.2f} Hz, "
                  f"energy {metrics['energy_rmse_db']:.2f} dB")
    print(f"report written to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .pipeline import Synthesizer
    from .service import create_app

    synthesizer = Synthesizer.from_checkpoint(args.model)
    app = create_app(synthesizer, max_concurrent=args.max_concurrent)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_HANDLERS = {
    "make-corpus": _cmd_make_corpus,
    "ingest": _cmd_ingest,
    "train-vae": _cmd_train_vae,
    "train-ldm": _cmd_train_ldm,
    "extract-sketch": _cmd_extract_sketch,
    "synthesize": _cmd_synthesize,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _HANDLERS[args.command](args)
    except SketchTTSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1


if __name__ == "__main__":
    sys.exit(main())
