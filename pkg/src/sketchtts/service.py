"""HTTP synthesis service consumed by the sketch studio UI.

Endpoints live under /v1. The synthesize response defaults to binary WAV
with JSON sidecar headers; ?format=json switches to a base64 body for
simple clients. Concurrency is capped by a semaphore so simultaneous
diffusion runs cannot exhaust the host.
"""

from __future__ import annotations

import base64
import io
import json
import threading

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel
from scipy.io import wavfile

from . import __version__
from .errors import PhonemizeError, SketchTTSError, ValidationError
from .pipeline import Synthesizer
from .sketch2contour import UserPolyline
from .text_frontend import phonemize


class PhonemizeRequest(BaseModel):
    text: str


class SketchPayload(BaseModel):
    kind: str = "pitch"
    points: list[list[float]]


class SynthesizeRequest(BaseModel):
    text: str
    sketch: SketchPayload | None = None
    seed: int = 0
    steps: int | None = None


def _wav_bytes(wave: np.ndarray, sample_rate: int) -> bytes:
    buf = io.BytesIO()
    pcm = np.round(np.clip(wave, -1.0, 1.0) * 32767.0).astype(np.int16)
    wavfile.write(buf, sample_rate, pcm)
    return buf.getvalue()


def _parse_polyline(payload: SketchPayload) -> UserPolyline:
    try:
        return UserPolyline.from_json(payload.model_dump())
    except ValidationError as exc:
        raise HTTPException(status_code=400, detail={
            "field": "sketch.points", "message": str(exc)}) from exc


def create_app(synthesizer: Synthesizer | None, max_concurrent: int = 1) -> FastAPI:
    """Build the service; ``synthesizer=None`` simulates a model that failed
    to load (every synthesis endpoint answers 503)."""
    app = FastAPI(title="sketchtts", version=__version__)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"], expose_headers=["*"])
    gate = threading.Semaphore(max_concurrent)

    def _require_model() -> Synthesizer:
        if synthesizer is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return synthesizer

    @app.get("/v1/health")
    def health():
        if synthesizer is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return {"status": "ok", "version": __version__,
                "sample_rate": synthesizer.frame_cfg.sample_rate,
                "vocoder": synthesizer.vocoder.kind}

    @app.post("/v1/phonemize")
    def phonemize_endpoint(request: PhonemizeRequest):
        try:
            sequence = phonemize(request.text)
        except PhonemizeError as exc:
            raise HTTPException(status_code=400, detail={
                "field": "text", "message": str(exc)}) from exc
        return {"phonemes": sequence.symbols, "M": len(sequence),
                "words": sequence.words,
                "word_spans": sequence.spans_json()}

    @app.post("/v1/synthesize")
    def synthesize_endpoint(request: SynthesizeRequest,
                            format: str = Query("wav", pattern="^(wav|json)$")):
        polyline = _parse_polyline(request.sketch) if request.sketch else None
        model = _require_model()
        try:
            with gate:
                result = model.synthesize(request.text, sketch=polyline,
                                          seed=request.seed, steps=request.steps)
        except PhonemizeError as exc:
            raise HTTPException(status_code=400, detail={
                "field": "text", "message": str(exc)}) from exc
        except SketchTTSError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc

        audio = _wav_bytes(result.wave, result.sample_rate)
        sidecar = {
            "M": result.M,
            "phonemes": result.sequence.symbols,
            "phoneme_spans": result.sequence.spans_json(),
            "realized_pitch": [round(float(v), 4) for v in result.realized_pitch],
            "realized_energy": [round(float(v), 4) for v in result.realized_energy],
            "durations": result.durations.tolist(),
            "seed": result.seed,
            "steps": result.steps,
            "sample_rate": result.sample_rate,
        }
        if format == "json":
            return {"audio_base64": base64.b64encode(audio).decode("ascii"),
                    **sidecar}
        headers = {
            "X-Phoneme-Spans": json.dumps(sidecar["phoneme_spans"]),
            "X-Realized-Pitch": json.dumps(sidecar["realized_pitch"]),
            "X-Realized-Energy": json.dumps(sidecar["realized_energy"]),
            "X-Durations": json.dumps(sidecar["durations"]),
            "X-Seed": str(result.seed),
            "X-Steps": str(result.steps),
        }
        return Response(content=audio, media_type="audio/wav", headers=headers)

    return app
