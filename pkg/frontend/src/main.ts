// Studio bootstrap: wires the DOM, the drawing surface, the API client and
// the session state together.

import { StudioClient, ApiError } from "./api.js";
import { createPlayer, type Player } from "./audio.js";
import { SketchSurface } from "./canvas.js";
import { contourToPoints, phonemeColumns, wordLabels } from "./overlay.js";
import { StrokeCapture, sampleAtPhonemes } from "./polyline.js";
import { StudioState, adherenceScore } from "./state.js";
import type { SketchKind } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function startStudio(): void {
  const canvas = el<HTMLCanvasElement>("sketch-canvas");
  const textInput = el<HTMLInputElement>("text-input");
  const loadButton = el<HTMLButtonElement>("load-text");
  const synthButton = el<HTMLButtonElement>("synthesize");
  const clearButton = el<HTMLButtonElement>("clear-sketch");
  const undoButton = el<HTMLButtonElement>("undo-sketch");
  const kindToggle = el<HTMLSelectElement>("kind-toggle");
  const seedInput = el<HTMLInputElement>("seed-input");
  const banner = el<HTMLDivElement>("error-banner");
  const scoreLabel = el<HTMLSpanElement>("adherence");
  const apiBase = el<HTMLInputElement>("api-base");

  const state = new StudioState();
  const surface = new SketchSurface(canvas);
  const capture = new StrokeCapture();
  let client = new StudioClient(apiBase.value);
  let player: Player | null = null;
  let drawing = false;

  apiBase.addEventListener("change", () => {
    client = new StudioClient(apiBase.value);
  });

  function redraw(): void {
    surface.clear();
    const m = state.phonemes?.M ?? 0;
    if (m > 0) {
      const columns = phonemeColumns(m, state.lastDurations);
      surface.drawColumns(columns, wordLabels(state.phonemes!.word_spans, columns));
      state.overlays.forEach((overlay, i) => {
        const realized =
          state.kind === "pitch" ? overlay.realizedPitch : overlay.realizedEnergy;
        surface.drawOverlay(contourToPoints(realized, columns), i);
      });
    }
    const sketch = state.activeSketch;
    if (drawing && !capture.isEmpty()) {
      surface.drawStroke(capture.snapshot());
    } else if (sketch) {
      surface.drawPolyline(sketch);
    }
    banner.textContent = state.errorMessage ?? "";
    banner.style.display = state.errorMessage ? "block" : "none";
    synthButton.disabled = !state.canSynthesize;
  }

  loadButton.addEventListener("click", async () => {
    try {
      const phonemes = await client.phonemize(textInput.value);
      state.setText(textInput.value, phonemes);
    } catch (error) {
      state.failRequest(describe(error));
    }
    redraw();
  });

  kindToggle.addEventListener("change", () => {
    state.kind = kindToggle.value as SketchKind;
    capture.clear();
    redraw();
  });

  clearButton.addEventListener("click", () => {
    capture.clear();
    state.clearSketch(state.kind);
    redraw();
  });

  undoButton.addEventListener("click", () => {
    capture.undo();
    redraw();
  });

  canvas.addEventListener("pointerdown", (event) => {
    drawing = true;
    capture.clear();
    addSample(event);
  });
  canvas.addEventListener("pointermove", (event) => {
    if (drawing) addSample(event);
  });
  canvas.addEventListener("pointerup", () => {
    drawing = false;
    const payload = capture.toPolyline(state.kind);
    if (payload) {
      state.storeSketch(payload);
    }
    // An empty stroke leaves the previous sketch (and the draw prompt) alone.
    redraw();
  });

  function addSample(event: PointerEvent): void {
    const bounds = canvas.getBoundingClientRect();
    const scaleX = canvas.width / bounds.width;
    const scaleY = canvas.height / bounds.height;
    const point = surface.toNormalized(
      (event.clientX - bounds.left) * scaleX,
      (event.clientY - bounds.top) * scaleY,
    );
    if (point.x >= 0 && point.x <= 1 && point.y >= 0 && point.y <= 1) {
      capture.add(point.x, point.y);
      redraw();
    }
  }

  synthButton.addEventListener("click", async () => {
    if (!state.canSynthesize || !state.phonemes) return;
    state.beginRequest();
    state.seed = Number.parseInt(seedInput.value, 10) || 0;
    redraw();
    try {
      const response = await client.synthesize(
        state.text,
        state.activeSketch,
        state.seed,
      );
      const overlay = state.completeRequest(response);
      if (overlay.sketch) {
        const sampled = sampleAtPhonemes(overlay.sketch, response.M);
        const realized =
          state.kind === "pitch"
            ? response.realized_pitch
            : response.realized_energy;
        scoreLabel.textContent = adherenceScore(sampled, realized).toFixed(3);
      }
      player?.stop();
      player = createPlayer(response.audio_base64);
      await player.play();
    } catch (error) {
      state.failRequest(describe(error)); // sketch is preserved for retry
    }
    redraw();
  });

  redraw();
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return error.field ? `${error.field}: ${error.message}` : error.message;
  }
  return error instanceof Error ? error.message : String(error);
}

if (typeof document !== "undefined" && document.getElementById("sketch-canvas")) {
  startStudio();
}
