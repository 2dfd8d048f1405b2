// Studio session state. One invariant matters above all: a failed request
// never destroys the user's sketch, and completed overlays are kept so
// different seeds can be compared side by side.

import type {
  PhonemizeResponse,
  PolylinePayload,
  SketchKind,
  SynthesizeResponse,
} from "./types.js";

export interface Overlay {
  seed: number;
  realizedPitch: number[];
  realizedEnergy: number[];
  durations: number[];
  sketch: PolylinePayload | null;
}

export type Status = "idle" | "pending" | "error";

export class StudioState {
  text = "";
  phonemes: PhonemizeResponse | null = null;
  kind: SketchKind = "pitch";
  sketches: Partial<Record<SketchKind, PolylinePayload>> = {};
  overlays: Overlay[] = [];
  status: Status = "idle";
  errorMessage: string | null = null;
  seed = 0;
  /** Durations from the latest synthesis; column widths use these when set. */
  lastDurations: number[] | null = null;

  get activeSketch(): PolylinePayload | null {
    return this.sketches[this.kind] ?? null;
  }

  setText(text: string, phonemes: PhonemizeResponse): void {
    const changed = text !== this.text;
    this.text = text;
    this.phonemes = phonemes;
    if (changed) {
      this.sketches = {};
      this.overlays = [];
      this.lastDurations = null;
      this.errorMessage = null;
    }
  }

  storeSketch(payload: PolylinePayload): void {
    this.sketches[payload.kind] = payload;
  }

  clearSketch(kind: SketchKind): void {
    delete this.sketches[kind];
  }

  beginRequest(): void {
    this.status = "pending";
    this.errorMessage = null;
  }

  /** Request failed: surface the error, keep every sketch untouched. */
  failRequest(message: string): void {
    this.status = "error";
    this.errorMessage = message;
  }

  completeRequest(response: SynthesizeResponse): Overlay {
    this.status = "idle";
    this.errorMessage = null;
    this.lastDurations = response.durations;
    const overlay: Overlay = {
      seed: response.seed,
      realizedPitch: response.realized_pitch,
      realizedEnergy: response.realized_energy,
      durations: response.durations,
      sketch: this.activeSketch,
    };
    this.overlays.push(overlay);
    return overlay;
  }

  get canSynthesize(): boolean {
    return this.status !== "pending" && this.phonemes !== null;
  }
}

/** Pearson correlation between the drawn sketch (sampled at phoneme
 * midpoints) and the realized contour; the number shown next to each
 * overlay. */
export function adherenceScore(
  sketchAtPhonemes: number[],
  realized: number[],
): number {
  const n = Math.min(sketchAtPhonemes.length, realized.length);
  if (n < 2) return 0;
  const a = sketchAtPhonemes.slice(0, n);
  const b = realized.slice(0, n);
  const meanA = a.reduce((s, v) => s + v, 0) / n;
  const meanB = b.reduce((s, v) => s + v, 0) / n;
  let cov = 0;
  let varA = 0;
  let varB = 0;
  for (let i = 0; i < n; i++) {
    const da = a[i] - meanA;
    const db = b[i] - meanB;
    cov += da * db;
    varA += da * da;
    varB += db * db;
  }
  if (varA < 1e-12 || varB < 1e-12) return 0;
  return cov / Math.sqrt(varA * varB);
}
