// Wire types for the /v1 endpoints. These mirror the server contract and
// must stay in sync with it.

export type SketchKind = "pitch" | "energy";

export interface PolylinePayload {
  kind: SketchKind;
  points: [number, number][];
}

export interface WordSpan {
  word: string;
  start: number;
  end: number;
}

export interface PhonemizeResponse {
  phonemes: string[];
  M: number;
  words: string[];
  word_spans: WordSpan[];
}

export interface SynthesizeRequest {
  text: string;
  sketch?: PolylinePayload;
  seed?: number;
  steps?: number;
}

export interface SynthesizeResponse {
  audio_base64: string;
  M: number;
  phonemes: string[];
  phoneme_spans: WordSpan[];
  realized_pitch: number[];
  realized_energy: number[];
  durations: number[];
  seed: number;
  steps: number;
  sample_rate: number;
}

export interface HealthResponse {
  status: string;
  version: string;
  sample_rate: number;
  vocoder: string;
}
