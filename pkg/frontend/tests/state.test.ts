import { describe, expect, it } from "vitest";
import { StudioState, adherenceScore } from "../src/state.js";
import type {
  PhonemizeResponse,
  PolylinePayload,
  SynthesizeResponse,
} from "../src/types.js";

const PHONEMES: PhonemizeResponse = {
  phonemes: ["HH", "AH0", "L", "OW1"],
  M: 4,
  words: ["hello"],
  word_spans: [{ word: "hello", start: 0, end: 4 }],
};

const SKETCH: PolylinePayload = {
  kind: "pitch",
  points: [
    [0, 0.2],
    [1, 0.8],
  ],
};

function response(seed: number): SynthesizeResponse {
  return {
    audio_base64: "UklGRg==",
    M: 4,
    phonemes: PHONEMES.phonemes,
    phoneme_spans: PHONEMES.word_spans,
    realized_pitch: [180, 200, 220, 240],
    realized_energy: [-30, -28, -26, -24],
    durations: [3, 8, 4, 10],
    seed,
    steps: 50,
    sample_rate: 22050,
  };
}

describe("StudioState", () => {
  it("keeps the sketch when a request fails", () => {
    const state = new StudioState();
    state.setText("hello", PHONEMES);
    state.storeSketch(SKETCH);
    state.beginRequest();
    state.failRequest("503 model not loaded");
    expect(state.status).toBe("error");
    expect(state.errorMessage).toContain("503");
    expect(state.activeSketch).toEqual(SKETCH);
  });

  it("retains overlays from successive syntheses for comparison", () => {
    const state = new StudioState();
    state.setText("hello", PHONEMES);
    state.storeSketch(SKETCH);
    state.beginRequest();
    state.completeRequest(response(0));
    state.beginRequest();
    state.completeRequest(response(1));
    expect(state.overlays.length).toBe(2);
    expect(state.overlays.map((o) => o.seed)).toEqual([0, 1]);
  });

  it("adopts durations from the last synthesis for column sizing", () => {
    const state = new StudioState();
    state.setText("hello", PHONEMES);
    expect(state.lastDurations).toBeNull();
    state.beginRequest();
    state.completeRequest(response(0));
    expect(state.lastDurations).toEqual([3, 8, 4, 10]);
  });

  it("resets sketches and overlays when the text changes", () => {
    const state = new StudioState();
    state.setText("hello", PHONEMES);
    state.storeSketch(SKETCH);
    state.beginRequest();
    state.completeRequest(response(0));
    state.setText("goodbye", { ...PHONEMES, words: ["goodbye"] });
    expect(state.activeSketch).toBeNull();
    expect(state.overlays).toEqual([]);
  });

  it("blocks synthesis while a request is pending", () => {
    const state = new StudioState();
    state.setText("hello", PHONEMES);
    expect(state.canSynthesize).toBe(true);
    state.beginRequest();
    expect(state.canSynthesize).toBe(false);
  });
});

describe("adherenceScore", () => {
  it("is 1 for a perfectly tracking contour", () => {
    expect(adherenceScore([0.1, 0.4, 0.9], [100, 160, 260])).toBeCloseTo(1, 5);
  });

  it("is -1 for an inverted contour", () => {
    expect(adherenceScore([0.1, 0.4, 0.9], [280, 220, 120])).toBeCloseTo(-1, 5);
  });

  it("is 0 for constant input", () => {
    expect(adherenceScore([0.5, 0.5, 0.5], [100, 200, 300])).toBe(0);
  });
});
