import { describe, expect, it } from "vitest";
import {
  StrokeCapture,
  sampleAtPhonemes,
  validatePolyline,
} from "../src/polyline.js";
import type { PolylinePayload } from "../src/types.js";

describe("StrokeCapture", () => {
  it("keeps a straight stroke as-is", () => {
    const capture = new StrokeCapture();
    capture.add(0.0, 0.5);
    capture.add(1.0, 0.5);
    const payload = capture.toPolyline("pitch");
    expect(payload).not.toBeNull();
    expect(payload!.points.length).toBe(2);
  });

  it("drops back-tracking samples so x stays strictly increasing", () => {
    const capture = new StrokeCapture();
    capture.add(0.1, 0.2);
    capture.add(0.4, 0.6);
    capture.add(0.3, 0.9); // hand moved left: dropped
    capture.add(0.35, 0.9); // still left of the last kept x: dropped
    capture.add(0.7, 0.8);
    const payload = capture.toPolyline("pitch")!;
    const xs = payload.points.map(([x]) => x);
    for (let i = 1; i < xs.length; i++) {
      expect(xs[i]).toBeGreaterThan(xs[i - 1]);
    }
    expect(validatePolyline(payload)).toBeNull();
  });

  it("treats a single-point stroke as empty", () => {
    const capture = new StrokeCapture();
    capture.add(0.5, 0.5);
    expect(capture.isEmpty()).toBe(true);
    expect(capture.toPolyline("pitch")).toBeNull();
  });

  it("clamps samples into [0,1]", () => {
    const capture = new StrokeCapture();
    capture.add(-0.2, 1.4);
    capture.add(0.5, -0.3);
    capture.add(1.4, 0.5);
    const payload = capture.toPolyline("energy")!;
    for (const [x, y] of payload.points) {
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThanOrEqual(1);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(y).toBeLessThanOrEqual(1);
    }
  });

  it("thins dense strokes below the vertex budget", () => {
    const capture = new StrokeCapture();
    for (let i = 0; i <= 1000; i++) {
      capture.add(i / 1000, 0.5 + 0.4 * Math.sin(i / 50));
    }
    const payload = capture.toPolyline("pitch")!;
    expect(payload.points.length).toBeLessThanOrEqual(65);
    expect(validatePolyline(payload)).toBeNull();
  });

  it("supports undo and clear", () => {
    const capture = new StrokeCapture();
    for (let i = 0; i < 20; i++) capture.add(i / 20, 0.5);
    capture.undo(5);
    expect(capture.length).toBe(15);
    capture.clear();
    expect(capture.isEmpty()).toBe(true);
  });
});

describe("validatePolyline", () => {
  const good: PolylinePayload = {
    kind: "pitch",
    points: [
      [0, 0.2],
      [0.5, 0.9],
      [1, 0.1],
    ],
  };

  it("accepts a valid polyline", () => {
    expect(validatePolyline(good)).toBeNull();
  });

  it("rejects fewer than two points", () => {
    expect(
      validatePolyline({ kind: "pitch", points: [[0.5, 0.5]] }),
    ).toMatch(/at least 2/);
  });

  it("rejects non-monotone x", () => {
    expect(
      validatePolyline({
        kind: "pitch",
        points: [
          [0.6, 0.1],
          [0.4, 0.9],
        ],
      }),
    ).toMatch(/strictly increasing/);
  });

  it("rejects out-of-range coordinates", () => {
    expect(
      validatePolyline({
        kind: "pitch",
        points: [
          [0, 1.5],
          [1, 0.5],
        ],
      }),
    ).toMatch(/\[0, 1\]/);
  });
});

describe("sampleAtPhonemes", () => {
  it("matches the server's midpoint sampling on a diagonal", () => {
    const payload: PolylinePayload = {
      kind: "pitch",
      points: [
        [0, 0],
        [1, 1],
      ],
    };
    const values = sampleAtPhonemes(payload, 4);
    expect(values.map((v) => Number(v.toFixed(3)))).toEqual([
      0.125, 0.375, 0.625, 0.875,
    ]);
  });

  it("extends flat beyond the endpoints", () => {
    const payload: PolylinePayload = {
      kind: "pitch",
      points: [
        [0.4, 0.6],
        [0.6, 0.6],
      ],
    };
    expect(sampleAtPhonemes(payload, 5)).toEqual([0.6, 0.6, 0.6, 0.6, 0.6]);
  });
});
