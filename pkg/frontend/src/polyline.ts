// Freehand stroke capture and polyline validation.
//
// The capture rule keeps x strictly increasing: samples that back-track in x
// are dropped as they arrive, so whatever the hand does, the stored polyline
// always satisfies the wire contract.

import type { PolylinePayload, SketchKind } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

const MIN_DX = 1e-4;

export class StrokeCapture {
  private points: Point[] = [];

  /** Feed one pointer sample in normalized [0,1] coordinates. */
  add(x: number, y: number): void {
    const cx = clamp01(x);
    const cy = clamp01(y);
    const last = this.points[this.points.length - 1];
    if (last !== undefined && cx <= last.x + MIN_DX) {
      return; // back-tracking or stalling in x: drop the sample
    }
    this.points.push({ x: cx, y: cy });
  }

  get length(): number {
    return this.points.length;
  }

  isEmpty(): boolean {
    return this.points.length < 2;
  }

  clear(): void {
    this.points = [];
  }

  /** Remove the most recent samples (coarse undo for one stroke segment). */
  undo(samples = 8): void {
    this.points.splice(Math.max(0, this.points.length - samples));
  }

  snapshot(): Point[] {
    return this.points.map((p) => ({ ...p }));
  }

  /** Thin dense pointer samples down to a bounded vertex budget. */
  toPolyline(kind: SketchKind, maxVertices = 64): PolylinePayload | null {
    if (this.isEmpty()) {
      return null;
    }
    const pts = this.points;
    const stride = Math.max(1, Math.ceil(pts.length / maxVertices));
    const kept: Point[] = [];
    for (let i = 0; i < pts.length; i += stride) {
      kept.push(pts[i]);
    }
    const last = pts[pts.length - 1];
    if (kept[kept.length - 1] !== last) {
      kept.push(last);
    }
    const payload: PolylinePayload = {
      kind,
      points: kept.map((p) => [p.x, p.y] as [number, number]),
    };
    return validatePolyline(payload) === null ? payload : null;
  }
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

/** Mirror of the server-side validation; returns an error message or null. */
export function validatePolyline(payload: PolylinePayload): string | null {
  if (payload.kind !== "pitch" && payload.kind !== "energy") {
    return `unknown sketch kind: ${payload.kind}`;
  }
  if (!Array.isArray(payload.points) || payload.points.length < 2) {
    return "polyline needs at least 2 points";
  }
  let prevX = -Infinity;
  for (const point of payload.points) {
    if (!Array.isArray(point) || point.length !== 2) {
      return "each point must be an [x, y] pair";
    }
    const [x, y] = point;
    if (!Number.isFinite(x) || !Number.isFinite(y)) {
      return "coordinates must be finite numbers";
    }
    if (x < 0 || x > 1 || y < 0 || y > 1) {
      return "coordinates must lie in [0, 1]";
    }
    if (x <= prevX) {
      return "x coordinates must be strictly increasing";
    }
    prevX = x;
  }
  return null;
}

/** Piecewise-linear evaluation at phoneme midpoints, matching the server. */
export function sampleAtPhonemes(payload: PolylinePayload, m: number): number[] {
  const pts = payload.points;
  const out: number[] = [];
  for (let i = 0; i < m; i++) {
    const x = (i + 0.5) / m;
    out.push(evaluate(pts, x));
  }
  return out;
}

function evaluate(pts: [number, number][], x: number): number {
  if (x <= pts[0][0]) return pts[0][1];
  const last = pts[pts.length - 1];
  if (x >= last[0]) return last[1];
  for (let i = 0; i + 1 < pts.length; i++) {
    const [x0, y0] = pts[i];
    const [x1, y1] = pts[i + 1];
    if (x >= x0 && x <= x1) {
      return y0 + ((y1 - y0) * (x - x0)) / (x1 - x0);
    }
  }
  return last[1];
}
