// Geometry mapping phoneme-rate data onto the drawing surface.
//
// Columns are uniform before the first synthesis; once durations are known
// they size the columns, so the sketch axis lines up with time.

import type { WordSpan } from "./types.js";

export interface Column {
  index: number;
  x0: number; // normalized [0,1]
  x1: number;
}

export function phonemeColumns(m: number, durations: number[] | null): Column[] {
  const widths: number[] = [];
  if (durations !== null && durations.length === m) {
    const total = durations.reduce((s, d) => s + d, 0);
    for (const d of durations) widths.push(d / total);
  } else {
    for (let i = 0; i < m; i++) widths.push(1 / m);
  }
  const columns: Column[] = [];
  let x = 0;
  widths.forEach((w, index) => {
    columns.push({ index, x0: x, x1: x + w });
    x += w;
  });
  return columns;
}

export function columnCenter(column: Column): number {
  return (column.x0 + column.x1) / 2;
}

export interface OverlayPoint {
  x: number; // normalized [0,1]
  y: number; // normalized [0,1], 1 = top of range
  index: number;
}

/** Map a realized contour to one point per phoneme, min-max normalized so it
 * shares the sketch's [0,1] vertical axis. */
export function contourToPoints(
  realized: number[],
  columns: Column[],
): OverlayPoint[] {
  const n = Math.min(realized.length, columns.length);
  if (n === 0) return [];
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < n; i++) {
    lo = Math.min(lo, realized[i]);
    hi = Math.max(hi, realized[i]);
  }
  const range = hi - lo;
  const points: OverlayPoint[] = [];
  for (let i = 0; i < n; i++) {
    const y = range < 1e-9 ? 0.5 : (realized[i] - lo) / range;
    points.push({ x: columnCenter(columns[i]), y, index: i });
  }
  return points;
}

export interface WordLabel {
  word: string;
  x0: number;
  x1: number;
}

export function wordLabels(spans: WordSpan[], columns: Column[]): WordLabel[] {
  const labels: WordLabel[] = [];
  for (const span of spans) {
    if (span.start >= columns.length) continue;
    const endIdx = Math.min(span.end, columns.length) - 1;
    labels.push({
      word: span.word,
      x0: columns[span.start].x0,
      x1: columns[endIdx].x1,
    });
  }
  return labels;
}
