// Rendering for the sketch surface: phoneme columns with word labels, the
// drawn sketch line, and realized-contour points from each synthesis.

import type { Column, OverlayPoint, WordLabel } from "./overlay.js";
import type { Point } from "./polyline.js";
import type { PolylinePayload } from "./types.js";

export interface CanvasTheme {
  background: string;
  columnLine: string;
  wordLine: string;
  label: string;
  sketch: string;
  overlayPalette: string[];
}

export const DEFAULT_THEME: CanvasTheme = {
  background: "#10141a",
  columnLine: "#232b36",
  wordLine: "#3b4a5c",
  label: "#9db2c8",
  sketch: "#53b1fd",
  overlayPalette: ["#ffb74d", "#81c784", "#e57373", "#ba68c8", "#4dd0e1"],
};

const MARGIN = { top: 28, right: 12, bottom: 8, left: 12 };

export class SketchSurface {
  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly theme: CanvasTheme = DEFAULT_THEME,
  ) {}

  get plotRect() {
    return {
      x: MARGIN.left,
      y: MARGIN.top,
      width: this.canvas.width - MARGIN.left - MARGIN.right,
      height: this.canvas.height - MARGIN.top - MARGIN.bottom,
    };
  }

  /** Canvas pixel position -> normalized plot coordinates (y up). */
  toNormalized(px: number, py: number): Point {
    const rect = this.plotRect;
    return {
      x: (px - rect.x) / rect.width,
      y: 1 - (py - rect.y) / rect.height,
    };
  }

  private toPixel(x: number, y: number): [number, number] {
    const rect = this.plotRect;
    return [rect.x + x * rect.width, rect.y + (1 - y) * rect.height];
  }

  clear(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.fillStyle = this.theme.background;
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
  }

  drawColumns(columns: Column[], labels: WordLabel[]): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const rect = this.plotRect;
    ctx.strokeStyle = this.theme.columnLine;
    ctx.lineWidth = 1;
    for (const column of columns) {
      const [x] = this.toPixel(column.x0, 0);
      ctx.beginPath();
      ctx.moveTo(x, rect.y);
      ctx.lineTo(x, rect.y + rect.height);
      ctx.stroke();
    }
    ctx.strokeStyle = this.theme.wordLine;
    ctx.fillStyle = this.theme.label;
    ctx.font = "12px sans-serif";
    ctx.textAlign = "center";
    for (const label of labels) {
      const [x0] = this.toPixel(label.x0, 0);
      const [x1] = this.toPixel(label.x1, 0);
      ctx.beginPath();
      ctx.moveTo(x0, rect.y - 6);
      ctx.lineTo(x1, rect.y - 6);
      ctx.stroke();
      ctx.fillText(label.word, (x0 + x1) / 2, rect.y - 10);
    }
  }

  drawStroke(points: Point[]): void {
    this.drawPath(points, this.theme.sketch, 2.5);
  }

  drawPolyline(payload: PolylinePayload): void {
    this.drawPath(
      payload.points.map(([x, y]) => ({ x, y })),
      this.theme.sketch,
      2.5,
    );
  }

  private drawPath(points: Point[], style: string, width: number): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx || points.length === 0) return;
    ctx.strokeStyle = style;
    ctx.lineWidth = width;
    ctx.lineJoin = "round";
    ctx.beginPath();
    points.forEach((p, i) => {
      const [x, y] = this.toPixel(p.x, p.y);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  /** Realized contour as dots, one per phoneme, colored per overlay index. */
  drawOverlay(points: OverlayPoint[], overlayIndex: number): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const palette = this.theme.overlayPalette;
    ctx.fillStyle = palette[overlayIndex % palette.length];
    for (const point of points) {
      const [x, y] = this.toPixel(point.x, point.y);
      ctx.beginPath();
      ctx.arc(x, y, 3.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}
