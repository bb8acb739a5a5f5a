/**
 * Axes, ticks, series, and histogram panels drawn onto the raster canvas.
 */
import { BLACK, Canvas, Color, GRAY, RED } from "./raster.js";

export interface PanelRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface Series {
  xs: number[];
  ys: number[];
  color: Color;
  label?: string;
}

export function formatTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 10000 || magnitude < 0.001) return value.toExponential(1);
  const text = value.toPrecision(3);
  return text.includes(".") ? text.replace(/\.?0+$/, "") : text;
}

function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count + 1) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12 * span; v += chosen) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

export class Panel {
  readonly canvas: Canvas;
  readonly rect: PanelRect;
  xLo: number;
  xHi: number;
  yLo: number;
  yHi: number;

  constructor(canvas: Canvas, rect: PanelRect, xRange: [number, number],
              yRange: [number, number]) {
    this.canvas = canvas;
    this.rect = rect;
    [this.xLo, this.xHi] = xRange;
    let [yLo, yHi] = yRange;
    if (yHi - yLo < 1e-300) {
      yLo -= 1;
      yHi += 1;
    }
    const pad = 0.06 * (yHi - yLo);
    this.yLo = yLo - pad;
    this.yHi = yHi + pad;
  }

  px(x: number): number {
    return this.rect.x + ((x - this.xLo) / (this.xHi - this.xLo)) * this.rect.w;
  }

  py(y: number): number {
    return this.rect.y + this.rect.h - ((y - this.yLo) / (this.yHi - this.yLo)) * this.rect.h;
  }

  frame(title: string, xLabel: string, yLabel: string): void {
    const { x, y, w, h } = this.rect;
    const c = this.canvas;
    c.line(x, y + h, x + w, y + h, BLACK);
    c.line(x, y, x, y + h, BLACK);
    for (const t of niceTicks(this.xLo, this.xHi)) {
      const tx = this.px(t);
      c.line(tx, y + h, tx, y + h + 4, BLACK);
      const label = formatTick(t);
      c.text(tx - c.textWidth(label) / 2, y + h + 7, label, BLACK);
    }
    for (const t of niceTicks(this.yLo, this.yHi)) {
      const ty = this.py(t);
      c.line(x - 4, ty, x, ty, BLACK);
      const label = formatTick(t);
      c.text(x - 6 - c.textWidth(label), ty - 3, label, BLACK);
      if (t === 0) c.line(x, ty, x + w, ty, GRAY);
    }
    c.text(x + w / 2 - c.textWidth(title) / 2, y - 14, title, BLACK);
    c.text(x + w - c.textWidth(xLabel), y + h + 18, xLabel, BLACK);
    c.text(x, y - 14, yLabel, BLACK);
  }

  series(s: Series, pen = 1): void {
    const xs = s.xs.map((v) => this.px(v));
    const ys = s.ys.map((v) => this.py(v));
    this.canvas.polyline(xs, ys, s.color, pen);
  }

  verticalMarker(x: number, label: string): void {
    if (x < this.xLo || x > this.xHi) return;
    const tx = this.px(x);
    const { y, h } = this.rect;
    for (let yy = y; yy < y + h; yy += 6) {
      this.canvas.line(tx, yy, tx, Math.min(yy + 3, y + h), RED);
    }
    this.canvas.text(tx + 3, y + 2, label, RED);
  }

  bars(lefts: number[], rights: number[], counts: number[], color: Color): void {
    const base = this.py(Math.max(0, this.yLo));
    for (let i = 0; i < counts.length; i++) {
      const x0 = this.px(lefts[i]);
      const x1 = this.px(rights[i]);
      const top = this.py(counts[i]);
      this.canvas.fillRect(x0, top, Math.max(1, x1 - x0 - 1), base - top, color);
    }
  }

  legend(entries: Array<{ label: string; color: Color }>): void {
    let ly = this.rect.y + 4;
    const lx = this.rect.x + this.rect.w - 110;
    for (const entry of entries) {
      this.canvas.fillRect(lx, ly + 2, 10, 3, entry.color);
      this.canvas.text(lx + 14, ly, entry.label, BLACK);
      ly += 11;
    }
  }
}

export function range(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo)) return [0, 1];
  return [lo, hi];
}
