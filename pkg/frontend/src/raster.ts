/**
 * Software RGBA canvas: rectangles, line segments, bitmap text.
 */
import { GLYPH_HEIGHT, GLYPH_WIDTH, glyphFor } from "./font.js";
import { encodePng } from "./png.js";

export type Color = readonly [number, number, number, number];

export const WHITE: Color = [255, 255, 255, 255];
export const BLACK: Color = [30, 30, 30, 255];
export const GRAY: Color = [190, 190, 190, 255];
export const BLUE: Color = [40, 90, 200, 255];
export const ORANGE: Color = [220, 120, 30, 255];
export const RED: Color = [200, 50, 60, 255];
export const GREEN: Color = [40, 140, 80, 255];

export class Canvas {
  readonly width: number;
  readonly height: number;
  private readonly pixels: Uint8Array;

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8Array(width * height * 4);
    this.fillRect(0, 0, width, height, background);
  }

  set(x: number, y: number, color: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    this.pixels[i] = color[0];
    this.pixels[i + 1] = color[1];
    this.pixels[i + 2] = color[2];
    this.pixels[i + 3] = color[3];
  }

  fillRect(x: number, y: number, w: number, h: number, color: Color): void {
    const x0 = Math.max(0, Math.floor(x));
    const y0 = Math.max(0, Math.floor(y));
    const x1 = Math.min(this.width, Math.ceil(x + w));
    const y1 = Math.min(this.height, Math.ceil(y + h));
    for (let yy = y0; yy < y1; yy++) {
      for (let xx = x0; xx < x1; xx++) {
        this.set(xx, yy, color);
      }
    }
  }

  /** Bresenham segment with a square pen of the given half-width. */
  line(x0: number, y0: number, x1: number, y1: number, color: Color, pen = 0): void {
    let ax = Math.round(x0);
    let ay = Math.round(y0);
    const bx = Math.round(x1);
    const by = Math.round(y1);
    const dx = Math.abs(bx - ax);
    const dy = -Math.abs(by - ay);
    const sx = ax < bx ? 1 : -1;
    const sy = ay < by ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      if (pen <= 0) {
        this.set(ax, ay, color);
      } else {
        this.fillRect(ax - pen, ay - pen, 2 * pen + 1, 2 * pen + 1, color);
      }
      if (ax === bx && ay === by) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        ax += sx;
      }
      if (e2 <= dx) {
        err += dx;
        ay += sy;
      }
    }
  }

  polyline(xs: number[], ys: number[], color: Color, pen = 1): void {
    for (let i = 1; i < xs.length; i++) {
      this.line(xs[i - 1], ys[i - 1], xs[i], ys[i], color, pen);
    }
  }

  text(x: number, y: number, content: string, color: Color, scale = 1): void {
    let cx = Math.round(x);
    const cy = Math.round(y);
    for (const ch of content) {
      const glyph = glyphFor(ch);
      for (let col = 0; col < GLYPH_WIDTH; col++) {
        for (let row = 0; row < GLYPH_HEIGHT; row++) {
          if (glyph[col] & (1 << row)) {
            this.fillRect(cx + col * scale, cy + row * scale, scale, scale, color);
          }
        }
      }
      cx += (GLYPH_WIDTH + 1) * scale;
    }
  }

  textWidth(content: string, scale = 1): number {
    return content.length * (GLYPH_WIDTH + 1) * scale;
  }

  toPng(): Buffer {
    return encodePng(this.width, this.height, this.pixels);
  }
}
