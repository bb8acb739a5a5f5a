/**
 * The five standard figures of a solver run directory.
 *
 * Rendering is strictly read-only over the run directory: inputs are the
 * CSV files and the manifest, outputs go to a separate directory (default
 * `<runDir>/figures`).  Every time-axis figure carries a vertical marker at
 * the revelation time when the policy reveals.
 */
import { existsSync, mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { MissingInput, column, readTable, textColumn } from "./csv.js";
import { Panel, range } from "./plot.js";
import { BLACK, BLUE, Canvas, GREEN, ORANGE, RED } from "./raster.js";

export { MissingInput } from "./csv.js";

export interface FigureSpec {
  id: number;
  inputs: string[];
  output: string;
  xLabel: string;
  yLabels: string[];
}

export const FIGURES: FigureSpec[] = [
  { id: 1, inputs: ["fig1.csv"], output: "fig1.png", xLabel: "t", yLabels: ["A'", "A"] },
  { id: 2, inputs: ["fig2.csv"], output: "fig2.png", xLabel: "t", yLabels: ["nu", "Q"] },
  { id: 3, inputs: ["fig3.csv"], output: "fig3.png", xLabel: "t", yLabels: ["nu", "Q"] },
  { id: 4, inputs: ["fig4.csv"], output: "fig4.png", xLabel: "inventory", yLabels: ["count"] },
  { id: 5, inputs: ["fig5.csv"], output: "fig5.png", xLabel: "t", yLabels: ["nu^B", "Q^B"] },
];

export interface RenderResult {
  written: string[];
  warnings: string[];
}

interface Manifest {
  policy?: { t_reveal: number | null };
  outputs?: string[];
}

function readManifest(runDir: string): Manifest {
  const path = join(runDir, "manifest.json");
  if (!existsSync(path)) throw new MissingInput(path);
  return JSON.parse(readFileSync(path, "utf-8")) as Manifest;
}

const WIDTH = 860;
const HEIGHT = 600;

function markerLabel(tReveal: number): string {
  return `t_c = ${tReveal.toFixed(3)}`;
}

function twoPanelFigure(runDir: string, file: string, titles: [string, string],
                        yLabels: string[], tReveal: number | null): Canvas {
  const table = readTable(join(runDir, file));
  const ts = column(table, "t");
  const top = column(table, table.header.includes("a_prime") ? "a_prime" : "control");
  const bottom = column(table, table.header.includes("a") && table.header.includes("a_prime")
    ? "a" : "inventory");
  const canvas = new Canvas(WIDTH, HEIGHT);
  const panels = [
    new Panel(canvas, { x: 70, y: 40, w: WIDTH - 110, h: 220 }, range(ts), range(top)),
    new Panel(canvas, { x: 70, y: 330, w: WIDTH - 110, h: 220 }, range(ts), range(bottom)),
  ];
  panels[0].frame(titles[0], "t", yLabels[0]);
  panels[0].series({ xs: ts, ys: top, color: BLUE });
  panels[1].frame(titles[1], "t", yLabels[1]);
  panels[1].series({ xs: ts, ys: bottom, color: ORANGE });
  if (tReveal !== null) {
    for (const panel of panels) panel.verticalMarker(tReveal, markerLabel(tReveal));
  }
  return canvas;
}

function snapshotFigure(runDir: string, tReveal: number | null,
                        warnings: string[]): Canvas {
  const table = readTable(join(runDir, "fig4.csv"));
  const kinds = textColumn(table, "kind");
  const canvas = new Canvas(WIDTH, HEIGHT);
  const binRows = table.rows.filter((_, i) => kinds[i] === "bin");
  if (binRows.length === 0) {
    warnings.push("fig4.csv holds no snapshot bins; rendered an empty placeholder");
    canvas.text(WIDTH / 2 - 120, HEIGHT / 2, "no snapshot data available", BLACK, 2);
    return canvas;
  }
  const statRows = table.rows.filter((_, i) => kinds[i] === "stats");
  const times = [...new Set(binRows.map((row) => row[0]))];
  const columns = 3;
  const rowsCount = Math.ceil(times.length / columns);
  const cellW = Math.floor((WIDTH - 80) / columns);
  const cellH = Math.floor((HEIGHT - 70) / rowsCount);
  const idx = (name: string) => table.header.indexOf(name);
  times.forEach((time, k) => {
    const rows = binRows.filter((row) => row[0] === time);
    const lefts = rows.map((row) => Number(row[idx("left")]));
    const rights = rows.map((row) => Number(row[idx("right")]));
    const counts = rows.map((row) => Number(row[idx("count")]));
    const stats = statRows.find((row) => row[0] === time);
    const rect = {
      x: 55 + (k % columns) * cellW,
      y: 45 + Math.floor(k / columns) * cellH,
      w: cellW - 40,
      h: cellH - 55,
    };
    const panel = new Panel(canvas, rect,
      [Math.min(...lefts), Math.max(...rights)], [0, Math.max(...counts)]);
    panel.frame(`time = ${Number(time).toFixed(2)}`, "Q", "count");
    panel.bars(lefts, rights, counts, GREEN);
    if (stats) {
      const mean = Number(stats[idx("mean")]);
      const std = Number(stats[idx("std")]);
      canvas.text(rect.x + 4, rect.y + rect.h + 28,
        `mean ${mean.toFixed(2)}, std ${std.toFixed(2)}`, BLACK);
    }
  });
  if (tReveal !== null) {
    canvas.text(20, 14, `population inventory snapshots (reveal at ${markerLabel(tReveal)})`, RED);
  }
  return canvas;
}

/** Render all five figures; returns written paths and any warnings. */
export function renderAll(runDir: string, outDir?: string): RenderResult {
  const manifest = readManifest(runDir);
  const tReveal = manifest.policy?.t_reveal ?? null;
  const target = outDir ?? join(runDir, "figures");
  // fail on any missing input before writing anything
  for (const spec of FIGURES) {
    for (const input of spec.inputs) {
      const path = join(runDir, input);
      if (!existsSync(path)) throw new MissingInput(path);
    }
  }
  mkdirSync(target, { recursive: true });
  const warnings: string[] = [];
  const written: string[] = [];

  const spec = (id: number): FigureSpec => FIGURES[id - 1];
  const canvases: Array<[FigureSpec, Canvas]> = [
    [spec(1), twoPanelFigure(runDir, "fig1.csv",
      ["information value density", "information value curve"],
      spec(1).yLabels, tReveal)],
    [spec(2), twoPanelFigure(runDir, "fig2.csv",
      ["trader control (Q0 = 0)", "trader inventory (Q0 = 0)"],
      spec(2).yLabels, tReveal)],
    [spec(3), twoPanelFigure(runDir, "fig3.csv",
      ["trader control (Q0 = 200)", "trader inventory (Q0 = 200)"],
      spec(3).yLabels, tReveal)],
    [spec(4), snapshotFigure(runDir, tReveal, warnings)],
    [spec(5), twoPanelFigure(runDir, "fig5.csv",
      ["broker control", "broker inventory"],
      spec(5).yLabels, tReveal)],
  ];
  for (const [figureSpec, canvas] of canvases) {
    const path = join(target, figureSpec.output);
    writeFileSync(path, canvas.toPng());
    written.push(path);
  }
  return { written, warnings };
}
