/**
 * Reader for the solver's CSV outputs: one leading "#" comment naming the
 * columns, then a header row, then plain comma-separated values with no
 * quoting (the writer never emits commas inside fields).
 */
import { readFileSync } from "node:fs";

export interface Table {
  comment: string;
  header: string[];
  rows: string[][];
}

export class MissingInput extends Error {
  readonly path: string;

  constructor(path: string) {
    super(`missing input CSV: ${path}`);
    this.name = "MissingInput";
    this.path = path;
  }
}

export function readTable(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch {
    throw new MissingInput(path);
  }
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  const comment = lines[0]?.startsWith("#") ? lines[0].slice(1).trim() : "";
  const body = lines.filter((line) => !line.startsWith("#"));
  const header = body[0]?.split(",") ?? [];
  const rows = body.slice(1).map((line) => line.split(","));
  return { comment, header, rows };
}

export function column(table: Table, name: string): number[] {
  const index = table.header.indexOf(name);
  if (index < 0) {
    throw new Error(`column ${name} not found in [${table.header.join(", ")}]`);
  }
  return table.rows.map((row) => Number(row[index]));
}

export function textColumn(table: Table, name: string): string[] {
  const index = table.header.indexOf(name);
  if (index < 0) {
    throw new Error(`column ${name} not found in [${table.header.join(", ")}]`);
  }
  return table.rows.map((row) => row[index]);
}
