#!/usr/bin/env node
/**
 * Usage: brokermfg-figures <run-directory> [out-directory]
 *
 * Renders the five standard figures from a solver run directory.  Exits
 * nonzero when an input is missing or a figure degenerated to a placeholder.
 */
import { MissingInput, renderAll } from "./figures.js";

export function main(argv: string[]): number {
  const [runDir, outDir] = argv;
  if (!runDir) {
    console.error("usage: brokermfg-figures <run-directory> [out-directory]");
    return 2;
  }
  try {
    const result = renderAll(runDir, outDir);
    for (const path of result.written) console.log(path);
    for (const warning of result.warnings) console.warn(`warning: ${warning}`);
    return result.warnings.length > 0 ? 1 : 0;
  } catch (error) {
    if (error instanceof MissingInput) {
      console.error(`error: ${error.message}`);
      return 1;
    }
    throw error;
  }
}

process.exitCode = main(process.argv.slice(2));
