#!/usr/bin/env node
/** CLI: render a figure-job description (JSON) into an SVG file.
 *
 * Usage: kponet-figures render job.json [more-jobs.json ...]
 *
 * Job document:
 *   { "kind": "histogram" | "scatter2d" | "levels" | "sweep" | "landscape",
 *     "input": "table.csv", "output": "figure.svg",
 *     "x"?, "y"?, "xscale"?, "yscale"?, "bins"?, "title"? }
 */
import { readFileSync, writeFileSync } from "node:fs";
import { CsvError } from "./csv.js";
import { AxisError } from "./svg.js";
import { FigureJob, JobError, renderFigure } from "./figures.js";

const KINDS = ["histogram", "scatter2d", "levels", "sweep", "landscape"];

export function loadJob(path: string): FigureJob {
  let doc: Record<string, unknown>;
  try {
    doc = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new JobError(`cannot read job ${path}: ${(err as Error).message}`);
  }
  if (typeof doc.kind !== "string" || !KINDS.includes(doc.kind)) {
    throw new JobError(`job ${path}: kind must be one of ${KINDS.join(", ")}`);
  }
  if (typeof doc.input !== "string" || typeof doc.output !== "string") {
    throw new JobError(`job ${path}: input and output paths are required`);
  }
  for (const scale of ["xscale", "yscale"]) {
    if (doc[scale] !== undefined && doc[scale] !== "linear" && doc[scale] !== "log") {
      throw new JobError(`job ${path}: ${scale} must be linear or log`);
    }
  }
  return doc as unknown as FigureJob;
}

export function runJob(path: string): string {
  const job = loadJob(path);
  const svg = renderFigure(job);
  writeFileSync(job.output, svg);
  return job.output;
}

function main(argv: string[]): number {
  if (argv.length < 2 || argv[0] !== "render") {
    console.error("usage: kponet-figures render job.json [...]");
    return 2;
  }
  for (const path of argv.slice(1)) {
    try {
      const out = runJob(path);
      console.log(`wrote ${out}`);
    } catch (err) {
      if (err instanceof JobError || err instanceof CsvError || err instanceof AxisError) {
        console.error(`error: ${err.message}`);
        return 1;
      }
      throw err;
    }
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("main.js")) {
  process.exit(main(process.argv.slice(2)));
}
