/** Figure renderers. Every plotted value comes from an input table; nothing
 * is recomputed here beyond binning and pixel mapping. */
import { readFileSync } from "node:fs";
import { CsvError, numericColumn, parseCsv, stringColumn, Table } from "./csv.js";
import {
  AxisError,
  HEIGHT,
  MARGIN,
  Mapper,
  SERIES_COLORS,
  Scale,
  SvgDoc,
  WIDTH,
  fmt,
  makeMapper,
} from "./svg.js";

export type FigureKind = "histogram" | "scatter2d" | "levels" | "sweep" | "landscape";

export interface FigureJob {
  kind: FigureKind;
  input: string;
  output: string;
  x?: string;
  y?: string;
  xscale?: Scale;
  yscale?: Scale;
  bins?: number;
  title?: string;
}

export class JobError extends Error {}

export function loadTable(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new JobError(`cannot read input table ${path}: ${(err as Error).message}`);
  }
  const table = parseCsv(text);
  if (table.rows.length === 0) throw new JobError(`input table ${path} has no rows`);
  return table;
}

export function renderFigure(job: FigureJob): string {
  switch (job.kind) {
    case "histogram":
      return histogram(job);
    case "scatter2d":
      return scatter2d(job);
    case "levels":
      return levels(job);
    case "sweep":
      return sweep(job);
    case "landscape":
      return landscape(job);
    default:
      throw new JobError(`unknown figure kind ${(job as FigureJob).kind}`);
  }
}

function plotArea() {
  const { left, right, top, bottom } = MARGIN;
  return { x0: left, x1: WIDTH - right, y0: HEIGHT - bottom, y1: top };
}

/** Counts per bin of one column; log-spaced bins on a log x scale (the
 * natural view for failure probabilities spanning decades). */
function histogram(job: FigureJob): string {
  const table = loadTable(job.input);
  const column = job.x ?? "ground_failure";
  const xscale: Scale = job.xscale ?? "log";
  let values = numericColumn(table, column);
  if (xscale === "log") {
    // zero entries cannot sit on a log axis; fold them into the lowest bin
    const positive = values.filter((v) => v > 0);
    if (positive.length === 0) throw new AxisError(`log histogram of ${column}: no positive data`);
    const floor = Math.min(...positive);
    values = values.map((v) => (v > 0 ? v : floor));
  }
  const nbins = job.bins ?? 20;
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea();

  const t = (v: number) => (xscale === "log" ? Math.log10(v) : v);
  const lo = Math.min(...values.map(t));
  const hi = Math.max(...values.map(t));
  const span = hi - lo || 1;
  const counts = new Array(nbins).fill(0);
  for (const v of values) {
    let k = Math.floor(((t(v) - lo) / span) * nbins);
    if (k === nbins) k = nbins - 1;
    counts[k]++;
  }
  const edges = Array.from({ length: nbins + 1 }, (_, k) =>
    xscale === "log" ? Math.pow(10, lo + (span * k) / nbins) : lo + (span * k) / nbins,
  );
  const xm = makeMapper(edges, xscale, x0, x1, "x");
  const ym = makeMapper([0, Math.max(...counts)], "linear", y0, y1, "y");
  for (let k = 0; k < nbins; k++) {
    if (counts[k] === 0) continue;
    const px = xm(edges[k]);
    const pw = xm(edges[k + 1]) - px;
    const py = ym(counts[k]);
    doc.rect(px, py, Math.max(pw - 1, 0.5), ym(0) - py, SERIES_COLORS[0]);
  }
  doc.axes(xm, ym, column, "instances");
  doc.title(job.title ?? `histogram of ${column} (${values.length} rows)`);
  return doc.render();
}

function scatter2d(job: FigureJob): string {
  const table = loadTable(job.input);
  const xcol = job.x ?? "ground_failure";
  const ycol = job.y ?? "ground_residual";
  const xs = numericColumn(table, xcol);
  const ys = numericColumn(table, ycol);
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea();
  const xm = makeMapper(positiveIfLog(xs, job.xscale ?? "linear", xcol), job.xscale ?? "linear", x0, x1, "x");
  const ym = makeMapper(positiveIfLog(ys, job.yscale ?? "linear", ycol), job.yscale ?? "linear", y0, y1, "y");
  for (let i = 0; i < xs.length; i++) {
    doc.circle(xm(xs[i]), ym(ys[i]), 3, SERIES_COLORS[0] + "99");
  }
  doc.axes(xm, ym, xcol, ycol);
  doc.title(job.title ?? `${ycol} vs ${xcol}`);
  return doc.render();
}

function positiveIfLog(values: number[], scale: Scale, label: string): number[] {
  if (scale === "log" && Math.min(...values) <= 0) {
    throw new AxisError(`log ${label} axis requires positive data`);
  }
  return values;
}

/** Excitation energies against pump amplitude with the minimum-gap marker. */
function levels(job: FigureJob): string {
  const table = loadTable(job.input);
  const xcol = job.x ?? "p";
  const xs = numericColumn(table, xcol);
  const gapCols = table.columns.filter((c) => c.startsWith("gap_"));
  if (gapCols.length === 0) throw new CsvError("levels figure needs gap_* columns");
  const series = gapCols.map((c) => numericColumn(table, c));
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea();
  const xm = makeMapper(xs, job.xscale ?? "linear", x0, x1, "x");
  const ym = makeMapper(series.flat().concat([0]), job.yscale ?? "linear", y0, y1, "y");
  const dashes = ["", "6 4", "2 3", "8 3 2 3"];
  series.forEach((g, k) => {
    doc.polyline(xs.map((x, i) => [xm(x), ym(g[i])] as [number, number]),
      SERIES_COLORS[k % SERIES_COLORS.length], 1.6, dashes[k % dashes.length]);
  });
  // minimum of the first gap marks the closing point
  let kmin = 0;
  series[0].forEach((g, i) => {
    if (g < series[0][kmin]) kmin = i;
  });
  const mx = xm(xs[kmin]);
  doc.line(mx, ym.extent ? y0 : y0, mx, y1, "#777", 1, "3 3");
  doc.text(mx, y1 - 6, `min gap ${fmt(series[0][kmin])} at ${xcol}=${fmt(xs[kmin])}`, { size: 11 });
  gapCols.forEach((c, k) => {
    doc.line(x1 - 150, y1 + 14 + 16 * k, x1 - 122, y1 + 14 + 16 * k,
      SERIES_COLORS[k % SERIES_COLORS.length], 1.6, dashes[k % dashes.length]);
    doc.text(x1 - 116, y1 + 18 + 16 * k, c, { anchor: "start", size: 11 });
  });
  doc.axes(xm, ym, xcol, "excitation energy");
  doc.title(job.title ?? "energy levels above the ground state");
  return doc.render();
}

/** Success probability against decay rate, one series per protocol, with
 * Monte Carlo error bars. */
function sweep(job: FigureJob): string {
  const table = loadTable(job.input);
  const kappas = numericColumn(table, "kappa");
  const success = numericColumn(table, "success_probability");
  const se = numericColumn(table, "std_error");
  const protocol = stringColumn(table, "protocol");
  const names = [...new Set(protocol)].sort();
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea();
  const xm = makeMapper(kappas, job.xscale ?? "linear", x0, x1, "x");
  const ym = makeMapper(success.concat([1.0]), job.yscale ?? "linear", y0, y1, "y");
  names.forEach((name, k) => {
    const idx = protocol.flatMap((p, i) => (p === name ? [i] : []));
    idx.sort((a, b) => kappas[a] - kappas[b]);
    const color = SERIES_COLORS[k % SERIES_COLORS.length];
    doc.polyline(idx.map((i) => [xm(kappas[i]), ym(success[i])] as [number, number]), color);
    for (const i of idx) {
      const px = xm(kappas[i]);
      doc.circle(px, ym(success[i]), 3.5, color);
      if (se[i] > 0) {
        doc.line(px, ym(success[i] - se[i]), px, ym(success[i] + se[i]), color, 1.2);
      }
    }
    doc.line(x0 + 12, y1 + 14 + 16 * k, x0 + 40, y1 + 14 + 16 * k, color, 2);
    doc.text(x0 + 46, y1 + 18 + 16 * k, name, { anchor: "start", size: 11 });
  });
  doc.axes(xm, ym, "decay rate", "success probability");
  doc.title(job.title ?? "success probability vs decay rate");
  return doc.render();
}

/** Energy against Hamming distance from the optimum. */
function landscape(job: FigureJob): string {
  const table = loadTable(job.input);
  const dist = numericColumn(table, "distance");
  const energy = numericColumn(table, "energy");
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea();
  const xm = makeMapper(dist.concat([0]), "linear", x0, x1, "x");
  const ym = makeMapper(energy, job.yscale ?? "linear", y0, y1, "y");
  let imin = 0;
  energy.forEach((e, i) => {
    if (e < energy[imin]) imin = i;
  });
  for (let i = 0; i < dist.length; i++) {
    const color = i === imin ? SERIES_COLORS[1] : SERIES_COLORS[0];
    doc.circle(xm(dist[i]), ym(energy[i]), 4, color);
  }
  doc.axes(xm, ym, "Hamming distance from optimum", "Ising energy");
  doc.title(job.title ?? "energy landscape");
  return doc.render();
}
