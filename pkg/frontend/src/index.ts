export { parseCsv, numericColumn, stringColumn, CsvError } from "./csv.js";
export { renderFigure, loadTable, JobError } from "./figures.js";
export type { FigureJob, FigureKind } from "./figures.js";
export { loadJob, runJob } from "./main.js";
