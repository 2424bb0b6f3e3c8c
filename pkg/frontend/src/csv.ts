/** Minimal CSV reading for the simulator's result tables. */

export interface Table {
  columns: string[];
  rows: string[][];
}

export class CsvError extends Error {}

/** Parse CSV text with a header row. Handles double-quoted fields. */
export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) throw new CsvError("empty CSV document");
  const records = lines.map(splitLine);
  const columns = records[0];
  const rows = records.slice(1);
  for (const [i, row] of rows.entries()) {
    if (row.length !== columns.length) {
      throw new CsvError(
        `row ${i + 2} has ${row.length} fields, header has ${columns.length}`,
      );
    }
  }
  return { columns, rows };
}

function splitLine(line: string): string[] {
  const out: string[] = [];
  let cur = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"' && line[i + 1] === '"') {
        cur += '"';
        i++;
      } else if (ch === '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      out.push(cur);
      cur = "";
    } else {
      cur += ch;
    }
  }
  out.push(cur);
  return out;
}

/** Numeric column by name; throws if the column is missing or non-numeric. */
export function numericColumn(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new CsvError(
      `column "${name}" not in table (have: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((row, r) => {
    const v = Number(row[idx]);
    if (!Number.isFinite(v)) {
      throw new CsvError(`row ${r + 2}, column "${name}": not a number: ${row[idx]}`);
    }
    return v;
  });
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new CsvError(
      `column "${name}" not in table (have: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((row) => row[idx]);
}
