/** Typed CSV loading for the numeric tables written by the solver CLI. */

import { readFileSync } from "fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

export interface Table {
  columns: string[];
  rows: Record<string, number>[];
}

/**
 * Read a CSV file and check its columns: either an exact expected list, or a
 * validator returning an error message (or null) for dynamic-width tables.
 * All values are parsed as finite numbers; anything else is a schema error.
 */
export function readTable(
  path: string,
  expected: string[] | ((columns: string[]) => string | null),
): Table {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`);
  }
  const columns = parsed.meta.fields ?? [];
  if (typeof expected === "function") {
    const problem = expected(columns);
    if (problem !== null) throw new SchemaError(`${path}: ${problem}`);
  } else {
    const missing = expected.filter((c) => !columns.includes(c));
    const extra = columns.filter((c) => !expected.includes(c));
    if (missing.length > 0 || extra.length > 0) {
      throw new SchemaError(
        `${path}: column mismatch (missing: [${missing}], unexpected: [${extra}])`,
      );
    }
  }
  const rows = parsed.data.map((raw, i) => {
    const row: Record<string, number> = {};
    for (const col of columns) {
      const v = Number(raw[col]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(`${path}: row ${i + 1}, column ${col}: not a finite number`);
      }
      row[col] = v;
    }
    return row;
  });
  return { columns, rows };
}

/** Column of a table as a plain array. */
export function column(table: Table, name: string): number[] {
  return table.rows.map((r) => r[name]);
}

/** Distinct values of a column, in first-appearance order. */
export function distinct(table: Table, name: string): number[] {
  const seen: number[] = [];
  for (const r of table.rows) {
    if (!seen.includes(r[name])) seen.push(r[name]);
  }
  return seen;
}
