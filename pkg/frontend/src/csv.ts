/**
 * Reader for the simulation result CSVs produced by the qsurgery CLI.
 *
 * The renderer never recomputes statistics: every number plotted comes out
 * of this file untouched.
 */

import Papa from "papaparse";

export const CSV_COLUMNS = [
  "scheme",
  "rounds",
  "p",
  "shots",
  "failures",
  "rate",
  "ci_low",
  "ci_high",
] as const;

export interface ResultRow {
  scheme: string;
  rounds: number;
  p: number;
  shots: number;
  failures: number;
  rate: number;
  ci_low: number;
  ci_high: number;
}

/** The CSV does not match the result-table contract. */
export class SchemaError extends Error {}

const INT_COLUMNS = new Set(["rounds", "shots", "failures"]);

function toNumber(column: string, raw: string, line: number): number {
  const value = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(value)) {
    throw new SchemaError(
      `row ${line}: column "${column}" is not a number (got "${raw}")`
    );
  }
  if (INT_COLUMNS.has(column) && !Number.isInteger(value)) {
    throw new SchemaError(
      `row ${line}: column "${column}" is not an integer (got "${raw}")`
    );
  }
  return value;
}

/** Parse result rows, rejecting anything that strays from the contract. */
export function parseResults(text: string): ResultRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`CSV parse error on row ${e.row}: ${e.message}`);
  }
  const header = parsed.meta.fields ?? [];
  for (const column of CSV_COLUMNS) {
    if (!header.includes(column)) {
      throw new SchemaError(`results CSV is missing column "${column}"`);
    }
  }
  if (parsed.data.length === 0) {
    throw new SchemaError("results CSV has no data rows");
  }
  return parsed.data.map((raw, i) => {
    const row: Record<string, string | number> = { scheme: raw.scheme };
    if (!raw.scheme) {
      throw new SchemaError(`row ${i + 2}: column "scheme" is empty`);
    }
    for (const column of CSV_COLUMNS) {
      if (column === "scheme") continue;
      row[column] = toNumber(column, raw[column], i + 2);
    }
    return row as unknown as ResultRow;
  });
}

/** Distinct schemes in first-appearance order. */
export function schemeNames(rows: ResultRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.scheme)) seen.push(row.scheme);
  }
  return seen;
}
