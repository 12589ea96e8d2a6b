/**
 * Parsing for the two result-table schemas consumed by plot_ber:
 *
 *  - simulation sweeps: one row per (snr_db, detector) with a `ber` column
 *  - genie-bound tables: (snr_db, sep, bep)
 *
 * Unknown extra columns are ignored; missing required columns are a hard
 * error that names every missing column.
 */

import Papa from "papaparse";

export const SIM_REQUIRED = ["snr_db", "detector", "ber"] as const;
export const GENIE_REQUIRED = ["snr_db", "bep"] as const;

export class SchemaError extends Error {
  constructor(
    public readonly file: string,
    public readonly missing: string[],
  ) {
    super(`${file}: missing required columns: ${missing.join(", ")}`);
    this.name = "SchemaError";
  }
}

export interface SimRow {
  snrDb: number;
  detector: string;
  ber: number;
}

export interface GeniePoint {
  snrDb: number;
  bep: number;
}

function parseTable(text: string): Record<string, string>[] {
  const result = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  return result.data;
}

function checkColumns(
  rows: Record<string, string>[],
  text: string,
  required: readonly string[],
  label: string,
): void {
  const header =
    rows.length > 0
      ? Object.keys(rows[0])
      : text.trim().split(/\r?\n/, 1)[0]?.split(",") ?? [];
  const missing = required.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(label, missing);
  }
}

export function parseSimCsv(text: string, label = "sim csv"): SimRow[] {
  const rows = parseTable(text);
  checkColumns(rows, text, SIM_REQUIRED, label);
  return rows.map((r) => ({
    snrDb: Number(r.snr_db),
    detector: r.detector,
    ber: Number(r.ber),
  }));
}

export function parseGenieCsv(text: string, label = "genie csv"): GeniePoint[] {
  const rows = parseTable(text);
  checkColumns(rows, text, GENIE_REQUIRED, label);
  return rows.map((r) => ({ snrDb: Number(r.snr_db), bep: Number(r.bep) }));
}

/** Group sim rows into one sorted (snr, ber) series per detector. */
export function simSeries(rows: SimRow[]): Map<string, [number, number][]> {
  const byDetector = new Map<string, [number, number][]>();
  for (const row of rows) {
    if (!byDetector.has(row.detector)) {
      byDetector.set(row.detector, []);
    }
    byDetector.get(row.detector)!.push([row.snrDb, row.ber]);
  }
  for (const points of byDetector.values()) {
    points.sort((a, b) => a[0] - b[0]);
  }
  return byDetector;
}
