import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { SchemaError } from "./types.js";

const HEATMAP_COLUMNS = ["delta_IB", "tau_R", "efficiency"] as const;
const TRAJECTORY_COLUMNS = [
  "t",
  "spin_pop",
  "cavity_pop",
  "qubit_pop",
  "sym_overlap",
] as const;
const SPECTRUM_COLUMNS = ["xi", "re", "im"] as const;

export interface HeatmapGrid {
  x: number[]; // delta_IB values, one per grid column
  y: number[]; // tau_R values, one per grid row
  /** values[i][j] = efficiency at x[i], y[j]; NaN marks a failed point */
  values: number[][];
}

export interface Trajectory {
  t: number[];
  spin: number[];
  cavity: number[];
  qubit: number[];
  overlap: number[];
}

export interface Spectrum {
  xi: number[];
  re: number[];
  im: number[];
}

function parseNumber(token: string, path: string, line: number): number {
  // the producer writes lowercase nan/inf; anything else must parse cleanly
  if (token === "nan") return NaN;
  if (token === "inf") return Infinity;
  if (token === "-inf") return -Infinity;
  if (token.trim() === "" || Number.isNaN(Number(token))) {
    throw new SchemaError(`${path}:${line}: non-numeric value ${JSON.stringify(token)}`, []);
  }
  return Number(token);
}

function readTable(path: string, expected: readonly string[]): number[][] {
  const parsed = Papa.parse<string[]>(readFileSync(path, "utf8").trim(), {
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`, expected);
  }
  const rows = parsed.data;
  const header = rows[0] ?? [];
  if (header.length !== expected.length || expected.some((c, i) => header[i] !== c)) {
    throw new SchemaError(
      `${path}: expected columns ${expected.join(", ")}; got ${header.join(", ")}`,
      expected,
    );
  }
  return rows.slice(1).map((cells, i) => {
    if (cells.length !== expected.length) {
      throw new SchemaError(
        `${path}:${i + 2}: expected ${expected.length} fields, got ${cells.length}`,
        expected,
      );
    }
    return cells.map((c) => parseNumber(c, path, i + 2));
  });
}

function uniqueInOrder(values: number[]): number[] {
  const out: number[] = [];
  for (const v of values) {
    if (out.length === 0 || out[out.length - 1] !== v) out.push(v);
  }
  return out;
}

/** Read a 2-d sweep CSV (row-major over delta_IB, then tau_R). */
export function readHeatmapCsv(path: string): HeatmapGrid {
  const rows = readTable(path, HEATMAP_COLUMNS);
  const x = uniqueInOrder(rows.map((r) => r[0]));
  let firstBlock = rows.length;
  for (let i = 0; i < rows.length; i++) {
    if (rows[i][0] !== x[0]) {
      firstBlock = i;
      break;
    }
  }
  const y = uniqueInOrder(rows.slice(0, firstBlock).map((r) => r[1]));
  if (x.length < 2 || y.length < 2 || rows.length !== x.length * y.length) {
    throw new SchemaError(
      `${path}: needs a 2-d grid of at least 2x2 points, got ${x.length}x${y.length} ` +
        `from ${rows.length} rows; expected columns ${HEATMAP_COLUMNS.join(", ")}`,
      HEATMAP_COLUMNS,
    );
  }
  const values: number[][] = [];
  for (let i = 0; i < x.length; i++) {
    values.push(rows.slice(i * y.length, (i + 1) * y.length).map((r) => r[2]));
    for (let j = 0; j < y.length; j++) {
      const row = rows[i * y.length + j];
      if (row[0] !== x[i] || row[1] !== y[j]) {
        throw new SchemaError(
          `${path}: rows are not a row-major grid (row ${i * y.length + j + 2})`,
          HEATMAP_COLUMNS,
        );
      }
    }
  }
  return { x, y, values };
}

export function readTrajectoryCsv(path: string): Trajectory {
  const rows = readTable(path, TRAJECTORY_COLUMNS);
  if (rows.length < 2) {
    throw new SchemaError(
      `${path}: need at least 2 samples, got ${rows.length}; ` +
        `expected columns ${TRAJECTORY_COLUMNS.join(", ")}`,
      TRAJECTORY_COLUMNS,
    );
  }
  return {
    t: rows.map((r) => r[0]),
    spin: rows.map((r) => r[1]),
    cavity: rows.map((r) => r[2]),
    qubit: rows.map((r) => r[3]),
    overlap: rows.map((r) => r[4]),
  };
}

export function readSpectrumCsv(path: string): Spectrum {
  const rows = readTable(path, SPECTRUM_COLUMNS);
  if (rows.length < 2) {
    throw new SchemaError(
      `${path}: need at least 2 samples, got ${rows.length}; ` +
        `expected columns ${SPECTRUM_COLUMNS.join(", ")}`,
      SPECTRUM_COLUMNS,
    );
  }
  return {
    xi: rows.map((r) => r[0]),
    re: rows.map((r) => r[1]),
    im: rows.map((r) => r[2]),
  };
}
