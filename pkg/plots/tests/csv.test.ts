import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { readHeatmapCsv, readTrajectoryCsv } from "../src/csv.js";
import { SchemaError } from "../src/types.js";

const FIXTURES = fileURLToPath(new URL("fixtures", import.meta.url));

function tmpCsv(content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "plots-"));
  const p = join(dir, "in.csv");
  writeFileSync(p, content);
  return p;
}

describe("readHeatmapCsv", () => {
  it("reconstructs the row-major grid", () => {
    const grid = readHeatmapCsv(join(FIXTURES, "fig2.csv"));
    expect(grid.x).toHaveLength(6);
    expect(grid.y).toHaveLength(6);
    expect(grid.x[0]).toBe(0);
    expect(grid.x[5]).toBe(5);
    expect(grid.y[5]).toBe(0.5);
    expect(grid.values[0][1]).toBeCloseTo(0.913424, 5);
    for (const col of grid.values) {
      for (const v of col) expect(v).toBeGreaterThanOrEqual(0);
    }
  });

  it("rejects a header that does not match the schema", () => {
    const p = tmpCsv("delta_IB,efficiency\n0,0.9\n1,0.8\n");
    expect(() => readHeatmapCsv(p)).toThrowError(SchemaError);
    expect(() => readHeatmapCsv(p)).toThrowError(/delta_IB, tau_R, efficiency/);
  });

  it("rejects a single-row CSV: a heatmap needs a 2-d grid", () => {
    const p = tmpCsv("delta_IB,tau_R,efficiency\n0,0,0.9\n");
    expect(() => readHeatmapCsv(p)).toThrowError(/2-d grid/);
    expect(() => readHeatmapCsv(p)).toThrowError(/delta_IB, tau_R, efficiency/);
  });

  it("rejects a ragged grid", () => {
    const p = tmpCsv(
      "delta_IB,tau_R,efficiency\n0,0,0.9\n0,1,0.8\n1,0,0.7\n",
    );
    expect(() => readHeatmapCsv(p)).toThrowError(SchemaError);
  });

  it("passes nan holes through as NaN", () => {
    const p = tmpCsv(
      "delta_IB,tau_R,efficiency\n0,0,0.9\n0,1,nan\n1,0,0.7\n1,1,0.6\n",
    );
    const grid = readHeatmapCsv(p);
    expect(Number.isNaN(grid.values[0][1])).toBe(true);
    expect(grid.values[1][1]).toBe(0.6);
  });

  it("rejects non-numeric cells", () => {
    const p = tmpCsv("delta_IB,tau_R,efficiency\n0,0,high\n0,1,0.8\n");
    expect(() => readHeatmapCsv(p)).toThrowError(/non-numeric/);
  });
});

describe("readTrajectoryCsv", () => {
  it("reads the five trajectory columns", () => {
    const traj = readTrajectoryCsv(join(FIXTURES, "fig3_trajectory.csv"));
    expect(traj.t.length).toBeGreaterThan(400);
    expect(traj.t[0]).toBe(0);
    const last = traj.qubit[traj.qubit.length - 1];
    expect(last).toBeCloseTo(0.9142, 3);
    // conservation holds pointwise in the file
    for (let i = 0; i < traj.t.length; i += 50) {
      expect(traj.spin[i] + traj.cavity[i] + traj.qubit[i]).toBeCloseTo(1, 5);
    }
  });

  it("names the missing column set on schema mismatch", () => {
    const p = tmpCsv("t,spin_pop,cavity_pop,qubit_pop\n0,1,0,0\n1,0,1,0\n");
    try {
      readTrajectoryCsv(p);
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(SchemaError);
      expect((err as SchemaError).expected).toContain("sym_overlap");
      expect((err as SchemaError).message).toMatch(/sym_overlap/);
    }
  });
});
