import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it, vi } from "vitest";
import { main } from "../src/cli.js";

const FIXTURES = fileURLToPath(new URL("fixtures", import.meta.url));

function quiet() {
  return {
    err: vi.spyOn(console, "error").mockImplementation(() => {}),
    out: vi.spyOn(console, "log").mockImplementation(() => {}),
  };
}

describe("cli", () => {
  it("renders all three figure kinds end to end", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const spies = quiet();
    const jobs: Array<[string, string]> = [
      ["heatmap", "fig2.csv"],
      ["traces", "fig3_trajectory.csv"],
      ["storage-spectrum", "coherence_pde.csv"],
    ];
    for (const [kind, fixture] of jobs) {
      const out = join(dir, `${kind}.svg`);
      expect(main([kind, join(FIXTURES, fixture), out])).toBe(0);
      expect(existsSync(out)).toBe(true);
      expect(readFileSync(out, "utf8")).toMatch(/^<svg /);
    }
    spies.err.mockRestore();
    spies.out.mockRestore();
  });

  it("rejects an unknown figure kind", () => {
    const spies = quiet();
    expect(main(["scatter", "a.csv", "b.svg"])).toBe(2);
    expect(spies.err.mock.calls.flat().join(" ")).toContain("storage-spectrum");
    spies.err.mockRestore();
    spies.out.mockRestore();
  });

  it("reports schema mismatches with the expected columns", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "a,b\n1,2\n");
    const spies = quiet();
    expect(main(["heatmap", bad, join(dir, "out.svg")])).toBe(2);
    const msg = spies.err.mock.calls.flat().join(" ");
    expect(msg).toContain("schema error");
    expect(msg).toContain("delta_IB, tau_R, efficiency");
    spies.err.mockRestore();
    spies.out.mockRestore();
  });

  it("fails cleanly when the input file is missing", () => {
    const spies = quiet();
    expect(main(["traces", "/no/such/file.csv", "/tmp/out.svg"])).toBe(2);
    spies.err.mockRestore();
    spies.out.mockRestore();
  });

  it("wants exactly three arguments", () => {
    const spies = quiet();
    expect(main(["heatmap"])).toBe(2);
    expect(main(["--help"])).toBe(0);
    spies.err.mockRestore();
    spies.out.mockRestore();
  });
});
