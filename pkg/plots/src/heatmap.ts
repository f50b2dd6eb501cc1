import { writeFileSync } from "node:fs";
import { interpolateViridis } from "d3-scale-chromatic";
import { readHeatmapCsv, type HeatmapGrid } from "./csv.js";
import { fmt, linearScale, svgDocument, tag, text, xAxis, yAxis } from "./svg.js";
import type { PlotJob } from "./types.js";

const MASK_FILL = "#c8c8c8"; // failed sweep points (NaN in the CSV)

const WIDTH = 680;
const HEIGHT = 520;
const MARGIN = { left: 80, right: 110, top: 24, bottom: 64 };

/**
 * Efficiency heatmap over controlled broadening and rephasing delay.
 *
 * The color scale is pinned to [0, 1] rather than the data range so
 * figures from different sweeps are directly comparable.
 */
export function renderHeatmap(grid: HeatmapGrid): string {
  const { x, y, values } = grid;
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

  // cell edges: extend half a step beyond the first/last grid points
  const xEdges = edges(x);
  const yEdges = edges(y);
  const xScale = linearScale([xEdges[0], xEdges[x.length]], [MARGIN.left, MARGIN.left + plotW]);
  const yScale = linearScale([yEdges[0], yEdges[y.length]], [MARGIN.top + plotH, MARGIN.top]);

  const cells: string[] = [];
  for (let i = 0; i < x.length; i++) {
    for (let j = 0; j < y.length; j++) {
      const v = values[i][j];
      const masked = !Number.isFinite(v);
      const x0 = xScale(xEdges[i]);
      const y0 = yScale(yEdges[j + 1]);
      cells.push(
        tag("rect", {
          class: masked ? "cell masked" : "cell",
          x: x0,
          y: y0,
          width: xScale(xEdges[i + 1]) - x0,
          height: yScale(yEdges[j]) - y0,
          fill: masked ? MASK_FILL : interpolateViridis(clamp01(v)),
        }),
      );
    }
  }

  const barX = MARGIN.left + plotW + 24;
  const body = [
    cells.join("\n"),
    xAxis(xScale, MARGIN.top + plotH, "δ_IB [G]"),
    yAxis(yScale, MARGIN.left, "τ_R [1/G]"),
    colorbar(barX, MARGIN.top, 18, plotH),
  ].join("\n");
  return svgDocument(WIDTH, HEIGHT, body);
}

/** Cell boundaries: midpoints between grid points, end caps half a step out. */
function edges(grid: number[]): number[] {
  const n = grid.length;
  const out = [grid[0] - (grid[1] - grid[0]) / 2];
  for (let i = 1; i < n; i++) out.push((grid[i - 1] + grid[i]) / 2);
  out.push(grid[n - 1] + (grid[n - 1] - grid[n - 2]) / 2);
  return out;
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

/** Vertical efficiency legend, domain fixed to [0, 1]. */
function colorbar(x: number, y: number, width: number, height: number): string {
  const parts: string[] = [];
  const n = 64;
  for (let k = 0; k < n; k++) {
    const v0 = k / n;
    const yTop = y + height * (1 - (k + 1) / n);
    parts.push(
      tag("rect", {
        x,
        y: yTop,
        width,
        height: height / n + 0.5,
        fill: interpolateViridis(v0 + 0.5 / n),
      }),
    );
  }
  parts.push(tag("rect", { x, y, width, height, fill: "none", stroke: "#222" }));
  for (let tick = 0; tick <= 5; tick++) {
    const v = tick / 5;
    const py = y + height * (1 - v);
    parts.push(tag("line", { x1: x + width, x2: x + width + 4, y1: py, y2: py, stroke: "#222" }));
    parts.push(text(x + width + 7, py + 4, fmt(v)));
  }
  parts.push(
    tag(
      "text",
      {
        x: x + width + 40,
        y: y + height / 2,
        "font-size": 13,
        fill: "#222",
        "text-anchor": "middle",
        transform: `rotate(-90 ${fmt(x + width + 40)} ${fmt(y + height / 2)})`,
      },
      "efficiency",
    ),
  );
  return parts.join("\n");
}

export function plotHeatmap(job: PlotJob): void {
  writeFileSync(job.output, renderHeatmap(readHeatmapCsv(job.input)));
}
