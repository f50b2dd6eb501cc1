import { writeFileSync } from "node:fs";
import { readTrajectoryCsv, type Trajectory } from "./csv.js";
import { linearScale, polyline, svgDocument, tag, text, xAxis, yAxis } from "./svg.js";
import type { PlotJob } from "./types.js";

const WIDTH = 680;
const HEIGHT = 440;
const MARGIN = { left: 72, right: 28, top: 24, bottom: 60 };

const SERIES: Array<{ key: keyof Trajectory; label: string; color: string; dash: string }> = [
  { key: "spin", label: "spin population", color: "#1f77b4", dash: "" },
  { key: "cavity", label: "cavity population", color: "#ff7f0e", dash: "" },
  { key: "qubit", label: "qubit population", color: "#2ca02c", dash: "" },
  { key: "overlap", label: "symmetric overlap", color: "#9467bd", dash: "5,3" },
];

/** Population traces and the symmetric-mode overlap on one time axis. */
export function renderTraces(traj: Trajectory): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const t0 = traj.t[0];
  const t1 = traj.t[traj.t.length - 1];
  const xScale = linearScale([t0, t1], [MARGIN.left, MARGIN.left + plotW]);
  // populations live in [0, 1]; keep the frame fixed so runs compare
  const yScale = linearScale([0, 1.02], [MARGIN.top + plotH, MARGIN.top]);

  const lines = SERIES.map((s) =>
    polyline(traj.t, traj[s.key] as number[], xScale, yScale, s.color, s.dash),
  );

  const legend = SERIES.map((s, i) => {
    const y = MARGIN.top + 14 + 18 * i;
    const x = MARGIN.left + 12;
    const swatch = tag("line", {
      x1: x,
      x2: x + 22,
      y1: y - 4,
      y2: y - 4,
      stroke: s.color,
      "stroke-width": 2,
      ...(s.dash ? { "stroke-dasharray": s.dash } : {}),
    });
    return swatch + text(x + 28, y, s.label);
  });

  const finalQubit = traj.qubit[traj.qubit.length - 1];
  const label = `final qubit population = ${formatValue(finalQubit)}`;
  const annotation =
    tag("circle", {
      cx: xScale(t1),
      cy: yScale(finalQubit),
      r: 3.5,
      fill: "#2ca02c",
    }) +
    text(xScale(t1) - 8, yScale(finalQubit) - 10, label, {
      "text-anchor": "end",
      "font-size": 13,
    });

  const body = [
    lines.join("\n"),
    legend.join("\n"),
    annotation,
    xAxis(xScale, MARGIN.top + plotH, "Gt"),
    yAxis(yScale, MARGIN.left, "population / overlap"),
  ].join("\n");
  return svgDocument(WIDTH, HEIGHT, body);
}

function formatValue(v: number): string {
  return String(Number(v.toFixed(3)));
}

export function plotTraces(job: PlotJob): void {
  writeFileSync(job.output, renderTraces(readTrajectoryCsv(job.input)));
}
