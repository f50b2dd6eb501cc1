import { writeFileSync } from "node:fs";
import { readSpectrumCsv, type Spectrum } from "./csv.js";
import { linearScale, polyline, svgDocument, tag, text, xAxis, yAxis } from "./svg.js";
import type { PlotJob } from "./types.js";

const WIDTH = 680;
const HEIGHT = 440;
const MARGIN = { left: 72, right: 28, top: 24, bottom: 60 };

/** Stored spin coherence across the absorption band: Re, Im, magnitude. */
export function renderSpectrum(spec: Spectrum): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const mag = spec.re.map((re, i) => Math.hypot(re, spec.im[i]));
  const lo = Math.min(0, ...spec.re, ...spec.im);
  const hi = Math.max(...mag, 1e-12);
  const pad = 0.05 * (hi - lo || 1);

  const xScale = linearScale(
    [spec.xi[0], spec.xi[spec.xi.length - 1]],
    [MARGIN.left, MARGIN.left + plotW],
  );
  const yScale = linearScale([lo - pad, hi + pad], [MARGIN.top + plotH, MARGIN.top]);

  const series: Array<[number[], string, string, string]> = [
    [spec.re, "#1f77b4", "", "Re"],
    [spec.im, "#ff7f0e", "", "Im"],
    [mag, "#222222", "4,3", "magnitude"],
  ];
  const lines = series.map(([ys, color, dash]) =>
    polyline(spec.xi, ys, xScale, yScale, color, dash),
  );
  const legend = series.map(([, color, dash, label], i) => {
    const y = MARGIN.top + 14 + 18 * i;
    const x = MARGIN.left + 12;
    return (
      tag("line", {
        x1: x,
        x2: x + 22,
        y1: y - 4,
        y2: y - 4,
        stroke: color,
        "stroke-width": 2,
        ...(dash ? { "stroke-dasharray": dash } : {}),
      }) + text(x + 28, y, label)
    );
  });

  const body = [
    lines.join("\n"),
    legend.join("\n"),
    xAxis(xScale, MARGIN.top + plotH, "ξ (scaled detuning)"),
    yAxis(yScale, MARGIN.left, "spin coherence"),
  ].join("\n");
  return svgDocument(WIDTH, HEIGHT, body);
}

export function plotStorageSpectrum(job: PlotJob): void {
  writeFileSync(job.output, renderSpectrum(readSpectrumCsv(job.input)));
}
