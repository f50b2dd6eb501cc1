export { readHeatmapCsv, readSpectrumCsv, readTrajectoryCsv } from "./csv.js";
export type { HeatmapGrid, Spectrum, Trajectory } from "./csv.js";
export { plotHeatmap, renderHeatmap } from "./heatmap.js";
export { plotStorageSpectrum, renderSpectrum } from "./spectrum.js";
export { plotTraces, renderTraces } from "./traces.js";
export { FIGURE_KINDS, SchemaError } from "./types.js";
export type { FigureKind, PlotJob } from "./types.js";

import { plotHeatmap } from "./heatmap.js";
import { plotStorageSpectrum } from "./spectrum.js";
import { plotTraces } from "./traces.js";
import { FIGURE_KINDS, type PlotJob } from "./types.js";

/** Run one job: read the CSV, write the SVG. */
export function render(job: PlotJob): void {
  switch (job.kind) {
    case "heatmap":
      return plotHeatmap(job);
    case "traces":
      return plotTraces(job);
    case "storage-spectrum":
      return plotStorageSpectrum(job);
    default:
      throw new Error(
        `unknown figure kind ${JSON.stringify(job.kind)}; valid: ${FIGURE_KINDS.join(", ")}`,
      );
  }
}
