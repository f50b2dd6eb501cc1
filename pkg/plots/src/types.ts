export type FigureKind = "heatmap" | "traces" | "storage-spectrum";

export const FIGURE_KINDS: readonly FigureKind[] = [
  "heatmap",
  "traces",
  "storage-spectrum",
];

/** One rendering task: a CSV in, an SVG out. */
export interface PlotJob {
  input: string;
  kind: FigureKind;
  output: string;
}

/** Input CSV does not match the documented schema. */
export class SchemaError extends Error {
  readonly expected: readonly string[];

  constructor(message: string, expected: readonly string[]) {
    super(message);
    this.name = "SchemaError";
    this.expected = expected;
  }
}
