// Usage: cribtransfer-plots <kind> <input.csv> <output.svg>
// kinds: heatmap, traces, storage-spectrum

import { pathToFileURL } from "node:url";
import { render } from "./index.js";
import { FIGURE_KINDS, SchemaError, type FigureKind } from "./types.js";

export function main(argv: string[]): number {
  if (argv.length !== 3 || argv[0] === "--help" || argv[0] === "-h") {
    console.error("usage: cribtransfer-plots <kind> <input.csv> <output.svg>");
    console.error(`kinds: ${FIGURE_KINDS.join(", ")}`);
    return argv[0] === "--help" || argv[0] === "-h" ? 0 : 2;
  }
  const [kind, input, output] = argv;
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    console.error(`unknown figure kind ${JSON.stringify(kind)}; valid: ${FIGURE_KINDS.join(", ")}`);
    return 2;
  }
  try {
    render({ kind: kind as FigureKind, input, output });
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    if (err instanceof Error && "code" in err && err.code === "ENOENT") {
      console.error(`input not found: ${input}`);
      return 2;
    }
    throw err;
  }
  console.log(`wrote ${output}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
