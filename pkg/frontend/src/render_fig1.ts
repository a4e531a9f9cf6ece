/**
 * render_fig1 <results.csv> <fig1.png> [--schemes a,b,c]
 *
 * Reads a simulation result table, draws the per-scheme failure-rate
 * figure, writes the PNG, and prints one fit-slope line per scheme.  The
 * script never simulates anything: it is a pure function of the CSV.
 * Exit codes: 0 ok, 1 schema/data problem, 2 usage problem.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseResults, SchemaError } from "./csv.js";
import { buildFigure, fitSummaryLines, renderFigure } from "./figure.js";

const USAGE = "usage: render_fig1 <results.csv> <out.png> [--schemes a,b,c]";

export interface CliIo {
  out: (line: string) => void;
  err: (line: string) => void;
}

export function main(argv: string[], io?: CliIo): number {
  const out = io?.out ?? ((line) => process.stdout.write(line + "\n"));
  const err = io?.err ?? ((line) => process.stderr.write(line + "\n"));

  const positional: string[] = [];
  let schemes: string[] | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--schemes") {
      const value = argv[++i];
      if (!value) {
        err("--schemes needs a comma-separated list");
        err(USAGE);
        return 2;
      }
      schemes = value.split(",").map((s) => s.trim()).filter(Boolean);
    } else if (arg.startsWith("--schemes=")) {
      schemes = arg.slice("--schemes=".length).split(",").map((s) => s.trim()).filter(Boolean);
    } else if (arg === "--help" || arg === "-h") {
      out(USAGE);
      return 0;
    } else if (arg.startsWith("-")) {
      err(`unknown flag ${arg}`);
      err(USAGE);
      return 2;
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 2) {
    err(USAGE);
    return 2;
  }
  const [inputPath, outputPath] = positional;

  let text: string;
  try {
    text = readFileSync(inputPath, "utf8");
  } catch (e) {
    err(`cannot read ${inputPath}: ${(e as Error).message}`);
    return 2;
  }

  try {
    const rows = parseResults(text);
    const model = buildFigure(rows, { schemes });
    writeFileSync(outputPath, renderFigure(model).toPng());
    for (const line of fitSummaryLines(model)) out(line);
    out(`wrote ${outputPath}`);
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      err(`schema error: ${e.message}`);
      return 1;
    }
    throw e;
  }
}

if (
  process.argv[1] &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exit(main(process.argv.slice(2)));
}
