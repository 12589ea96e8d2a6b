#!/usr/bin/env node
/**
 * plot_ber --sim out.csv --genie genie.csv -o fig.svg --title "SI=0.0941"
 *
 * Renders a semilog-y BER-vs-SNR figure overlaying the simulated detector
 * curves from a sweep CSV with the numerically integrated genie-bound curve.
 * Exit codes: 0 ok, 1 bad input (missing file or schema mismatch).
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { parseGenieCsv, parseSimCsv, SchemaError, simSeries } from "./csv.js";
import { Curve, renderSvg } from "./plot.js";

const DETECTOR_LABELS: Record<string, string> = {
  glrt: "GLRT-MLSD",
  pcsi: "PCSI",
};

export function buildCurves(simText: string, genieText: string): Curve[] {
  const curves: Curve[] = [];
  const sim = parseSimCsv(simText);
  if (sim.length === 0) {
    console.warn("warning: sim CSV has no data rows; plotting genie curve only");
  }
  for (const [detector, points] of simSeries(sim)) {
    curves.push({
      label: DETECTOR_LABELS[detector] ?? detector,
      role: "sim",
      points,
    });
  }
  const genie = parseGenieCsv(genieText);
  curves.push({
    label: "Genie bound",
    role: "num",
    points: genie
      .map((p) => [p.snrDb, p.bep] as [number, number])
      .sort((a, b) => a[0] - b[0]),
  });
  return curves;
}

export function main(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      sim: { type: "string" },
      genie: { type: "string" },
      output: { type: "string", short: "o" },
      title: { type: "string", default: "BER vs average SNR" },
    },
  });
  if (!values.sim || !values.genie || !values.output) {
    console.error("usage: plot_ber --sim <csv> --genie <csv> -o <svg> [--title t]");
    return 1;
  }
  try {
    const simText = readFileSync(values.sim, "utf8");
    const genieText = readFileSync(values.genie, "utf8");
    const svg = renderSvg(buildCurves(simText, genieText), values.title!);
    writeFileSync(values.output, svg);
    console.error(`wrote ${values.output}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || (err as NodeJS.ErrnoException).code) {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
