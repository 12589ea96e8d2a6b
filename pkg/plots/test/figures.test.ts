/**
 * End-to-end checks on the shipped result tables in testdata/ (regenerated
 * with scripts/run_ber_curves.py in the parent package): the simulated
 * GLRT-MLSD curve must track the numerically integrated genie bound within
 * 0.2 decades at every shared SNR point, for both channel presets.
 */

import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import { parseGenieCsv, parseSimCsv, simSeries } from "../src/csv.js";
import { maxGapDecades } from "../src/plot.js";

const DATA = join(dirname(fileURLToPath(import.meta.url)), "..", "testdata");

function load(preset: string) {
  const sim = parseSimCsv(
    readFileSync(join(DATA, `${preset}_sim.csv`), "utf8"),
  );
  const genie = parseGenieCsv(
    readFileSync(join(DATA, `${preset}_genie.csv`), "utf8"),
  ).map((p) => [p.snrDb, p.bep] as [number, number]);
  return { sim, genie };
}

describe.each(["weak", "strong"])("%s preset figure data", (preset) => {
  it("glrt sim tracks the genie bound within 0.2 decades", () => {
    const { sim, genie } = load(preset);
    const glrt = simSeries(sim).get("glrt");
    expect(glrt).toBeDefined();
    const gap = maxGapDecades(glrt!, genie);
    expect(gap).not.toBeNull();
    expect(gap!).toBeLessThan(0.2);
  });

  it("renders a figure file via the CLI", () => {
    const out = join(mkdtempSync(join(tmpdir(), "plots-")), `${preset}.svg`);
    const code = main([
      "--sim", join(DATA, `${preset}_sim.csv`),
      "--genie", join(DATA, `${preset}_genie.csv`),
      "-o", out,
      "--title", `preset=${preset}`,
    ]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain(`preset=${preset}`);
    expect(svg).toContain("GLRT-MLSD (sim.)");
  });
});

describe("cli error handling", () => {
  it("exits 1 on schema mismatch", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "snr_db,bits\n20,100\n");
    const out = join(dir, "o.svg");
    const code = main([
      "--sim", bad,
      "--genie", join(DATA, "weak_genie.csv"),
      "-o", out,
    ]);
    expect(code).toBe(1);
  });

  it("exits 1 on a missing file", () => {
    const code = main([
      "--sim", "/no/such/file.csv",
      "--genie", join(DATA, "weak_genie.csv"),
      "-o", "/tmp/x.svg",
    ]);
    expect(code).toBe(1);
  });

  it("plots genie-only from an empty sim table with a warning", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const emptySim = join(dir, "empty.csv");
    const header = readFileSync(join(DATA, "weak_sim.csv"), "utf8").split("\n")[0];
    writeFileSync(emptySim, header + "\n");
    const out = join(dir, "o.svg");
    const code = main([
      "--sim", emptySim,
      "--genie", join(DATA, "weak_genie.csv"),
      "-o", out,
    ]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain("Genie bound (num.)");
    expect(svg).not.toContain("GLRT-MLSD");
  });
});
