/** Scaled core stream profiles overlaid on the reference radial profile. */

import { distinct, readTable, type Table } from "../csv.js";
import { loadManifest, outputPath, solveManifestSchema } from "../manifest.js";
import { PALETTE, SvgDocument, linearScale } from "../svg.js";

const WIDTH = 560;
const HEIGHT = 400;
const MARGIN = { left: 56, right: 16, top: 24, bottom: 64 };

/** Max |scaled_psi - w_gamma| over the rows of one vortex, as recorded in the CSV. */
export function csvMaxDeviation(table: Table, vortex: number): number {
  return Math.max(
    ...table.rows
      .filter((r) => r.vortex === vortex)
      .map((r) => Math.abs(r.scaled_psi - r.w_gamma)),
  );
}

export function renderProfile(manifestPath: string): string {
  const { manifest, dir } = loadManifest(manifestPath, solveManifestSchema);
  const csvName = manifest.outputs.find((o) => o.startsWith("profile"));
  if (!csvName) throw new Error(`${manifestPath}: no profile CSV among outputs`);
  const table = readTable(outputPath(dir, manifest.outputs, csvName), [
    "vortex",
    "r_over_s",
    "scaled_psi",
    "w_gamma",
  ]);
  const vortices = distinct(table, "vortex");

  const rMax = Math.max(...table.rows.map((r) => r.r_over_s));
  const yMax = 1.05 * Math.max(...table.rows.map((r) => Math.max(r.scaled_psi, r.w_gamma)));
  const x = linearScale([0, rMax], [MARGIN.left, WIDTH - MARGIN.right]);
  const y = linearScale([0, yMax], [HEIGHT - MARGIN.bottom, MARGIN.top]);

  const svg = new SvgDocument(WIDTH, HEIGHT);
  // axes
  svg.line(MARGIN.left, y(0), WIDTH - MARGIN.right, y(0), { stroke: "#000" });
  svg.line(MARGIN.left, y(0), MARGIN.left, MARGIN.top, { stroke: "#000" });
  for (const tick of [0, 0.25, 0.5, 0.75, 1.0].map((f) => f * rMax)) {
    svg.line(x(tick), y(0), x(tick), y(0) + 4, { stroke: "#000" });
    svg.text(x(tick), y(0) + 16, tick.toFixed(2), { "font-size": 10, "text-anchor": "middle" });
  }
  for (const frac of [0.25, 0.5, 0.75, 1.0]) {
    const v = (frac * yMax) / 1.05;
    svg.line(MARGIN.left - 4, y(v), MARGIN.left, y(v), { stroke: "#000" });
    svg.text(MARGIN.left - 8, y(v) + 3, v.toPrecision(3), { "font-size": 10, "text-anchor": "end" });
  }
  svg.text(WIDTH / 2, HEIGHT - MARGIN.bottom + 32, "r / s", {
    "font-size": 12,
    "text-anchor": "middle",
  });

  // reference radial profile (identical for every vortex): draw once
  const ref = table.rows.filter((r) => r.vortex === vortices[0]);
  svg.polyline(
    ref.map((r) => [x(r.r_over_s), y(r.w_gamma)]),
    { stroke: "#000", "stroke-width": 2, "stroke-dasharray": "6,4" },
  );
  svg.text(WIDTH - MARGIN.right - 6, MARGIN.top + 12, "reference profile", {
    "font-size": 11,
    "text-anchor": "end",
  });

  const annotations: string[] = [];
  vortices.forEach((vi, i) => {
    const rows = table.rows.filter((r) => r.vortex === vi);
    const color = PALETTE[i % PALETTE.length];
    svg.polyline(
      rows.map((r) => [x(r.r_over_s), y(r.scaled_psi)]),
      { stroke: color, "stroke-width": 1.6 },
    );
    svg.circle(MARGIN.left + 8, MARGIN.top + 12 + 14 * i, 4, { fill: color });
    svg.text(MARGIN.left + 16, MARGIN.top + 16 + 14 * i, `vortex ${vi}`, { "font-size": 11 });
    annotations.push(`vortex ${vi}: max deviation ${csvMaxDeviation(table, vi).toExponential(3)}`);
  });

  annotations.forEach((a, i) => {
    svg.text(WIDTH / 2, HEIGHT - 22 + 12 * i, a, {
      "font-size": 11,
      "text-anchor": "middle",
      fill: "#333",
    });
  });
  return svg.render();
}
