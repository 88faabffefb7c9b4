/** Measured patch boundaries against the predicted core circles. */

import { SchemaError, distinct, readTable } from "../csv.js";
import { constructManifestSchema, loadManifest, outputPath } from "../manifest.js";
import { PALETTE, SvgDocument } from "../svg.js";

const PANEL = 300;
const MARGIN = 40;

export function renderBoundary(manifestPath: string): string {
  const { manifest, dir } = loadManifest(manifestPath, constructManifestSchema);
  const record = manifest.ansatz.find((r) => r.boundary_csv !== undefined);
  if (!record) {
    throw new SchemaError(`${manifestPath}: no ansatz record carries a boundary CSV`);
  }
  const table = readTable(outputPath(dir, manifest.outputs, record.boundary_csv!), [
    "vortex",
    "xi",
    "r_measured",
    "r_predicted",
  ]);
  const vortices = distinct(table, "vortex");

  const width = vortices.length * (PANEL + MARGIN) + MARGIN;
  const height = PANEL + 2 * MARGIN + 20;
  const svg = new SvgDocument(width, height);

  vortices.forEach((vi, pi) => {
    const rows = table.rows.filter((r) => r.vortex === vi);
    const predicted = rows[0].r_predicted;
    // tangent-plane panel centered on the vortex, spanning +-1.3 predicted radii
    const cx = MARGIN + pi * (PANEL + MARGIN) + PANEL / 2;
    const cy = MARGIN + PANEL / 2;
    const scale = PANEL / 2 / (1.3 * predicted);
    const color = PALETTE[pi % PALETTE.length];

    svg.circle(cx, cy, predicted * scale, {
      fill: "none",
      stroke: "#888",
      "stroke-width": 1,
      "stroke-dasharray": "5,4",
    });
    const points: [number, number][] = rows.map((r) => [
      cx + r.r_measured * Math.cos(r.xi) * scale,
      cy - r.r_measured * Math.sin(r.xi) * scale,
    ]);
    points.push(points[0]); // close the curve
    svg.polyline(points, { stroke: color, "stroke-width": 1.8 });

    const maxDev = Math.max(...rows.map((r) => Math.abs(r.r_measured - r.r_predicted) / r.r_predicted));
    svg.text(cx, MARGIN - 12, `vortex ${vi}`, {
      "font-size": 13,
      "text-anchor": "middle",
      "font-weight": "bold",
    });
    svg.text(cx, MARGIN + PANEL + 18, `max radius deviation ${(100 * maxDev).toPrecision(3)}%`, {
      "font-size": 12,
      "text-anchor": "middle",
      fill: "#333",
    });
  });

  svg.text(width / 2, height - 6, `measured boundary (solid) vs predicted radius (dashed), eps = ${record.epsilon}`, {
    "font-size": 12,
    "text-anchor": "middle",
    fill: "#333",
  });
  return svg.render();
}
