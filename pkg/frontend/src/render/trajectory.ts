/** Vortex trajectories drawn on an orthographic view of the sphere. */

import { geoGraticule10, geoOrthographic, geoPath } from "d3-geo";

import { column, readTable, type Table } from "../csv.js";
import { dynamicsManifestSchema, loadManifest, outputPath } from "../manifest.js";
import { PALETTE, SvgDocument } from "../svg.js";

const WIDTH = 640;
const HEIGHT = 640;

const DEG = 180 / Math.PI;

/** Colatitude/longitude in radians to GeoJSON [lon, lat] in degrees. */
function toLonLat(theta: number, phi: number): [number, number] {
  return [phi * DEG, 90 - theta * DEG];
}

function validateColumns(columns: string[]): string | null {
  if (columns[0] !== "t") return `first column is ${columns[0]}, expected t`;
  const n = (columns.length - 1) / 2;
  if (!Number.isInteger(n) || n < 1) return `expected t,theta0,phi0,... pairs, got [${columns}]`;
  for (let i = 0; i < n; i++) {
    if (columns[1 + 2 * i] !== `theta${i}` || columns[2 + 2 * i] !== `phi${i}`) {
      return `expected columns theta${i},phi${i} at positions ${1 + 2 * i},${2 + 2 * i}`;
    }
  }
  return null;
}

function vortexCount(table: Table): number {
  return (table.columns.length - 1) / 2;
}

export function renderTrajectory(manifestPath: string): string {
  const { manifest, dir } = loadManifest(manifestPath, dynamicsManifestSchema);
  const table = readTable(outputPath(dir, manifest.outputs, manifest.outputs[0]), validateColumns);
  const n = vortexCount(table);

  // center the view on the mid-trajectory position of the first vortex
  const mid = table.rows[Math.floor(table.rows.length / 2)];
  const [lon0, lat0] = toLonLat(mid.theta0, mid.phi0);
  const projection = geoOrthographic()
    .rotate([-lon0, -Math.max(-60, Math.min(60, lat0))])
    .translate([WIDTH / 2, HEIGHT / 2])
    .scale(0.42 * Math.min(WIDTH, HEIGHT))
    .clipAngle(90);
  const path = geoPath(projection);

  const svg = new SvgDocument(WIDTH, HEIGHT);
  svg.path(path({ type: "Sphere" }) ?? "", {
    fill: "#f7fbff",
    stroke: "#555",
    "stroke-width": 1,
  });
  svg.path(path(geoGraticule10()) ?? "", {
    fill: "none",
    stroke: "#ccc",
    "stroke-width": 0.5,
  });

  for (let vi = 0; vi < n; vi++) {
    const color = PALETTE[vi % PALETTE.length];
    // geoPath resamples each segment along its great circle, so the drawn
    // curve is projection-correct and clipped to the visible hemisphere
    const coords = table.rows.map((r) => toLonLat(r[`theta${vi}`], r[`phi${vi}`]));
    const line = path({ type: "LineString", coordinates: coords });
    if (line) {
      svg.path(line, { fill: "none", stroke: color, "stroke-width": 1.8 });
    }
    const start = projection(coords[0]);
    const end = projection(coords[coords.length - 1]);
    if (start) svg.circle(start[0], start[1], 4, { fill: color });
    if (end) {
      svg.circle(end[0], end[1], 4, { fill: "white", stroke: color, "stroke-width": 1.5 });
    }
    svg.circle(18, 24 + 18 * vi, 5, { fill: color });
    svg.text(28, 28 + 18 * vi, `vortex ${vi}`, { "font-size": 12 });
  }

  const t = column(table, "t");
  svg.text(WIDTH / 2, HEIGHT - 10, `trajectory over t = ${t[0]} .. ${t[t.length - 1]}`, {
    "font-size": 12,
    "text-anchor": "middle",
    fill: "#333",
  });
  return svg.render();
}
