/** Log-log convergence of the weak error along an epsilon sweep.
 *
 * The weak error decays like the reciprocal logarithm of epsilon, so the
 * straight-line fit is done against 1/|ln eps| rather than eps itself;
 * the fitted slope is annotated on the figure.
 */

import { readTable } from "../csv.js";
import { constructManifestSchema, loadManifest, outputPath } from "../manifest.js";
import { PALETTE, SvgDocument, fitSlope, logScale } from "../svg.js";

const WIDTH = 560;
const HEIGHT = 420;
const MARGIN = { left: 64, right: 16, top: 24, bottom: 72 };

export interface ConvergenceFit {
  slope: number;
  invLogEps: number[];
  errors: number[];
}

/** Fitted log-log slope of the weak error against 1/|ln eps|. */
export function convergenceFit(manifestPath: string): ConvergenceFit {
  const { manifest, dir } = loadManifest(manifestPath, constructManifestSchema);
  const table = readTable(outputPath(dir, manifest.outputs, "convergence.csv"), [
    "epsilon",
    "circulation_deficit",
    "weak_error_cos_theta",
    "weak_error_sin_theta_cos_phi",
  ]);
  const invLogEps = table.rows.map((r) => 1 / Math.abs(Math.log(r.epsilon)));
  const errors = table.rows.map((r) => r.weak_error_cos_theta);
  const { slope } = fitSlope(invLogEps.map(Math.log), errors.map(Math.log));
  return { slope, invLogEps, errors };
}

export function renderConvergence(manifestPath: string): string {
  const { manifest, dir } = loadManifest(manifestPath, constructManifestSchema);
  const table = readTable(outputPath(dir, manifest.outputs, "convergence.csv"), [
    "epsilon",
    "circulation_deficit",
    "weak_error_cos_theta",
    "weak_error_sin_theta_cos_phi",
  ]);
  const fit = convergenceFit(manifestPath);

  const series = [
    { name: "weak error vs cos(theta)", values: fit.errors },
    // the CSV records kappa minus the measured circulation, which is
    // negative here; the log axis needs the magnitude
    { name: "|circulation deficit|", values: table.rows.map((r) => Math.abs(r.circulation_deficit)) },
  ];
  const allVals = series.flatMap((s) => s.values);
  const xDomain: [number, number] = [
    0.8 * Math.min(...fit.invLogEps),
    1.25 * Math.max(...fit.invLogEps),
  ];
  const yDomain: [number, number] = [0.8 * Math.min(...allVals), 1.25 * Math.max(...allVals)];
  const x = logScale(xDomain, [MARGIN.left, WIDTH - MARGIN.right]);
  const y = logScale(yDomain, [HEIGHT - MARGIN.bottom, MARGIN.top]);

  const svg = new SvgDocument(WIDTH, HEIGHT);
  svg.line(MARGIN.left, HEIGHT - MARGIN.bottom, WIDTH - MARGIN.right, HEIGHT - MARGIN.bottom, {
    stroke: "#000",
  });
  svg.line(MARGIN.left, HEIGHT - MARGIN.bottom, MARGIN.left, MARGIN.top, { stroke: "#000" });

  fit.invLogEps.forEach((v, i) => {
    svg.line(x(v), HEIGHT - MARGIN.bottom, x(v), HEIGHT - MARGIN.bottom + 4, { stroke: "#000" });
    svg.text(x(v), HEIGHT - MARGIN.bottom + 16, v.toPrecision(3), {
      "font-size": 10,
      "text-anchor": "middle",
    });
    svg.text(x(v), HEIGHT - MARGIN.bottom + 28, `eps=${table.rows[i].epsilon.toExponential(0)}`, {
      "font-size": 9,
      "text-anchor": "middle",
      fill: "#666",
    });
  });
  for (const v of allVals) {
    svg.line(MARGIN.left - 4, y(v), MARGIN.left, y(v), { stroke: "#000" });
    svg.text(MARGIN.left - 8, y(v) + 3, v.toExponential(1), {
      "font-size": 9,
      "text-anchor": "end",
    });
  }
  svg.text(WIDTH / 2, HEIGHT - MARGIN.bottom + 44, "1 / |ln eps|  (log scale)", {
    "font-size": 12,
    "text-anchor": "middle",
  });

  series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    svg.polyline(
      fit.invLogEps.map((v, i) => [x(v), y(s.values[i])] as [number, number]),
      { stroke: color, "stroke-width": 1.6 },
    );
    fit.invLogEps.forEach((v, i) => svg.circle(x(v), y(s.values[i]), 3.5, { fill: color }));
    svg.circle(MARGIN.left + 10, MARGIN.top + 10 + 16 * si, 4, { fill: color });
    svg.text(MARGIN.left + 18, MARGIN.top + 14 + 16 * si, s.name, { "font-size": 11 });
  });

  svg.text(WIDTH - MARGIN.right - 6, MARGIN.top + 14, `fitted slope ${fit.slope.toFixed(2)}`, {
    "font-size": 12,
    "text-anchor": "end",
    "font-weight": "bold",
  });
  return svg.render();
}
