/** Figure rendering from solver CLI manifests: kind dispatch. */

import { renderBoundary } from "./render/boundary.js";
import { renderConvergence } from "./render/convergence.js";
import { renderProfile } from "./render/profile.js";
import { renderTrajectory } from "./render/trajectory.js";

export { SchemaError } from "./csv.js";
export { csvMaxDeviation } from "./render/profile.js";
export { convergenceFit } from "./render/convergence.js";

export const KINDS = ["trajectory", "boundary", "profile", "convergence"] as const;
export type Kind = (typeof KINDS)[number];

const RENDERERS: Record<Kind, (manifestPath: string) => string> = {
  trajectory: renderTrajectory,
  boundary: renderBoundary,
  profile: renderProfile,
  convergence: renderConvergence,
};

/** Render one figure kind from a manifest; returns SVG markup. */
export function render(kind: Kind, manifestPath: string): string {
  return RENDERERS[kind](manifestPath);
}
