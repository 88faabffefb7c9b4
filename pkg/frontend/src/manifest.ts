/** Manifest schemas for the JSON files the solver CLI writes next to its CSVs. */

import { readFileSync } from "fs";
import { dirname, join } from "path";
import { z } from "zod";

import { SchemaError } from "./csv.js";

const base = {
  command: z.string(),
  version: z.string(),
  inputs: z.record(z.unknown()),
  outputs: z.array(z.string()),
};

export const dynamicsManifestSchema = z.object({
  ...base,
  result: z.object({
    hamiltonian_drift: z.number(),
    moment_drift: z.number(),
    completed: z.boolean(),
  }),
});

export const constructManifestSchema = z.object({
  ...base,
  ansatz: z.array(
    z.object({
      epsilon: z.number(),
      scales: z.array(z.object({ kappa: z.number(), s: z.number(), beta: z.number() })),
      mu: z.array(z.number()),
      boundary_csv: z.string().optional(),
      boundary_max_deviation: z.array(z.number()).optional(),
    }),
  ),
});

export const solveManifestSchema = z.object({
  ...base,
  result: z.object({
    converged: z.boolean(),
    iterations: z.number(),
    calibrated_W: z.number(),
    profiles: z.array(
      z.object({
        vortex: z.number(),
        stream_deviation: z.number(),
        vorticity_deviation: z.number(),
        w0: z.number(),
      }),
    ),
  }),
});

export type DynamicsManifest = z.infer<typeof dynamicsManifestSchema>;
export type ConstructManifest = z.infer<typeof constructManifestSchema>;
export type SolveManifest = z.infer<typeof solveManifestSchema>;

export function loadManifest<S extends z.ZodTypeAny>(
  path: string,
  schema: S,
): { manifest: z.infer<S>; dir: string } {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaError(`${path}: ${(err as Error).message}`);
  }
  const parsed = schema.safeParse(raw);
  if (!parsed.success) {
    const issue = parsed.error.issues[0];
    throw new SchemaError(`${path}: ${issue.path.join(".")}: ${issue.message}`);
  }
  return { manifest: parsed.data, dir: dirname(path) };
}

/** Resolve a CSV named in a manifest's outputs, relative to the manifest. */
export function outputPath(dir: string, outputs: string[], name: string): string {
  if (!outputs.includes(name)) {
    throw new SchemaError(`manifest does not list output file ${name}`);
  }
  return join(dir, name);
}
