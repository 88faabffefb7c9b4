#!/usr/bin/env node
/** viz: batch figure generation from solver CLI manifests.
 *
 *   viz render --kind trajectory|boundary|profile|convergence \
 *              --manifest path/to/manifest.json --out figure.svg
 */

import { writeFileSync } from "fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { KINDS, SchemaError, render, type Kind } from "./index.js";

export async function main(argv: string[]): Promise<number> {
  let exitCode = 0;
  await yargs(argv)
    .scriptName("viz")
    .command(
      "render",
      "render one figure from a manifest",
      (y) =>
        y
          .option("kind", { choices: KINDS, demandOption: true })
          .option("manifest", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true }),
      (args) => {
        try {
          writeFileSync(args.out, render(args.kind as Kind, args.manifest) + "\n");
        } catch (err) {
          if (err instanceof SchemaError) {
            console.error(`schema error: ${err.message}`);
          } else {
            console.error(`error: ${(err as Error).message}`);
          }
          exitCode = 1;
        }
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(msg ?? err?.message);
      exitCode = 2;
    })
    .parseAsync();
  return exitCode;
}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (isDirectRun) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
