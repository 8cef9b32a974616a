#!/usr/bin/env node
/** Command line front end.
 *
 * Exit codes: 0 when at least one image exported (failures, if any, are
 * listed in the summary), 1 for bad invocations or configuration, 2 when
 * images were found but every one of them failed.
 */

import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { ExtractorError, ConfigError } from "./errors.js";
import type { ExtractorConfig } from "./extract.js";
import { exportFeatures } from "./extract.js";
import { knownModels } from "./models.js";

const USAGE = `usage: ften-extract --model ID --images DIR --out DIR [options]

Runs an encoder over every .pgm/.ppm image in DIR and writes per-image
feature pyramids (stage tensors plus manifest.json) under the output
directory.

options:
  --model ID         encoder to run (known: ${knownModels().join(", ")})
  --images DIR       directory of input images (P5 gray or P6 color)
  --out DIR          output directory, one subdirectory per image
  --resolution N     square-resize inputs to NxN before encoding
  --mode MODE        require native_hierarchy or downsample_single_scale
  --device NAME      compute device hint (default cpu)
  --help             show this message
`;

function fail(code: string, message: string): number {
  process.stderr.write(JSON.stringify({ error: { code, message } }) + "\n");
  return 1;
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        model: { type: "string" },
        images: { type: "string" },
        out: { type: "string" },
        resolution: { type: "string" },
        mode: { type: "string" },
        device: { type: "string" },
        help: { type: "boolean" },
      },
      allowPositionals: false,
    });
  } catch (err) {
    return fail("ConfigError", (err as Error).message);
  }
  const opts = parsed.values;
  if (opts.help) {
    process.stdout.write(USAGE);
    return 0;
  }
  try {
    if (!opts.model || !opts.images || !opts.out) {
      throw new ConfigError("--model, --images, and --out are required");
    }
    const config: ExtractorConfig = {
      modelId: opts.model,
      imageDir: opts.images,
      outDir: opts.out,
      device: opts.device ?? "cpu",
    };
    if (opts.resolution !== undefined) {
      const resolution = Number(opts.resolution);
      if (!Number.isInteger(resolution)) {
        throw new ConfigError(`--resolution expects an integer, got ${opts.resolution}`);
      }
      config.resolution = resolution;
    }
    if (opts.mode !== undefined) {
      if (opts.mode !== "native_hierarchy" && opts.mode !== "downsample_single_scale") {
        throw new ConfigError(`--mode must be native_hierarchy or downsample_single_scale, got ${opts.mode}`);
      }
      config.mode = opts.mode;
    }
    const report = exportFeatures(config);
    process.stdout.write(JSON.stringify(report, null, 2) + "\n");
    return report.exported.length === 0 ? 2 : 0;
  } catch (err) {
    if (err instanceof ExtractorError) {
      return fail(err.code, err.message);
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
