/** Batch feature extraction.
 *
 * Walks a directory of PGM or PPM images, runs one encoder over each, fills in
 * the standard stride pyramid by resampling the encoder's native stages,
 * and writes a per-image directory of stage tensors plus a manifest that
 * downstream assessment tools consume as-is.
 *
 * Per-image layout under outDir/<stem>/:
 *   image.pgm     the image the grids were computed from (post-resize)
 *   stage_SS.ften one tensor per pyramid stride
 *   manifest.json written last, via rename, so a manifest on disk always
 *                 points at complete stage files
 */

import { mkdirSync, readdirSync, renameSync, statSync, writeFileSync } from "node:fs";
import { basename, extname, join } from "node:path";

import { ConfigError } from "./errors.js";
import { writeFeatureTensor } from "./ften.js";
import type { Encoder, EncoderMode, StageFeatures } from "./models.js";
import { createEncoder } from "./models.js";
import type { GrayImage } from "./pgm.js";
import { encodePgm, readPgm } from "./pgm.js";
import type { Plane } from "./resample.js";
import { averagePool, resizeBilinear } from "./resample.js";

export const FEATURE_STRIDES = [4, 8, 16, 32] as const;

export type StageSource = "native" | "avg_pool" | "bilinear";

export interface ExtractorConfig {
  modelId: string;
  imageDir: string;
  outDir: string;
  /** Optional square resize applied before encoding. */
  resolution?: number;
  device?: string;
  /** When set, the chosen model must run in this mode. */
  mode?: EncoderMode;
}

export interface ExportedImage {
  image: string;
  manifest: string;
}

export interface FailedImage {
  image: string;
  error: string;
}

export interface ExportReport {
  exported: ExportedImage[];
  failed: FailedImage[];
}

function checkConfig(config: ExtractorConfig): void {
  if (config.resolution !== undefined) {
    if (!Number.isInteger(config.resolution) || config.resolution < 32) {
      throw new ConfigError(`resolution must be an integer >= 32, got ${config.resolution}`);
    }
  }
  let stat;
  try {
    stat = statSync(config.imageDir);
  } catch {
    throw new ConfigError(`image directory not found: ${config.imageDir}`);
  }
  if (!stat.isDirectory()) {
    throw new ConfigError(`not a directory: ${config.imageDir}`);
  }
}

function listImages(imageDir: string): string[] {
  const names = readdirSync(imageDir)
    .filter((name) => /\.(pgm|ppm)$/i.test(name))
    .sort();
  if (names.length === 0) {
    throw new ConfigError(`no .pgm or .ppm images in ${imageDir}`);
  }
  return names;
}

function poolStage(stage: StageFeatures, factor: number): StageFeatures {
  const planes: Plane[] = [];
  for (let c = 0; c < stage.channels; c++) {
    const view = stage.data.subarray(c * stage.height * stage.width, (c + 1) * stage.height * stage.width);
    planes.push(averagePool({ data: view, height: stage.height, width: stage.width }, factor));
  }
  const { height, width } = planes[0]!;
  const data = new Float32Array(stage.channels * height * width);
  planes.forEach((p, c) => data.set(p.data, c * height * width));
  return { data, channels: stage.channels, height, width };
}

function resizeStage(stage: StageFeatures, outHeight: number, outWidth: number): StageFeatures {
  const data = new Float32Array(stage.channels * outHeight * outWidth);
  for (let c = 0; c < stage.channels; c++) {
    const view = stage.data.subarray(c * stage.height * stage.width, (c + 1) * stage.height * stage.width);
    const plane = resizeBilinear({ data: view, height: stage.height, width: stage.width }, outHeight, outWidth);
    data.set(plane.data, c * outHeight * outWidth);
  }
  return { data, channels: stage.channels, height: outHeight, width: outWidth };
}

/** Builds the tensor for one pyramid stride from the native stages. */
function stageFor(
  native: Map<number, StageFeatures>,
  stride: number,
  imageHeight: number,
  imageWidth: number,
): { stage: StageFeatures; source: StageSource } {
  const direct = native.get(stride);
  if (direct !== undefined) {
    return { stage: direct, source: "native" };
  }
  // Coarser grids come from exact pooling when a finer stage divides the
  // target: ceil-edge windows compose, so the grid matches ceil(image / stride).
  const finer = [...native.keys()].filter((s) => s < stride && stride % s === 0);
  if (finer.length > 0) {
    const sn = Math.max(...finer);
    return { stage: poolStage(native.get(sn)!, stride / sn), source: "avg_pool" };
  }
  const nearest = [...native.keys()].sort((a, b) => Math.abs(a - stride) - Math.abs(b - stride) || a - b)[0]!;
  const th = Math.ceil(imageHeight / stride);
  const tw = Math.ceil(imageWidth / stride);
  return { stage: resizeStage(native.get(nearest)!, th, tw), source: "bilinear" };
}

function exportOne(encoder: Encoder, image: GrayImage, stageDir: string): string {
  mkdirSync(stageDir, { recursive: true });
  writeFileSync(join(stageDir, "image.pgm"), encodePgm(image));
  const native = encoder.encode(image);
  const stages: { stride: number; path: string }[] = [];
  const stageSources: Record<string, StageSource> = {};
  for (const stride of FEATURE_STRIDES) {
    const { stage, source } = stageFor(native, stride, image.height, image.width);
    const name = `stage_${String(stride).padStart(2, "0")}.ften`;
    writeFeatureTensor(
      { data: stage.data, channels: stage.channels, height: stage.height, width: stage.width, stride },
      join(stageDir, name),
    );
    stages.push({ stride, path: name });
    stageSources[String(stride)] = source;
  }
  const manifest = {
    encoder_id: encoder.id,
    image: "image.pgm",
    label_map: null,
    mode: encoder.mode,
    stage_sources: stageSources,
    stages,
  };
  const manifestPath = join(stageDir, "manifest.json");
  const tmpPath = manifestPath + ".tmp";
  writeFileSync(tmpPath, JSON.stringify(manifest, null, 2) + "\n");
  renameSync(tmpPath, manifestPath);
  return manifestPath;
}

export function exportFeatures(config: ExtractorConfig): ExportReport {
  checkConfig(config);
  const encoder = createEncoder(config.modelId);
  if (config.mode !== undefined && config.mode !== encoder.mode) {
    throw new ConfigError(`model ${encoder.id} runs in mode ${encoder.mode}, not ${config.mode}`);
  }
  let resolution = config.resolution;
  if (encoder.inputResolution !== undefined) {
    if (resolution !== undefined && resolution !== encoder.inputResolution) {
      throw new ConfigError(
        `model ${encoder.id} runs at its official resolution ${encoder.inputResolution}, not ${resolution}`,
      );
    }
    resolution = encoder.inputResolution;
  }
  const report: ExportReport = { exported: [], failed: [] };
  for (const name of listImages(config.imageDir)) {
    try {
      let image = readPgm(join(config.imageDir, name));
      if (resolution !== undefined) {
        const plane = resizeBilinear(
          { data: image.pixels, height: image.height, width: image.width },
          resolution,
          resolution,
        );
        // Snap to 8-bit so the encoded image.pgm and the features agree.
        for (let i = 0; i < plane.data.length; i++) {
          plane.data[i] = Math.round(plane.data[i]! * 255) / 255;
        }
        image = { pixels: plane.data, height: plane.height, width: plane.width };
      }
      const stem = basename(name, extname(name));
      const manifest = exportOne(encoder, image, join(config.outDir, stem));
      report.exported.push({ image: name, manifest });
    } catch (err) {
      report.failed.push({ image: name, error: (err as Error).message });
    }
  }
  return report;
}
