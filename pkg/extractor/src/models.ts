/** Encoder registry.
 *
 * An encoder turns a grayscale image into per-stride feature stages. The
 * built-in families are synthetic: each channel mixes the average-pooled
 * image with a low-frequency sinusoid, with mixing coefficients drawn from
 * a counter PRNG keyed by model id and stride, so any (model, image) pair
 * produces the same bytes on every run and platform.
 *
 * Real backbones plug in through registerEncoder: register a factory that
 * wraps the model's forward pass and returns stages for its native strides,
 * and the extraction pipeline handles resampling, serialization, and
 * manifests unchanged.
 */

import { UnknownModelError } from "./errors.js";
import type { GrayImage } from "./pgm.js";
import { derive, uniforms } from "./prng.js";
import { averagePool } from "./resample.js";

/** One stage of encoder output: channel-major row-major planes. */
export interface StageFeatures {
  data: Float32Array;
  channels: number;
  height: number;
  width: number;
}

export type EncoderMode = "native_hierarchy" | "downsample_single_scale";

export interface Encoder {
  readonly id: string;
  /** How the full stride pyramid relates to what encode() returns. */
  readonly mode: EncoderMode;
  /** Strides encode() produces directly, ascending. */
  readonly nativeStrides: readonly number[];
  readonly channels: number;
  /** Set when the family runs at one official square input size;
   *  images are resized to it and a conflicting request is an error. */
  readonly inputResolution?: number;
  encode(image: GrayImage): Map<number, StageFeatures>;
}

const CHANNELS = 16;

/** Grid-cell period of the sinusoidal channel component. */
const WAVE_PERIOD = 16;

/** Uniform draws consumed per channel: gain, wave gain, fy, fx, phase. */
const DRAWS_PER_CHANNEL = 5;

function syntheticStage(image: GrayImage, stride: number, stageSeed: bigint): StageFeatures {
  const pooled = averagePool({ data: image.pixels, height: image.height, width: image.width }, stride);
  const { height, width } = pooled;
  const u = uniforms(stageSeed, CHANNELS * DRAWS_PER_CHANNEL);
  const data = new Float32Array(CHANNELS * height * width);
  for (let c = 0; c < CHANNELS; c++) {
    const gain = 0.5 + 0.5 * u[c * DRAWS_PER_CHANNEL]!;
    const waveGain = 0.1 + 0.4 * u[c * DRAWS_PER_CHANNEL + 1]!;
    const fy = 1 + Math.floor(3 * u[c * DRAWS_PER_CHANNEL + 2]!);
    const fx = 1 + Math.floor(3 * u[c * DRAWS_PER_CHANNEL + 3]!);
    const phase = 2 * Math.PI * u[c * DRAWS_PER_CHANNEL + 4]!;
    const base = c * height * width;
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        const wave = Math.sin((2 * Math.PI * (fy * y + fx * x)) / WAVE_PERIOD + phase);
        data[base + y * width + x] = Math.fround(
          gain * pooled.data[y * width + x]! + waveGain * wave,
        );
      }
    }
  }
  return { data, channels: CHANNELS, height, width };
}

class SyntheticEncoder implements Encoder {
  readonly channels = CHANNELS;

  constructor(
    readonly id: string,
    readonly mode: EncoderMode,
    readonly nativeStrides: readonly number[],
  ) {}

  encode(image: GrayImage): Map<number, StageFeatures> {
    const modelSeed = derive(0n, "model", this.id);
    const stages = new Map<number, StageFeatures>();
    for (const stride of this.nativeStrides) {
      stages.set(stride, syntheticStage(image, stride, derive(modelSeed, "stage", stride)));
    }
    return stages;
  }
}

type EncoderFactory = () => Encoder;

const REGISTRY = new Map<string, EncoderFactory>([
  ["synth-hierarchical", () => new SyntheticEncoder("synth-hierarchical", "native_hierarchy", [4, 8, 16, 32])],
  ["synth-vit16", () => new SyntheticEncoder("synth-vit16", "downsample_single_scale", [16])],
]);

/** Hook for real backbones: later registrations shadow built-ins. */
export function registerEncoder(id: string, factory: EncoderFactory): void {
  REGISTRY.set(id, factory);
}

export function knownModels(): string[] {
  return [...REGISTRY.keys()].sort();
}

export function createEncoder(modelId: string): Encoder {
  const factory = REGISTRY.get(modelId);
  if (factory === undefined) {
    throw new UnknownModelError(`unknown model ${JSON.stringify(modelId)}; known: ${knownModels().join(", ")}`);
  }
  return factory();
}
