/** FTEN tensor container IO.
 *
 * Layout: 28-byte little-endian header ("FTEN" magic, version 1, dtype
 * code, stride, C, H, W as u32) followed by the payload in channel-major
 * row-major order. Float32 tensors are dtype 1; payloads must be finite.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { FtenError } from "./errors.js";

export const FTEN_MAGIC = "FTEN";
export const FTEN_VERSION = 1;
export const HEADER_SIZE = 28;

export const DTYPE_F32 = 1;
export const DTYPE_U16 = 2;
export const DTYPE_U8 = 3;

export interface FeatureTensor {
  /** Channel-major row-major float32 values, length channels*height*width. */
  data: Float32Array;
  channels: number;
  height: number;
  width: number;
  stride: number;
}

function checkFinite(data: Float32Array): void {
  for (let i = 0; i < data.length; i++) {
    const v = data[i]!;
    if (!Number.isFinite(v)) {
      throw new FtenError(
        `non-finite value ${v} at byte offset ${HEADER_SIZE + 4 * i}`,
      );
    }
  }
}

export function encodeFeatureTensor(t: FeatureTensor): Buffer {
  const { channels, height, width, stride } = t;
  if (channels < 1 || height < 1 || width < 1) {
    throw new FtenError(`dimensions must be positive, got ${channels}x${height}x${width}`);
  }
  if (t.data.length !== channels * height * width) {
    throw new FtenError(
      `payload length ${t.data.length} != ${channels}*${height}*${width}`,
    );
  }
  checkFinite(t.data);
  const buf = Buffer.alloc(HEADER_SIZE + 4 * t.data.length);
  buf.write(FTEN_MAGIC, 0, "ascii");
  buf.writeUInt32LE(FTEN_VERSION, 4);
  buf.writeUInt32LE(DTYPE_F32, 8);
  buf.writeUInt32LE(stride, 12);
  buf.writeUInt32LE(channels, 16);
  buf.writeUInt32LE(height, 20);
  buf.writeUInt32LE(width, 24);
  for (let i = 0; i < t.data.length; i++) {
    buf.writeFloatLE(t.data[i]!, HEADER_SIZE + 4 * i);
  }
  return buf;
}

export function writeFeatureTensor(t: FeatureTensor, path: string): void {
  writeFileSync(path, encodeFeatureTensor(t));
}

export function decodeFeatureTensor(buf: Buffer): FeatureTensor {
  if (buf.length < HEADER_SIZE) {
    throw new FtenError(`file shorter than the ${HEADER_SIZE}-byte header`);
  }
  const magic = buf.toString("ascii", 0, 4);
  if (magic !== FTEN_MAGIC) {
    throw new FtenError(`bad magic ${JSON.stringify(magic)} at offset 0`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== FTEN_VERSION) {
    throw new FtenError(`unsupported version ${version}`);
  }
  const dtype = buf.readUInt32LE(8);
  if (dtype !== DTYPE_F32) {
    throw new FtenError(`expected float32 payload (dtype 1), got dtype ${dtype}`);
  }
  const stride = buf.readUInt32LE(12);
  const channels = buf.readUInt32LE(16);
  const height = buf.readUInt32LE(20);
  const width = buf.readUInt32LE(24);
  if (channels < 1 || height < 1 || width < 1) {
    throw new FtenError(`zero dimension in ${channels}x${height}x${width}`);
  }
  const count = channels * height * width;
  const expected = HEADER_SIZE + 4 * count;
  if (buf.length < expected) {
    throw new FtenError(`truncated payload: ${buf.length} bytes, expected ${expected}`);
  }
  if (buf.length > expected) {
    throw new FtenError(`${buf.length - expected} trailing bytes after the payload`);
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = buf.readFloatLE(HEADER_SIZE + 4 * i);
  }
  checkFinite(data);
  return { data, channels, height, width, stride };
}

export function readFeatureTensor(path: string): FeatureTensor {
  let buf: Buffer;
  try {
    buf = readFileSync(path);
  } catch (err) {
    throw new FtenError(`${path}: ${(err as Error).message}`);
  }
  try {
    return decodeFeatureTensor(buf);
  } catch (err) {
    if (err instanceof FtenError) {
      throw new FtenError(`${path}: ${err.message}`);
    }
    throw err;
  }
}
