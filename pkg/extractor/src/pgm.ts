/** Binary PGM (P5) and PPM (P6) images, 8-bit.
 *
 * Pixels are exposed as float32 in [0, 1] (value / maxval); color rasters
 * are reduced to grayscale with the usual luma weights. The grammar allows
 * `#` comments and arbitrary whitespace between header tokens; exactly one
 * whitespace byte separates the maxval from the raster.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { PgmError } from "./errors.js";

export interface GrayImage {
  /** Row-major float32 intensities in [0, 1]. */
  pixels: Float32Array;
  height: number;
  width: number;
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0c || byte === 0x0b;
}

/** Reads the next header token, skipping whitespace and # comments. */
function nextToken(buf: Buffer, pos: number): { token: string; pos: number } {
  while (pos < buf.length) {
    const b = buf[pos]!;
    if (isSpace(b)) {
      pos++;
    } else if (b === 0x23) {
      while (pos < buf.length && buf[pos] !== 0x0a) pos++;
    } else {
      break;
    }
  }
  const start = pos;
  while (pos < buf.length && !isSpace(buf[pos]!) && buf[pos] !== 0x23) pos++;
  if (pos === start) throw new PgmError("unexpected end of header");
  return { token: buf.toString("ascii", start, pos), pos };
}

const LUMA_R = 0.299;
const LUMA_G = 0.587;
const LUMA_B = 0.114;

export function decodePgm(buf: Buffer): GrayImage {
  let pos = 0;
  let t = nextToken(buf, pos);
  if (t.token !== "P5" && t.token !== "P6") {
    throw new PgmError(`expected binary magic P5 or P6, got ${JSON.stringify(t.token)}`);
  }
  const color = t.token === "P6";
  t = nextToken(buf, t.pos);
  const width = Number(t.token);
  t = nextToken(buf, t.pos);
  const height = Number(t.token);
  t = nextToken(buf, t.pos);
  const maxval = Number(t.token);
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new PgmError(`bad dimensions ${width}x${height}`);
  }
  if (!Number.isInteger(maxval) || maxval < 1 || maxval > 255) {
    throw new PgmError(`maxval must be in 1..255 for 8-bit rasters, got ${maxval}`);
  }
  pos = t.pos;
  if (pos >= buf.length || !isSpace(buf[pos]!)) {
    throw new PgmError("missing whitespace before the raster");
  }
  pos++;
  const count = width * height;
  const expected = color ? count * 3 : count;
  if (buf.length - pos < expected) {
    throw new PgmError(`truncated raster: ${buf.length - pos} bytes, expected ${expected}`);
  }
  const pixels = new Float32Array(count);
  if (color) {
    for (let i = 0; i < count; i++) {
      const off = pos + 3 * i;
      pixels[i] = (LUMA_R * buf[off]! + LUMA_G * buf[off + 1]! + LUMA_B * buf[off + 2]!) / maxval;
    }
  } else {
    for (let i = 0; i < count; i++) {
      pixels[i] = buf[pos + i]! / maxval;
    }
  }
  return { pixels, height, width };
}

export function readPgm(path: string): GrayImage {
  let buf: Buffer;
  try {
    buf = readFileSync(path);
  } catch (err) {
    throw new PgmError(`${path}: ${(err as Error).message}`);
  }
  try {
    return decodePgm(buf);
  } catch (err) {
    if (err instanceof PgmError) {
      throw new PgmError(`${path}: ${err.message}`);
    }
    throw err;
  }
}

export function encodePgm(image: GrayImage): Buffer {
  const { pixels, height, width } = image;
  if (pixels.length !== width * height) {
    throw new PgmError(`pixel count ${pixels.length} != ${width}x${height}`);
  }
  const header = Buffer.from(`P5\n${width} ${height}\n255\n`, "ascii");
  const raster = Buffer.alloc(pixels.length);
  for (let i = 0; i < pixels.length; i++) {
    const v = pixels[i]!;
    if (!(v >= 0 && v <= 1)) {
      throw new PgmError(`pixel ${i} out of [0, 1]: ${v}`);
    }
    raster[i] = Math.round(v * 255);
  }
  return Buffer.concat([header, raster]);
}

export function writePgm(image: GrayImage, path: string): void {
  writeFileSync(path, encodePgm(image));
}
