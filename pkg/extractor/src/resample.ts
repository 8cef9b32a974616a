/** Plane resampling used to build feature pyramids.
 *
 * Both routines operate on a single row-major plane. Average pooling uses
 * ceil-edge windows so the output grid is ceil(in / factor) and partial
 * border windows average only the pixels they cover; pooling by a then by b
 * therefore lands on the same grid as pooling by a*b once. Bilinear resize
 * uses half-pixel-center alignment with edge clamping.
 */

export interface Plane {
  data: Float32Array;
  height: number;
  width: number;
}

export function averagePool(plane: Plane, factor: number): Plane {
  if (!Number.isInteger(factor) || factor < 1) {
    throw new RangeError(`pool factor must be a positive integer, got ${factor}`);
  }
  const { data, height, width } = plane;
  const oh = Math.ceil(height / factor);
  const ow = Math.ceil(width / factor);
  const out = new Float32Array(oh * ow);
  for (let oy = 0; oy < oh; oy++) {
    const y0 = oy * factor;
    const y1 = Math.min(y0 + factor, height);
    for (let ox = 0; ox < ow; ox++) {
      const x0 = ox * factor;
      const x1 = Math.min(x0 + factor, width);
      let acc = 0;
      for (let y = y0; y < y1; y++) {
        for (let x = x0; x < x1; x++) {
          acc += data[y * width + x]!;
        }
      }
      out[oy * ow + ox] = acc / ((y1 - y0) * (x1 - x0));
    }
  }
  return { data: out, height: oh, width: ow };
}

export function resizeBilinear(plane: Plane, outHeight: number, outWidth: number): Plane {
  const { data, height, width } = plane;
  if (outHeight < 1 || outWidth < 1) {
    throw new RangeError(`bad output shape ${outHeight}x${outWidth}`);
  }
  if (outHeight === height && outWidth === width) {
    return { data: data.slice(), height, width };
  }
  const out = new Float32Array(outHeight * outWidth);
  const sy = height / outHeight;
  const sx = width / outWidth;
  const x0s = new Int32Array(outWidth);
  const x1s = new Int32Array(outWidth);
  const fxs = new Float64Array(outWidth);
  for (let ox = 0; ox < outWidth; ox++) {
    const xs = (ox + 0.5) * sx - 0.5;
    const x0 = Math.min(Math.max(Math.floor(xs), 0), width - 1);
    x0s[ox] = x0;
    x1s[ox] = Math.min(x0 + 1, width - 1);
    fxs[ox] = Math.min(Math.max(xs - x0, 0), 1);
  }
  for (let oy = 0; oy < outHeight; oy++) {
    const ys = (oy + 0.5) * sy - 0.5;
    const y0 = Math.min(Math.max(Math.floor(ys), 0), height - 1);
    const y1 = Math.min(y0 + 1, height - 1);
    const fy = Math.min(Math.max(ys - y0, 0), 1);
    for (let ox = 0; ox < outWidth; ox++) {
      const x0 = x0s[ox]!;
      const x1 = x1s[ox]!;
      const fx = fxs[ox]!;
      const top = data[y0 * width + x0]! * (1 - fx) + data[y0 * width + x1]! * fx;
      const bot = data[y1 * width + x0]! * (1 - fx) + data[y1 * width + x1]! * fx;
      out[oy * outWidth + ox] = top * (1 - fy) + bot * fy;
    }
  }
  return { data: out, height: outHeight, width: outWidth };
}
