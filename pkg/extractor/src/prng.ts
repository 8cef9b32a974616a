/** Counter-based deterministic random numbers (SplitMix64).
 *
 * Matches the consumer toolkit's generator bit for bit so synthetic
 * features are reproducible across both codebases: raw output i is the
 * SplitMix64 finalizer applied to seed + (i + 1) * golden, and uniform
 * doubles take the top 53 bits. Seeds derive from string labels via
 * FNV-1a folded through one generator step per label.
 */

const MASK = 0xffffffffffffffffn;
const GOLDEN = 0x9e3779b97f4a7c15n;
const MIX1 = 0xbf58476d1ce4e5b9n;
const MIX2 = 0x94d049bb133111ebn;

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x00000100000001b3n;

function mix(x: bigint): bigint {
  x &= MASK;
  x ^= x >> 30n;
  x = (x * MIX1) & MASK;
  x ^= x >> 27n;
  x = (x * MIX2) & MASK;
  x ^= x >> 31n;
  return x;
}

/** Raw 64-bit output for one counter value. */
export function rawAt(seed: bigint, counter: number): bigint {
  return mix((seed + (BigInt(counter) + 1n) * GOLDEN) & MASK);
}

/** n raw outputs for counters offset..offset+n-1. */
export function raw(seed: bigint, n: number, offset = 0): bigint[] {
  const out = new Array<bigint>(n);
  for (let i = 0; i < n; i++) out[i] = rawAt(seed, offset + i);
  return out;
}

/** n doubles in [0, 1). */
export function uniforms(seed: bigint, n: number, offset = 0): Float64Array {
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = Number(rawAt(seed, offset + i) >> 11n) * 2 ** -53;
  }
  return out;
}

/** Child seed from a parent seed and labels (order-sensitive). */
export function derive(seed: bigint, ...labels: (string | number)[]): bigint {
  let state = seed & MASK;
  for (const label of labels) {
    let h = FNV_OFFSET;
    for (const byte of Buffer.from(String(label), "utf-8")) {
      h = ((h ^ BigInt(byte)) * FNV_PRIME) & MASK;
    }
    state = rawAt(state ^ h, 0);
  }
  return state;
}
