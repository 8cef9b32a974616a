"""Counter-based deterministic random numbers (SplitMix64).

Every stochastic choice in the toolkit (synthetic data, k-means++ init,
pixel subsampling) flows through this module so that fixtures are
bit-reproducible across runs, platforms, and reimplementations in other
languages. The generator is the SplitMix64 finalizer applied to a
counter stream; for a 64-bit seed and counter i (0-based), the i-th raw
output is

    x   = seed + (i + 1) * 0x9E3779B97F4A7C15      (mod 2^64)
    x  ^= x >> 30;  x *= 0xBF58476D1CE4E5B9        (mod 2^64)
    x  ^= x >> 27;  x *= 0x94D049BB133111EB        (mod 2^64)
    x  ^= x >> 31

Uniform doubles take the top 53 bits: u = (x >> 11) * 2**-53, giving
values in [0, 1). Gaussian deviates use the Box-Muller transform on
consecutive uniform pairs (u1 shifted into (0, 1]).

Being counter-based (no sequential state), any slice of the stream can
be generated directly, which keeps array generation vectorized.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)

# FNV-1a, used to fold string labels into derived seeds.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x00000100000001B3


def _mix(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= _MIX1
    x ^= x >> np.uint64(27)
    x *= _MIX2
    x ^= x >> np.uint64(31)
    return x


def raw(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """n raw 64-bit outputs for counters offset..offset+n-1."""
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    base = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN
    return _mix(base)


def uniforms(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """n doubles in [0, 1)."""
    return (raw(seed, n, offset) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def normals(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """n standard-normal doubles via Box-Muller on uniform pairs.

    Consumes 2*ceil(n/2) counters starting at 2*offset.
    """
    m = (n + 1) // 2
    u = raw(seed, 2 * m, 2 * offset)
    # u1 in (0, 1] so log() is finite.
    u1 = ((u[:m] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u2 = (u[m:] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
    return out[:n]


def derive(seed: int, *labels: object) -> int:
    """Derive an independent child seed from a parent seed and labels.

    Labels are hashed with FNV-1a (stable, unlike Python's randomized
    hash) and folded through one SplitMix64 step each, so sibling
    streams do not overlap in practice.
    """
    state = seed & 0xFFFFFFFFFFFFFFFF
    for label in labels:
        h = _FNV_OFFSET
        for byte in str(label).encode("utf-8"):
            h = ((h ^ byte) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
        state = int(raw(state ^ h, 1)[0])
    return state


class Stream:
    """Sequential view over the counter stream of one seed."""

    def __init__(self, seed: int):
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self._next = 0

    def uniforms(self, n: int) -> np.ndarray:
        out = uniforms(self.seed, n, self._next)
        self._next += n
        return out

    def normals(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        # Keep Box-Muller pairs aligned to even counters.
        if self._next % 2:
            self._next += 1
        out = normals(self.seed, n, self._next // 2)
        self._next += 2 * m
        return out

    def integers(self, n: int, bound: int) -> np.ndarray:
        """n integers in [0, bound) by scaling uniforms (bound < 2**53)."""
        return np.minimum((self.uniforms(n) * bound).astype(np.int64), bound - 1)

    def choice(self, n_items: int, size: int) -> np.ndarray:
        """size distinct indices from range(n_items), order-stable.

        Selection sorts the items by a per-item uniform key and takes
        the first `size`, then restores ascending index order.
        """
        if size >= n_items:
            return np.arange(n_items, dtype=np.int64)
        keys = self.uniforms(n_items)
        picked = np.argpartition(keys, size)[:size]
        return np.sort(picked)

    def permutation(self, n: int) -> np.ndarray:
        """Permutation of range(n) by sorting per-item uniform keys."""
        keys = self.uniforms(n)
        return np.argsort(keys, kind="stable").astype(np.int64)
