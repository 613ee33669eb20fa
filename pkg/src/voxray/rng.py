"""Portable counter-based pseudo-random numbers.

Phantom generation must be bit-identical across runs, platforms and numpy
versions, so nothing here depends on numpy's random module.  The generator
is splitmix64 used in counter mode: draw ``i`` of the stream with seed ``s``
is ``mix64(s + (i + 1) * GOLDEN)`` where ``mix64`` is the splitmix64
finalizer.  All arithmetic is modulo 2**64.

Gaussian deviates come from the Box-Muller transform with
``u1 = (bits >> 11 + 1) * 2**-53`` (in (0, 1], so log never sees zero) and
``u2 = (bits >> 11) * 2**-53``.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0 ** -53


def mix64(x: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    """splitmix64 finalizer on uint64 scalars or arrays."""
    with np.errstate(over="ignore"):
        z = x
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def stream(seed: int, start: int, count: int) -> np.ndarray:
    """Draws ``start .. start+count-1`` of the splitmix64 stream for ``seed``."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + (idx + np.uint64(1)) * _GOLDEN
    return mix64(base)


def substream_seed(seed: int, tag: int) -> int:
    """Derives an independent stream seed from (seed, tag)."""
    return int(mix64(np.uint64((seed ^ tag) & 0xFFFFFFFFFFFFFFFF)))


def gaussian(seed: int, count: int) -> np.ndarray:
    """``count`` standard normal deviates; deviate i uses draws 2i and 2i+1."""
    bits = stream(seed, 0, 2 * count)
    u1 = ((bits[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
    u2 = (bits[1::2] >> np.uint64(11)).astype(np.float64) * _U53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def uniform_indices(seed: int, k: int, n: int) -> np.ndarray:
    """First ``k`` distinct values in [0, n) of the index stream (mod-n draws).

    Draw j of the stream maps to ``draw mod n``; duplicates are skipped in
    draw order.  The modulo bias of at most n / 2**64 is accepted for the
    sake of a simple, portable definition.
    """
    if k > n:
        raise ValueError(f"cannot draw {k} distinct indices from {n}")
    chosen = np.empty(0, dtype=np.int64)
    start = 0
    while chosen.size < k:
        batch = max(256, 2 * (k - chosen.size))
        draws = (stream(seed, start, batch) % np.uint64(n)).astype(np.int64)
        start += batch
        merged = np.concatenate([chosen, draws])
        uniq, first = np.unique(merged, return_index=True)
        order = np.argsort(first, kind="stable")
        chosen = uniq[order]
    return chosen[:k]
