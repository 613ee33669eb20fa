"""Naive single-voxel reference filters.

Deliberately slow, loop-based re-implementations of every filter, written
from the definitions with no code shared with the vectorized fast path.
They exist so the fast path can be checked against an independent
computation; keep them dumb.
"""

from __future__ import annotations

import math

from .filters import FilterConfig, FilterKind
from .histogram import HistogramModel
from .volume import Volume


def _read(volume: Volume, x: int, y: int, z: int) -> int:
    nx, ny, nz = volume.dims
    if 0 <= x < nx and 0 <= y < ny and 0 <= z < nz:
        return int(volume.data[z, y, x])
    return 0


def _axis_cluster(volume, cx, cy, cz, m):
    half = (m - 1) // 2
    total = 0
    for i in range(m):
        d = i - half
        total += _read(volume, cx + d, cy, cz)
        total += _read(volume, cx, cy + d, cz)
        total += _read(volume, cx, cy, cz + d)
    return total / (3 * m)


def _local_cluster(volume, cx, cy, cz, m, offset):
    total = _axis_cluster(volume, cx, cy, cz, m)
    for sx in (-1, 1):
        for sy in (-1, 1):
            for sz in (-1, 1):
                total += _axis_cluster(
                    volume, cx + sx * offset, cy + sy * offset, cz + sz * offset, m
                )
    return total / 9


def _mean(volume, cx, cy, cz, m):
    half = (m - 1) // 2
    total = 0
    for dz in range(-half, half + 1):
        for dy in range(-half, half + 1):
            for dx in range(-half, half + 1):
                total += _read(volume, cx + dx, cy + dy, cz + dz)
    return total / (m * m * m)


def _sigma(volume, cx, cy, cz, m, mult, global_sigma):
    half = (m - 1) // 2
    center = _read(volume, cx, cy, cz)
    band = mult * global_sigma
    picked = []
    for dz in range(-half, half + 1):
        for dy in range(-half, half + 1):
            for dx in range(-half, half + 1):
                v = _read(volume, cx + dx, cy + dy, cz + dz)
                if abs(v - center) <= band:
                    picked.append(v)
    return sum(picked) / len(picked)


def _okada(volume, cx, cy, cz, t_d):
    center = _read(volume, cx, cy, cz)
    picked = []
    for dx, dy, dz in ((-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1)):
        v = _read(volume, cx + dx, cy + dy, cz + dz)
        if abs(center - v) < t_d:
            picked.append(v)
    if not picked:
        return 0.0
    return sum(picked) / len(picked)


def _entropy(volume, cx, cy, cz, m, t_e, probabilities):
    half = (m - 1) // 2
    h = 0.0
    for dz in range(-half, half + 1):
        for dy in range(-half, half + 1):
            for dx in range(-half, half + 1):
                p = float(probabilities[_read(volume, cx + dx, cy + dy, cz + dz)])
                if p > 0:
                    h += -p * math.log2(p)
    if h > t_e:
        return float(_read(volume, cx, cy, cz))
    return 0.0


def reference_filter(
    volume: Volume,
    cx: int,
    cy: int,
    cz: int,
    config: FilterConfig,
    histogram: HistogramModel | None = None,
) -> float:
    """Same contract as apply_filter, computed the slow way."""
    kind = config.kind
    if kind is FilterKind.NONE:
        return float(_read(volume, cx, cy, cz))
    if kind is FilterKind.MEAN:
        return _mean(volume, cx, cy, cz, config.kernel_size)
    if kind is FilterKind.SIGMA:
        if histogram is None:
            raise ValueError("sigma filter needs the volume histogram")
        return _sigma(
            volume, cx, cy, cz, config.kernel_size, config.sigma_mult, histogram.global_sigma
        )
    if kind is FilterKind.OKADA:
        return _okada(volume, cx, cy, cz, config.okada_threshold)
    if kind is FilterKind.ENTROPY:
        if histogram is None:
            raise ValueError("entropy filter needs the volume histogram")
        return _entropy(
            volume, cx, cy, cz, config.kernel_size, config.entropy_threshold,
            histogram.probabilities,
        )
    if kind is FilterKind.LOCAL_CLUSTER:
        return _local_cluster(volume, cx, cy, cz, config.kernel_size, config.cluster_offset)
    raise ValueError(f"unhandled filter kind {kind}")
