"""Committed demo phantoms used by tests, scripts and docs.

Three families:

* spot_phantom: a solid sphere plus exactly 50 isolated bright spot voxels
  in a mildly noisy background; exercises spot suppression.
* speckle_phantom: the spot phantom plus thin bright slab speckle, the
  clumped noise that plain kernel averaging confirms but the nine-cluster
  average rejects; used for the entropy comparison.
* bench_phantom: sphere plus sub-threshold background noise only, so every
  filter sees identical candidates and frame times compare per-filter cost.

The seeds and layout constants below are committed: regenerating any spec
yields bit-identical volumes, which keeps image-level expectations stable.
"""

from __future__ import annotations

import math

from . import rng
from .volume import PhantomSpec, Shape, SpotNoise

SPOT_PHANTOM_SEED = 20
SPECKLE_PHANTOM_SEED = 3
BENCH_PHANTOM_SEED = 5
LATENCY_PHANTOM_SEED = 5


def _exact_count_density(count: int, n_voxels: int) -> float:
    # floor(density * N) == count; half-voxel headroom absorbs float rounding
    return (count + 0.5) / n_voxels


def spot_phantom_spec(dims: int = 128, seed: int = SPOT_PHANTOM_SEED) -> PhantomSpec:
    n = dims**3
    c = (dims - 1) / 2.0
    return PhantomSpec(
        dims=(dims, dims, dims),
        shapes=(
            Shape(kind="sphere", center=(c, c, c), radius=dims * 0.3125, intensity=200),
        ),
        noise_sigma=10.0,
        spot_noise=SpotNoise(density=_exact_count_density(50, n), intensity=255),
        rng_seed=seed,
    )


def _blob_positions(dims: int, count: int, sphere_radius: float, seed: int):
    """Deterministic texture centers: background only, clear of borders/sphere."""
    c = (dims - 1) / 2.0
    margin = 6
    keepout = sphere_radius + 8
    positions = []
    draw = 0
    while len(positions) < count and draw < 10000:
        bits = rng.stream(rng.substream_seed(seed, 0x736C6162), draw * 3, 3)
        draw += 1
        span = dims - 2 * margin
        x = margin + int(bits[0] % span)
        y = margin + int(bits[1] % span)
        z = margin + int(bits[2] % span)
        if math.dist((x, y, z), (c, c, c)) < keepout:
            continue
        if any(math.dist((x, y, z), p) < 10 for p in positions):
            continue
        positions.append((x, y, z))
    return positions


def speckle_phantom_spec(dims: int = 128, seed: int = SPECKLE_PHANTOM_SEED) -> PhantomSpec:
    n = dims**3
    c = (dims - 1) / 2.0
    radius = dims * 0.3125
    slabs = tuple(
        Shape(kind="box", center=(float(x), float(y), float(z)), extent=(3.0, 3.0, 1.0),
              intensity=200)
        for x, y, z in _blob_positions(dims, 30, radius, seed)
    )
    return PhantomSpec(
        dims=(dims, dims, dims),
        shapes=(Shape(kind="sphere", center=(c, c, c), radius=radius, intensity=200),) + slabs,
        noise_sigma=10.0,
        spot_noise=SpotNoise(density=_exact_count_density(60, n), intensity=255),
        rng_seed=seed,
    )


_CHECKER_OFFSETS = tuple(
    (dx, dy, dz)
    for dx in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dz in (-1, 0, 1)
    if (dx + dy + dz) % 2 == 0
)


def _checker_blob(x: int, y: int, z: int, intensity: int) -> tuple[Shape, ...]:
    """13 bright voxels on the even-parity sites of a 3^3 cell.

    Every bright voxel has only dim face neighbors, so difference-gated
    neighbor averaging rejects the cluster and keeps marching while plain
    kernel averaging accepts it; this is the texture that separates
    suppression behavior (and therefore march length) between the filters.
    """
    return tuple(
        Shape(
            kind="box",
            center=(float(x + dx), float(y + dy), float(z + dz)),
            extent=(0.8, 0.8, 0.8),
            intensity=intensity,
        )
        for dx, dy, dz in _CHECKER_OFFSETS
    )


def bench_phantom_spec(dims: int = 256, seed: int = BENCH_PHANTOM_SEED) -> PhantomSpec:
    """Sphere plus the two clump textures that split the filters' marches.

    Checker blobs are rejected by difference-gated neighbor averaging (all
    face neighbors differ sharply) but accepted by kernel means; slab
    speckle is accepted by kernel means but rejected by the nine-cluster
    average.  Rays therefore march further exactly for the filters that
    suppress more, which is the cost relationship the benchmark exists to
    show.
    """
    c = (dims - 1) / 2.0
    radius = dims * 0.3125
    scale = (dims / 256) ** 3
    positions = _blob_positions(
        dims, max(12, round(600 * scale)), radius, seed
    )
    n_checker = max(8, round(350 * scale))
    shapes: list[Shape] = [
        Shape(kind="sphere", center=(c, c, c), radius=radius, intensity=200)
    ]
    for x, y, z in positions[:n_checker]:
        shapes.extend(_checker_blob(x, y, z, intensity=255))
    for x, y, z in positions[n_checker:]:
        shapes.append(
            Shape(kind="box", center=(float(x), float(y), float(z)),
                  extent=(3.0, 3.0, 1.0), intensity=200)
        )
    return PhantomSpec(
        dims=(dims, dims, dims),
        shapes=tuple(shapes),
        noise_sigma=10.0,
        rng_seed=seed,
    )


def latency_phantom_spec(dims: int = 128, seed: int = LATENCY_PHANTOM_SEED) -> PhantomSpec:
    """Clean sphere with light noise; the interactive-monitoring scenario.

    Low sigma keeps the object's grey levels concentrated enough that no
    filter ever rejects the surface, so frame latency is dominated by the
    march itself and stays flat across filters.
    """
    c = (dims - 1) / 2.0
    return PhantomSpec(
        dims=(dims, dims, dims),
        shapes=(
            Shape(kind="sphere", center=(c, c, c), radius=dims * 0.3125, intensity=200),
        ),
        noise_sigma=3.0,
        rng_seed=seed,
    )
