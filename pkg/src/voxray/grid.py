"""Shared voxel sampling utilities.

Everything that reads voxels in bulk goes through here.  The volume data
is mirrored once per volume into a zero-padded flat array so kernel and
marching reads near the border need no bounds masks; reads that can fall
outside the padded shell use the general masked gather instead.  Both
paths implement the same border policy: outside the grid reads 0.
"""

from __future__ import annotations

import numpy as np

from .volume import Volume

# Shell width: covers kernel reach (M-1)/2 + cluster offset for the common
# filter configs, and lets the ray march overshoot a chunk of steps past the
# volume exit without any index clamping.
PAD = 16


def padded_flat(volume: Volume) -> tuple[np.ndarray, int, int, int]:
    """(flat zero-padded data, padded nx, ny, nz); cached on the volume."""
    cached = getattr(volume, "_padded_flat_cache", None)
    if cached is None:
        nx, ny, nz = volume.dims
        padded = np.zeros((nz + 2 * PAD, ny + 2 * PAD, nx + 2 * PAD), dtype=np.uint8)
        padded[PAD:-PAD, PAD:-PAD, PAD:-PAD] = volume.data
        cached = (padded.reshape(-1), nx + 2 * PAD, ny + 2 * PAD, nz + 2 * PAD)
        object.__setattr__(volume, "_padded_flat_cache", cached)
    return cached


def gather(volume: Volume, xs, ys, zs) -> np.ndarray:
    """Float voxel values at arbitrary integer coordinates; 0 outside."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    zs = np.asarray(zs, dtype=np.int64)
    nx, ny, nz = volume.dims
    inb = (xs >= 0) & (xs < nx) & (ys >= 0) & (ys < ny) & (zs >= 0) & (zs < nz)
    flat = (np.where(inb, zs, 0) * ny + np.where(inb, ys, 0)) * nx + np.where(inb, xs, 0)
    vals = volume.data.reshape(-1)[flat].astype(np.float64)
    vals[~inb] = 0.0
    return vals


def gather_offsets(volume: Volume, cx, cy, cz, offsets: np.ndarray) -> np.ndarray:
    """uint8 values at centers + offsets, shape (len(offsets), len(cx)).

    Fast path through the padded mirror when every read stays inside the
    shell; falls back to the masked gather otherwise.
    """
    cx = np.asarray(cx, dtype=np.int64)
    cy = np.asarray(cy, dtype=np.int64)
    cz = np.asarray(cz, dtype=np.int64)
    nx, ny, nz = volume.dims
    reach = int(np.abs(offsets).max()) if len(offsets) else 0
    margin = PAD - reach
    if (
        margin >= 0
        and cx.size
        and cx.min() >= -margin
        and cy.min() >= -margin
        and cz.min() >= -margin
        and cx.max() < nx + margin
        and cy.max() < ny + margin
        and cz.max() < nz + margin
    ):
        flat, wx, wy, _ = padded_flat(volume)
        dt = np.int32 if flat.size < 2**31 else np.int64
        base = (((cz + PAD) * wy + (cy + PAD)) * wx + (cx + PAD)).astype(dt)
        off = ((offsets[:, 2] * wy + offsets[:, 1]) * wx + offsets[:, 0]).astype(dt)
        return flat[base[None, :] + off[:, None]]
    vals = gather(
        volume,
        cx[None, :] + offsets[:, 0:1],
        cy[None, :] + offsets[:, 1:2],
        cz[None, :] + offsets[:, 2:3],
    )
    return vals.astype(np.uint8)


def gather_center(volume: Volume, cx, cy, cz) -> np.ndarray:
    """uint8 values at the given coordinates; 0 outside."""
    return gather_offsets(volume, cx, cy, cz, _CENTER_OFFSET)[0]


_CENTER_OFFSET = np.zeros((1, 3), dtype=np.int64)
