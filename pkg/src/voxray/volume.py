"""Voxel volume data model, file I/O and synthetic phantom generation.

A :class:`Volume` is an immutable 3D grid of 8-bit intensities.  Voxel
(x, y, z) lives at ``data[z, y, x]``; the flat byte order is x-fastest, so
``data.tobytes()`` is exactly the on-disk raw format.  Reads outside the
grid return 0 (the surrounding space is treated as empty background).

Raw volumes on disk are headerless little-endian blobs with a JSON sidecar
``<name>.meta.json`` holding dims, spacing and bit depth.  Slice stacks are
binary PGM (P5) files stacked along z in sorted filename order.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng

_NOISE_TAG = 0x6E6F697365  # "noise"
_SPOT_TAG = 0x73706F74  # "spot"


class VolumeError(Exception):
    """Raised for malformed volumes, files or phantom specs."""


@dataclass(frozen=True)
class Volume:
    """Immutable voxel grid.

    dims is (nx, ny, nz); spacing is physical units per voxel along each
    axis; data is a read-only uint8 array of shape (nz, ny, nx).
    """

    dims: tuple[int, int, int]
    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 1:
            raise VolumeError(f"dims must each be >= 1, got {self.dims}")
        if min(self.spacing) <= 0:
            raise VolumeError(f"spacing must each be > 0, got {self.spacing}")
        arr = np.asarray(self.data, dtype=np.uint8)
        if arr.size != nx * ny * nz:
            raise VolumeError(
                f"data has {arr.size} voxels, dims {self.dims} require {nx * ny * nz}"
            )
        arr = arr.reshape(nz, ny, nx)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def voxel_count(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    def sample(self, x: int, y: int, z: int) -> int:
        """Intensity at integer voxel coords; 0 anywhere outside the grid."""
        nx, ny, nz = self.dims
        if 0 <= x < nx and 0 <= y < ny and 0 <= z < nz:
            return int(self.data[z, y, x])
        return 0

    def content_hash(self) -> str:
        """sha256 over dims and raw bytes; identifies the voxel content."""
        cached = getattr(self, "_content_hash", None)
        if cached is None:
            h = hashlib.sha256()
            h.update("{}x{}x{}|".format(*self.dims).encode())
            h.update(self.data.tobytes())
            cached = h.hexdigest()
            object.__setattr__(self, "_content_hash", cached)  # immutable data
        return cached


@dataclass(frozen=True)
class VolumeMeta:
    dims: tuple[int, int, int]
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    bit_depth: int = 8
    source: str = ""

    def __post_init__(self):
        if self.bit_depth not in (8, 16):
            raise VolumeError(f"bit_depth must be 8 or 16, got {self.bit_depth}")

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "spacing": list(self.spacing),
            "bit_depth": self.bit_depth,
            "source": self.source,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "VolumeMeta":
        try:
            return cls(
                dims=tuple(int(v) for v in obj["dims"]),
                spacing=tuple(float(v) for v in obj.get("spacing", (1.0, 1.0, 1.0))),
                bit_depth=int(obj.get("bit_depth", 8)),
                source=str(obj.get("source", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise VolumeError(f"bad volume meta: {exc}") from exc


def meta_path_for(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".meta.json")


def load_raw(path: str | Path, meta: VolumeMeta | None = None) -> Volume:
    """Load a headerless raw volume.

    When ``meta`` is None the ``<name>.meta.json`` sidecar is read.  16-bit
    input (little-endian) is rescaled to [0, 255] by v * 255 / 65535 with
    round half up.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"volume file {path} does not exist")
    if meta is None:
        mp = meta_path_for(path)
        if not mp.exists():
            raise VolumeError(f"no metadata given and sidecar {mp} not found")
        meta = VolumeMeta.from_json(json.loads(mp.read_text()))
    nx, ny, nz = meta.dims
    expected = nx * ny * nz * (meta.bit_depth // 8)
    actual = os.path.getsize(path)
    if actual != expected:
        raise VolumeError(
            f"{path}: expected {expected} bytes for dims {meta.dims} at "
            f"{meta.bit_depth}-bit, file has {actual}"
        )
    blob = path.read_bytes()
    if meta.bit_depth == 8:
        arr = np.frombuffer(blob, dtype=np.uint8)
    else:
        wide = np.frombuffer(blob, dtype="<u2").astype(np.float64)
        arr = np.floor(wide * 255.0 / 65535.0 + 0.5).astype(np.uint8)
    return Volume(dims=meta.dims, spacing=meta.spacing, data=arr)


def save_raw(volume: Volume, path: str | Path, source: str = "") -> VolumeMeta:
    """Write the raw blob plus its ``<name>.meta.json`` sidecar."""
    path = Path(path)
    path.write_bytes(volume.data.tobytes())
    meta = VolumeMeta(dims=volume.dims, spacing=volume.spacing, bit_depth=8, source=source)
    meta_path_for(path).write_text(json.dumps(meta.to_json(), indent=2, sort_keys=True) + "\n")
    return meta


def load_slice_stack(dir_path: str | Path) -> Volume:
    """Stack the PGM slices of a directory along z in sorted filename order."""
    from .images import ImageError, read_pgm

    d = Path(dir_path)
    files = sorted(p for p in d.iterdir() if p.suffix.lower() == ".pgm")
    if not files:
        raise VolumeError(f"{d}: no .pgm slices found")
    slices = []
    shape = None
    for p in files:
        try:
            s = read_pgm(p)
        except ImageError as exc:
            raise VolumeError(str(exc)) from exc
        if shape is None:
            shape = s.shape
        elif s.shape != shape:
            raise VolumeError(
                f"{p.name}: slice is {s.shape[1]}x{s.shape[0]}, "
                f"previous slices are {shape[1]}x{shape[0]}"
            )
        slices.append(s)
    stack = np.stack(slices, axis=0)  # (nz, h, w)
    nz, h, w = stack.shape
    return Volume(dims=(w, h, nz), data=stack)


# --- synthetic phantoms -----------------------------------------------------


@dataclass(frozen=True)
class Shape:
    """One rasterized primitive; a voxel is inside if its center is inside."""

    kind: str  # sphere | shell | box
    center: tuple[float, float, float]
    intensity: int
    radius: float = 0.0  # sphere, shell
    thickness: float = 0.0  # shell: band |dist - radius| <= thickness / 2
    extent: tuple[float, float, float] = (0.0, 0.0, 0.0)  # box edge lengths

    def __post_init__(self):
        if self.kind not in ("sphere", "shell", "box"):
            raise VolumeError(f"shapes[].kind must be sphere, shell or box, got {self.kind!r}")
        if not 0 <= self.intensity <= 255:
            raise VolumeError(f"shapes[].intensity must be in [0, 255], got {self.intensity}")


@dataclass(frozen=True)
class SpotNoise:
    density: float = 0.0  # fraction of voxels in [0, 1]
    intensity: int = 255

    def __post_init__(self):
        if not 0.0 <= self.density <= 1.0:
            raise VolumeError(f"spot_noise.density must be in [0, 1], got {self.density}")
        if not 0 <= self.intensity <= 255:
            raise VolumeError(f"spot_noise.intensity must be in [0, 255], got {self.intensity}")


@dataclass(frozen=True)
class PhantomSpec:
    """Deterministic synthetic volume description.

    Generation order: shapes are painted in list order, Gaussian noise
    (grey-level sigma) is added to every voxel, then floor(density * N)
    distinct voxels are overwritten with the spot intensity.  The same seed
    and spec produce a bit-identical volume on any platform.
    """

    dims: tuple[int, int, int]
    shapes: tuple[Shape, ...] = ()
    noise_sigma: float = 0.0
    spot_noise: SpotNoise = field(default_factory=SpotNoise)
    rng_seed: int = 0

    def __post_init__(self):
        if min(self.dims) < 1:
            raise VolumeError(f"dims must each be >= 1, got {self.dims}")
        if self.noise_sigma < 0:
            raise VolumeError(f"noise.sigma must be >= 0, got {self.noise_sigma}")

    def to_json(self) -> dict:
        shapes = []
        for s in self.shapes:
            d: dict = {"kind": s.kind, "center": list(s.center), "intensity": s.intensity}
            if s.kind in ("sphere", "shell"):
                d["radius"] = s.radius
            if s.kind == "shell":
                d["thickness"] = s.thickness
            if s.kind == "box":
                d["extent"] = list(s.extent)
            shapes.append(d)
        return {
            "dims": list(self.dims),
            "shapes": shapes,
            "noise": {"sigma": self.noise_sigma},
            "spot_noise": {
                "density": self.spot_noise.density,
                "intensity": self.spot_noise.intensity,
            },
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PhantomSpec":
        def fail(path: str, why: str):
            raise VolumeError(f"phantom spec field {path}: {why}")

        if not isinstance(obj, dict):
            raise VolumeError("phantom spec must be a JSON object")
        try:
            dims = tuple(int(v) for v in obj["dims"])
        except (KeyError, TypeError, ValueError):
            fail("dims", "required [nx, ny, nz] of positive integers")
        shapes = []
        for i, s in enumerate(obj.get("shapes", [])):
            try:
                shapes.append(
                    Shape(
                        kind=str(s["kind"]),
                        center=tuple(float(v) for v in s["center"]),
                        intensity=int(s["intensity"]),
                        radius=float(s.get("radius", 0.0)),
                        thickness=float(s.get("thickness", 0.0)),
                        extent=tuple(float(v) for v in s.get("extent", (0, 0, 0))),
                    )
                )
            except VolumeError as exc:
                fail(f"shapes[{i}]", str(exc))
            except (KeyError, TypeError, ValueError) as exc:
                fail(f"shapes[{i}]", f"malformed: {exc}")
        noise = obj.get("noise", {})
        spot = obj.get("spot_noise", {})
        try:
            spot_noise = SpotNoise(
                density=float(spot.get("density", 0.0)),
                intensity=int(spot.get("intensity", 255)),
            )
        except VolumeError as exc:
            raise VolumeError(f"phantom spec field spot_noise.density: {exc}") from exc
        try:
            return cls(
                dims=dims,
                shapes=tuple(shapes),
                noise_sigma=float(noise.get("sigma", 0.0)),
                spot_noise=spot_noise,
                rng_seed=int(obj.get("rng_seed", 0)),
            )
        except VolumeError as exc:
            raise VolumeError(f"phantom spec invalid: {exc}") from exc


def generate_phantom(spec: PhantomSpec) -> Volume:
    """Rasterize, add Gaussian noise, plant spot noise, clamp to [0, 255]."""
    nx, ny, nz = spec.dims
    n = nx * ny * nz
    base = np.zeros((nz, ny, nx), dtype=np.float64)

    for s in spec.shapes:
        cx, cy, cz = s.center
        if s.kind == "box":
            rx, ry, rz = (e / 2.0 for e in s.extent)
        else:
            r = s.radius + (s.thickness / 2.0 if s.kind == "shell" else 0.0)
            rx = ry = rz = r
        # rasterize only the shape's bounding sub-grid
        x0, x1 = max(0, math.ceil(cx - rx)), min(nx - 1, math.floor(cx + rx))
        y0, y1 = max(0, math.ceil(cy - ry)), min(ny - 1, math.floor(cy + ry))
        z0, z1 = max(0, math.ceil(cz - rz)), min(nz - 1, math.floor(cz + rz))
        if x0 > x1 or y0 > y1 or z0 > z1:
            continue
        xs = np.arange(x0, x1 + 1, dtype=np.float64)[None, None, :]
        ys = np.arange(y0, y1 + 1, dtype=np.float64)[None, :, None]
        zs = np.arange(z0, z1 + 1, dtype=np.float64)[:, None, None]
        if s.kind == "sphere":
            inside = (xs - cx) ** 2 + (ys - cy) ** 2 + (zs - cz) ** 2 <= s.radius**2
        elif s.kind == "shell":
            d2 = (xs - cx) ** 2 + (ys - cy) ** 2 + (zs - cz) ** 2
            inside = np.abs(np.sqrt(d2) - s.radius) <= s.thickness / 2.0
        else:  # box
            ex, ey, ez = s.extent
            inside = (
                (np.abs(xs - cx) <= ex / 2.0)
                & (np.abs(ys - cy) <= ey / 2.0)
                & (np.abs(zs - cz) <= ez / 2.0)
            )
        view = base[z0 : z1 + 1, y0 : y1 + 1, x0 : x1 + 1]
        view[inside] = float(s.intensity)

    if spec.noise_sigma > 0:
        noise_seed = rng.substream_seed(spec.rng_seed, _NOISE_TAG)
        z = rng.gaussian(noise_seed, n).reshape(nz, ny, nx)
        base = np.floor(base + spec.noise_sigma * z + 0.5)  # round half up

    out = np.clip(base, 0.0, 255.0).astype(np.uint8)

    k = math.floor(spec.spot_noise.density * n)
    if k > 0:
        spot_seed = rng.substream_seed(spec.rng_seed, _SPOT_TAG)
        idx = rng.uniform_indices(spot_seed, k, n)
        flat = out.reshape(-1)
        flat[idx] = spec.spot_noise.intensity

    return Volume(dims=spec.dims, data=out)
